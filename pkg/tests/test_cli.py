import csv
import json

import pytest

from morkit.cli import (BENCHMARK_CSV_COLUMNS, BURGERS_CSV_COLUMNS,
                        THERMALBLOCK_CSV_COLUMNS, main)


def read_csv(path):
    with open(path) as f:
        rows = [r for r in csv.reader(f) if r and not r[0].startswith('#')]
    return rows[0], rows[1:]


class TestThermalblockCommand:

    def test_greedy_study_outputs(self, tmp_path):
        code = main(['thermalblock', '--diameter', '0.12', '--rb-size', '4',
                     '--snapshots', '2', '--test-size', '4',
                     '--output-dir', str(tmp_path)])
        assert code == 0
        header, rows = read_csv(tmp_path / 'thermalblock_error_decay.csv')
        assert header == THERMALBLOCK_CSV_COLUMNS
        assert [int(r[1]) for r in rows] == [1, 2, 3, 4]
        errs = [float(r[2]) for r in rows]
        assert errs[-1] < errs[0]
        manifest = json.loads((tmp_path / 'thermalblock_manifest.json').read_text())
        assert manifest['subcommand'] == 'thermalblock'
        assert 'basis_generation' in manifest['timings']
        history = json.loads(
            (tmp_path / 'thermalblock_greedy_history.json').read_text())
        assert len(history['max_err_history']) == 5

    def test_pod_method(self, tmp_path):
        code = main(['thermalblock', '--diameter', '0.15', '--method', 'pod',
                     '--rb-size', '3', '--snapshots', '2', '--test-size', '3',
                     '--output-dir', str(tmp_path)])
        assert code == 0
        _, rows = read_csv(tmp_path / 'thermalblock_error_decay.csv')
        assert all(r[0] == 'pod' for r in rows)

    def test_bad_flags_exit_2(self, tmp_path):
        with pytest.raises(SystemExit) as excinfo:
            main(['thermalblock', '--method', 'magic'])
        assert excinfo.value.code == 2


class TestBurgersCommand:

    def test_error_table(self, tmp_path):
        code = main(['burgers', '--cells', '80', '--nt', '80',
                     '--snapshot-params', '3', '--rb-sizes', '3,6',
                     '--ei-sizes', '12', '--test-size', '2',
                     '--output-dir', str(tmp_path)])
        assert code == 0
        header, rows = read_csv(tmp_path / 'burgers_error_table.csv')
        assert header == BURGERS_CSV_COLUMNS
        assert {(int(r[0]), int(r[1])) for r in rows} == {(3, 12), (6, 12)}
        by_n = {int(r[0]): float(r[2]) for r in rows}
        assert by_n[6] < by_n[3]

    def test_footer_documents_scale_substitution(self, tmp_path):
        main(['burgers', '--cells', '60', '--nt', '40', '--snapshot-params', '2',
              '--rb-sizes', '3', '--ei-sizes', '8', '--test-size', '1',
              '--output-dir', str(tmp_path)])
        text = (tmp_path / 'burgers_error_table.csv').read_text()
        assert text.rstrip().splitlines()[-1].startswith('# desk-scale substitute')


class TestBenchmarkCommand:

    def test_grid_and_schema(self, tmp_path):
        code = main(['benchmark', '--dims', '200', '--lens', '1,4,16,64,256',
                     '--repeats', '1', '--output-dir', str(tmp_path)])
        assert code == 0
        header, rows = read_csv(tmp_path / 'benchmark.csv')
        assert header == BENCHMARK_CSV_COLUMNS
        lens = sorted({int(r[3]) for r in rows})
        assert lens == [1, 4, 16, 64, 256]
        assert {r[0] for r in rows} == {'dense', 'list'}
        assert {r[1] for r in rows} == {'axpy', 'pod'}
        assert all(float(r[4]) >= 0 for r in rows)

    def test_unknown_backend_skipped(self, tmp_path, capsys):
        code = main(['benchmark', '--dims', '50', '--lens', '1', '--repeats', '1',
                     '--backends', 'dense,remote', '--output-dir', str(tmp_path)])
        assert code == 0
        assert 'remote backend' in capsys.readouterr().err
        _, rows = read_csv(tmp_path / 'benchmark.csv')
        assert {r[0] for r in rows} == {'dense'}
