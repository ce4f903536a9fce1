"""Experiment harness: thermal-block error decay, Burgers EI+POD reduction,
interface benchmarks and the remote-solver demo.

Every subcommand is deterministic given `--seed` (wall times excluded),
writes CSV tables with fixed, versioned column schemas and drops a JSON run
manifest next to them.  Plots are not rendered; the CSV files are meant to
be fed to gnuplot / matplotlib.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .algorithms import gram_schmidt, pod
from .basis_generation import GreedyError, greedy, naive_basis, pod_basis
from .ei import EIData, ei_greedy, interpolate_operator
from .operators import InverseError
from .parallel import WorkerPool, default_pool_size
from .reduction import reduce_instationary, reduce_stationary_coercive
from .parameters import ExpressionParameterFunctional
from .toolbox import (BurgersProblem, ThermalBlockProblem, discretize_burgers,
                      discretize_thermal_block)
from .vectorarrays import NumpyVectorArray, ListVectorArray, inner

THERMALBLOCK_CSV_COLUMNS = ['method', 'N', 'max_err', 'mean_err',
                            'max_estimate', 'mean_estimate',
                            'max_effectivity', 'mean_effectivity']
BURGERS_CSV_COLUMNS = ['N', 'M', 'max_rel_err', 'mean_rel_err']
BENCHMARK_CSV_COLUMNS = ['backend', 'op', 'dim', 'len', 'seconds']
CSV_SCHEMA_VERSION = 1


def _write_csv(path, columns, rows, footer_comments=()):
    with open(path, 'w', newline='') as f:
        writer = csv.writer(f)
        writer.writerow(columns)
        writer.writerows(rows)
        for comment in footer_comments:
            f.write(f'# {comment}\n')


def _write_manifest(out_dir, name, config, outputs, timings):
    config = {k: v for k, v in config.items() if not callable(v)}
    manifest = {
        'tool': 'morkit', 'version': __version__,
        'schema_version': CSV_SCHEMA_VERSION,
        'subcommand': name, 'config': config,
        'outputs': outputs, 'timings': timings,
    }
    path = Path(out_dir) / f'{name}_manifest.json'
    path.write_text(json.dumps(manifest, indent=2))
    return path


def _parse_blocks(text):
    try:
        m, n = text.lower().split('x')
        return int(m), int(n)
    except ValueError:
        raise argparse.ArgumentTypeError(f'expected MxN, got {text!r}')


def _parse_int_list(text):
    return [int(x) for x in text.split(',') if x]


def _parse_range(text):
    lo, hi = text.split(':')
    return float(lo), float(hi)


def _h1_errors(model, product, rc, rm, test_set, full_solutions):
    max_err = mean_err = 0.0
    max_est = mean_est = 0.0
    max_eff = mean_eff = 0.0
    for mu, u_full in zip(test_set, full_solutions):
        u_n = rm.solve(mu)
        estimate = rm.estimate(u_n, mu)
        diff = rc.reconstruct(u_n)
        diff.axpy(-1.0, u_full)
        err = float(np.sqrt(max(inner(diff, diff, product)[0, 0], 0.0)))
        eff = estimate / err if err > 0 else math.nan
        max_err, mean_err = max(max_err, err), mean_err + err
        max_est, mean_est = max(max_est, estimate), mean_est + estimate
        if not math.isnan(eff):
            max_eff, mean_eff = max(max_eff, eff), mean_eff + eff
    k = len(test_set)
    return (max_err, mean_err / k, max_est, mean_est / k, max_eff, mean_eff / k)


def cmd_thermalblock(args):
    t_start = time.perf_counter()
    out_dir = Path(args.output_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    problem = ThermalBlockProblem(blocks=args.blocks, diameter=args.diameter)
    model, product = discretize_thermal_block(problem)
    alpha = ExpressionParameterFunctional('min', 'diffusion')
    pool = WorkerPool(args.workers)

    def reductor(m, basis):
        return reduce_stationary_coercive(m, basis, error_product=product,
                                          coercivity_estimator=alpha)

    timings = {}
    t0 = time.perf_counter()
    if args.method == 'naive':
        basis = naive_basis(model, args.rb_size, args.seed, product=product)
        history = None
    elif args.method == 'pod':
        training_set = model.parameter_space.sample_uniformly(args.snapshots)
        basis = pod_basis(model, training_set, args.rb_size, product=product)
        history = None
    else:
        training_set = model.parameter_space.sample_uniformly(args.snapshots)
        result = greedy(model, reductor, training_set, tol=args.tol,
                        N_max=args.rb_size, pool=pool, product=product)
        basis, history = result.basis, result.max_err_history
    timings['basis_generation'] = time.perf_counter() - t0

    test_set = model.parameter_space.sample_randomly(args.test_size, args.seed + 1)
    t0 = time.perf_counter()
    full_solutions = [model.solve(mu) for mu in test_set]
    timings['test_solves'] = time.perf_counter() - t0

    rows = []
    t0 = time.perf_counter()
    for n in range(1, len(basis) + 1):
        rm, rc = reductor(model, basis.copy(list(range(n))))
        stats = _h1_errors(model, product, rc, rm, test_set, full_solutions)
        rows.append([args.method, n] + [f'{v:.12e}' for v in stats])
    timings['error_analysis'] = time.perf_counter() - t0

    csv_path = out_dir / 'thermalblock_error_decay.csv'
    _write_csv(csv_path, THERMALBLOCK_CSV_COLUMNS, rows)
    outputs = {'error_decay_csv': str(csv_path)}
    if history is not None:
        hist_path = out_dir / 'thermalblock_greedy_history.json'
        hist_path.write_text(json.dumps({
            'max_err_history': history,
            'selected_parameters': [mu.to_dict() for mu in result.selected_parameters],
        }, indent=2))
        outputs['greedy_history'] = str(hist_path)
    timings['total'] = time.perf_counter() - t_start
    _write_manifest(out_dir, 'thermalblock', vars(args) | {'blocks': list(args.blocks)},
                    outputs, timings)
    print(f'wrote {csv_path}')
    return 0


def _compressed_trajectory_pod(arrays, rtol=1e-7):
    """Per-trajectory POD compression; modes are scaled back by their
    singular values so the concatenation preserves the snapshot energy."""
    combined = None
    for arr in arrays:
        result = pod(arr, rtol=rtol)
        scaled = result.modes.lincomb(np.diag(result.singular_values))
        if combined is None:
            combined = scaled
        else:
            combined.append(scaled)
    return combined


def _ei_prefix(ei_data, m):
    if m == ei_data.size:
        return ei_data
    return EIData(ei_data.collateral_basis.copy(list(range(m))),
                  ei_data.interpolation_dofs[:m], triangular=ei_data.triangular)


def _linf_l2_error(full, reconstructed, cell_volume):
    diff = full - reconstructed
    norms = np.sqrt(np.sum(diff * diff, axis=1) * cell_volume)
    scale = np.max(np.sqrt(np.sum(full * full, axis=1) * cell_volume))
    return float(np.max(norms) / scale)


def cmd_burgers(args):
    t_start = time.perf_counter()
    out_dir = Path(args.output_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    cells = tuple(args.cells) if len(args.cells) > 1 else args.cells[0]
    problem = BurgersProblem(dim=args.dim, cells=cells,
                             exponent_range=args.exponent_range,
                             v=(1.0,) * args.dim, T=args.T, nt=args.nt)
    model = discretize_burgers(problem)
    op = model.operator
    cell_volume = float(np.prod([(hi - lo) / c for (lo, hi), c
                                 in zip(problem.domain, problem.cells)]))
    lo, hi = args.exponent_range
    training_mus = [model.parameter_space.sample_uniformly(args.snapshot_params)[i]
                    for i in range(args.snapshot_params)]

    timings = {}
    t0 = time.perf_counter()
    trajectories = [model.solve(mu) for mu in training_mus]
    timings['training_solves'] = time.perf_counter() - t0

    t0 = time.perf_counter()
    evaluations = _compressed_trajectory_pod(
        [op.apply(traj, mu=mu) for traj, mu in zip(trajectories, training_mus)])
    ei_data = ei_greedy(evaluations, max_dofs=max(args.ei_sizes))
    timings['ei_greedy'] = time.perf_counter() - t0

    t0 = time.perf_counter()
    snapshots = _compressed_trajectory_pod(trajectories)
    basis = pod(snapshots, modes=max(args.rb_sizes)).modes
    timings['pod'] = time.perf_counter() - t0

    test_set = model.parameter_space.sample_randomly(args.test_size, args.seed)
    t0 = time.perf_counter()
    full_solutions = [model.solve(mu).dofs(range(model.dim)) for mu in test_set]
    timings['test_solves'] = time.perf_counter() - t0

    rows = []
    t0 = time.perf_counter()
    for m in sorted(args.ei_sizes):
        if m > ei_data.size:
            continue
        ei_op = interpolate_operator(op, _ei_prefix(ei_data, m))
        for n in sorted(args.rb_sizes):
            if n > len(basis):
                continue
            rm, rc = reduce_instationary(model, basis.copy(list(range(n))),
                                         ei_operator=ei_op)
            errs = []
            for mu, full in zip(test_set, full_solutions):
                try:
                    coeffs = rm.solve(mu)
                    rec = rc.reconstruct(coeffs).dofs(range(model.dim))
                    errs.append(_linf_l2_error(full, rec, cell_volume))
                except Exception:  # noqa: BLE001 - NaN cell, run continues
                    errs.append(math.nan)
            rows.append([n, m, f'{np.nanmax(errs):.12e}' if errs else 'nan',
                         f'{np.nanmean(errs):.12e}' if errs else 'nan'])
    timings['reduction_study'] = time.perf_counter() - t0

    csv_path = out_dir / 'burgers_error_table.csv'
    _write_csv(csv_path, BURGERS_CSV_COLUMNS, rows, footer_comments=[
        'desk-scale substitute: the reference large-scale 3D study '
        '(27.6M DOFs, N=80, M=300, rel. error 2.6e-3) is not reproducible '
        'at this problem size',
    ])
    timings['total'] = time.perf_counter() - t_start
    _write_manifest(out_dir, 'burgers',
                    vars(args) | {'exponent_range': list(args.exponent_range)},
                    {'error_table_csv': str(csv_path)}, timings)
    print(f'wrote {csv_path}')
    return 0


def _bench_arrays(backend, dim, length, rng):
    data = rng.standard_normal((length, dim))
    if backend == 'dense':
        return NumpyVectorArray(data), NumpyVectorArray(rng.standard_normal((length, dim)))
    return (ListVectorArray(list(data)),
            ListVectorArray(list(rng.standard_normal((length, dim)))))


def cmd_benchmark(args):
    out_dir = Path(args.output_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(args.seed)
    rows = []
    for backend in args.backends:
        if backend == 'remote':
            print('note: remote backend not configured, skipped', file=sys.stderr)
            continue
        if backend not in ('dense', 'list'):
            print(f'note: unknown backend {backend!r}, skipped', file=sys.stderr)
            continue
        for op in args.ops:
            for dim in args.dims:
                for length in args.lens:
                    best = math.inf
                    for _ in range(args.repeats):
                        A, X = _bench_arrays(backend, dim, length, rng)
                        t0 = time.perf_counter()
                        if op == 'axpy':
                            A.axpy(0.5, X)
                        else:
                            pod(A, rtol=1e-13)
                        best = min(best, time.perf_counter() - t0)
                    rows.append([backend, op, dim, length, f'{best:.9e}'])
    csv_path = out_dir / 'benchmark.csv'
    _write_csv(csv_path, BENCHMARK_CSV_COLUMNS, rows)
    _write_manifest(out_dir, 'benchmark', vars(args),
                    {'benchmark_csv': str(csv_path)}, {})
    print(f'wrote {csv_path}')
    return 0


def _greedy_history_for_model(model, product, alpha, training_per_dim, tol, n_max,
                              workers):
    def reductor(m, basis):
        return reduce_stationary_coercive(m, basis, error_product=product,
                                          coercivity_estimator=alpha)

    training_set = model.parameter_space.sample_uniformly(training_per_dim)
    result = greedy(model, reductor, training_set, tol=tol, N_max=n_max,
                    pool=WorkerPool(workers), product=product)
    return result


def cmd_remote_demo(args):
    from .remote import SessionError, spawn_remote_model

    alpha = ExpressionParameterFunctional('min', 'diffusion')

    problem = ThermalBlockProblem(blocks=(2, 2), diameter=args.diameter)
    local_model, local_product = discretize_thermal_block(problem)
    local = _greedy_history_for_model(local_model, local_product, alpha,
                                      args.snapshots, args.tol, args.rb_size,
                                      args.workers)
    print('in-process estimator history:')
    for i, e in enumerate(local.max_err_history):
        print(f'  N={i}: {e:.6e}')

    try:
        remote_model, session = spawn_remote_model(args.server_cmd)
    except SessionError as e:
        print(f'remote session failed: {e}', file=sys.stderr)
        return 1
    try:
        remote_product = remote_model.products['h1_0_semi']
        remote = _greedy_history_for_model(remote_model, remote_product, alpha,
                                           args.snapshots, args.tol, args.rb_size,
                                           args.workers)
        print('remote estimator history:')
        for i, e in enumerate(remote.max_err_history):
            print(f'  N={i}: {e:.6e}')
        oversized = [(op, size) for kind, op, size in session.message_log
                     if op != 'dofs' and size > 64 * 1024]
        if oversized:
            print(f'payload guard violated: {oversized[:3]}', file=sys.stderr)
            return 1
    except (SessionError, GreedyError, InverseError) as e:
        print(f'remote run failed: {e}', file=sys.stderr)
        return 1
    finally:
        session.close()
    return 0


def build_parser():
    parser = argparse.ArgumentParser(prog='morkit',
                                     description='model order reduction experiments')
    sub = parser.add_subparsers(dest='command', required=True)

    tb = sub.add_parser('thermalblock', help='thermal block error decay study')
    tb.add_argument('--blocks', type=_parse_blocks, default=(2, 2))
    tb.add_argument('--diameter', type=float, default=1 / 32)
    tb.add_argument('--method', choices=['naive', 'pod', 'greedy'], default='greedy')
    tb.add_argument('--snapshots', type=int, default=3,
                    help='uniform training points per parameter dimension')
    tb.add_argument('--rb-size', type=int, default=20)
    tb.add_argument('--tol', type=float, default=None)
    tb.add_argument('--test-size', type=int, default=20)
    tb.add_argument('--seed', type=int, default=77)
    tb.add_argument('--workers', type=int, default=None)
    tb.add_argument('--output-dir', default='.')
    tb.set_defaults(func=cmd_thermalblock)

    bu = sub.add_parser('burgers', help='Burgers EI + POD reduction study')
    bu.add_argument('--dim', type=int, choices=[1, 2], default=1)
    bu.add_argument('--cells', type=_parse_int_list, default=[500])
    bu.add_argument('--exponent-range', type=_parse_range, default=(1.0, 2.0))
    bu.add_argument('--nt', type=int, default=600)
    bu.add_argument('--T', type=float, default=0.3)
    bu.add_argument('--snapshot-params', type=int, default=10)
    bu.add_argument('--rb-sizes', type=_parse_int_list, default=[5, 10, 20, 40])
    bu.add_argument('--ei-sizes', type=_parse_int_list, default=[40, 80, 120])
    bu.add_argument('--test-size', type=int, default=10)
    bu.add_argument('--seed', type=int, default=77)
    bu.add_argument('--output-dir', default='.')
    bu.set_defaults(func=cmd_burgers)

    be = sub.add_parser('benchmark', help='vector array interface benchmarks')
    be.add_argument('--op', dest='ops', type=lambda t: t.split(','),
                    default=['axpy', 'pod'])
    be.add_argument('--dims', type=_parse_int_list, default=[1000, 10000])
    be.add_argument('--lens', type=_parse_int_list, default=[1, 4, 16, 64, 256])
    be.add_argument('--backends', type=lambda t: t.split(','),
                    default=['dense', 'list'])
    be.add_argument('--repeats', type=int, default=3)
    be.add_argument('--seed', type=int, default=77)
    be.add_argument('--output-dir', default='.')
    be.set_defaults(func=cmd_benchmark)

    rd = sub.add_parser('remote-demo', help='same greedy driver, remote solver')
    rd.add_argument('--server-cmd', nargs='+', required=True)
    rd.add_argument('--diameter', type=float, default=1 / 16)
    rd.add_argument('--snapshots', type=int, default=2)
    rd.add_argument('--rb-size', type=int, default=8)
    rd.add_argument('--tol', type=float, default=None)
    rd.add_argument('--workers', type=int, default=None)
    rd.set_defaults(func=cmd_remote_demo)

    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (GreedyError, InverseError, ValueError) as e:
        print(f'error: {e}', file=sys.stderr)
        return 1


if __name__ == '__main__':
    sys.exit(main())
