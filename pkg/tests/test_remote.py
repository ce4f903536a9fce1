"""Remote bridge tests against the in-repo reference protocol server."""

import json
import subprocess
import sys
from pathlib import Path

import numpy as np
import pytest

from morkit import (ExpressionParameterFunctional, gram_schmidt, greedy,
                    reduce_stationary_coercive)
from morkit.remote import (PROTOCOL_VERSION, RemoteError, Session,
                           SessionError, spawn_remote_model)
from morkit.toolbox import ThermalBlockProblem, discretize_thermal_block
from morkit.vectorarrays import inner

SERVER = [sys.executable, str(Path(__file__).parent / 'remote_server.py')]
DIAMETER = 0.2


def server_cmd(diameter=DIAMETER):
    return SERVER + ['--diameter', str(diameter)]


@pytest.fixture
def remote():
    model, session = spawn_remote_model(server_cmd())
    yield model, session
    session.close()


@pytest.fixture(scope='module')
def local():
    problem = ThermalBlockProblem(blocks=(2, 2), diameter=DIAMETER)
    return discretize_thermal_block(problem)


class TestSession:

    def test_handshake_and_model_info(self, remote):
        model, _ = remote
        assert model.dim > 0
        assert 'h1_0_semi' in model.products
        assert model.parameter_space.ranges == {'diffusion': (4, 0.1, 1.0)}

    def test_version_mismatch_rejected(self):
        session = Session(server_cmd())
        try:
            with pytest.raises(SessionError, match='version'):
                hello = session.call('hello', version=99)
                if hello.get('version') != 99:
                    raise SessionError('protocol version mismatch')
        finally:
            session.close()

    def test_spawn_failure(self):
        with pytest.raises(SessionError):
            spawn_remote_model(['/nonexistent/solver'])

    def test_unknown_op(self, remote):
        _, session = remote
        with pytest.raises(RemoteError) as excinfo:
            session.call('frobnicate')
        assert excinfo.value.code == 'UNKNOWN_OP'

    def test_closed_session_rejects_calls(self, remote):
        model, session = remote
        session.close()
        with pytest.raises(SessionError):
            session.call('model_info')


class TestRemoteArraysAndOperators:

    def test_solve_matches_local(self, remote, local):
        rmodel, _ = remote
        lmodel, lproduct = local
        assert rmodel.dim == lmodel.dim
        mu = lmodel.parameter_space.sample_randomly(1, 111)[0]
        u_remote = rmodel.solve(mu)
        u_local = lmodel.solve(mu)
        got = u_remote.dofs(range(rmodel.dim))
        assert np.allclose(got, u_local.dofs(range(lmodel.dim)), atol=1e-14)

    def test_array_operations(self, remote):
        model, _ = remote
        f = model.rhs_vector()
        g = f.copy()
        g.scal(2.0)
        assert np.allclose(g.dofs(range(5)), 2 * f.dofs(range(5)))
        g.axpy(-2.0, f)
        assert np.allclose(g.dofs(range(model.dim)), 0.0)
        f.append(f.copy())
        assert len(f) == 2
        combo = f.lincomb([[0.5, 0.5]])
        assert len(combo) == 1
        gram = combo.inner(combo)
        assert gram.shape == (1, 1) and gram[0, 0] > 0

    def test_operator_apply_and_inverse(self, remote, local):
        rmodel, _ = remote
        lmodel, lproduct = local
        f = rmodel.rhs_vector()
        riesz = rmodel.products['h1_0_semi'].apply_inverse(f)
        f_local = lmodel.rhs_vector()
        riesz_local = lproduct.apply_inverse(f_local)
        assert np.allclose(riesz.dofs(range(rmodel.dim)),
                           riesz_local.dofs(range(lmodel.dim)), atol=1e-12)
        mu = lmodel.parameter_space.sample_randomly(1, 113)[0]
        out = rmodel.operator.apply(f, mu=mu)
        expected = lmodel.operator.apply(f_local, mu=mu)
        assert np.allclose(out.dofs(range(rmodel.dim)),
                           expected.dofs(range(lmodel.dim)), atol=1e-13)

    def test_gram_schmidt_runs_on_remote_arrays(self, remote):
        model, _ = remote
        product = model.products['h1_0_semi']
        mus = model.parameter_space.sample_randomly(3, 117)
        snapshots = model.empty_array()
        for mu in mus:
            snapshots.append(model.solve(mu))
        basis = gram_schmidt(snapshots, product=product)
        gram = inner(basis, basis, product)
        assert np.max(np.abs(gram - np.eye(len(basis)))) < 1e-10

    def test_freed_object_errors(self, remote):
        model, session = remote
        f = model.rhs_vector()
        f.free()
        with pytest.raises(RemoteError) as excinfo:
            f.dofs([0])
        assert excinfo.value.code == 'OBJECT_FREED'

    def test_unknown_object_reported(self, remote):
        model, session = remote
        with pytest.raises(RemoteError) as excinfo:
            session.call('apply', op_id=model.operator.operators[0].object_id,
                         array_id=999999, mu=None)
        assert excinfo.value.code == 'BAD_REQUEST'


class TestGreedyEquivalence:

    def test_identical_driver_identical_history(self, remote, local):
        rmodel, session = remote
        lmodel, lproduct = local
        alpha = ExpressionParameterFunctional('min', 'diffusion')

        def run(model, product):
            def reductor(m, basis):
                return reduce_stationary_coercive(
                    m, basis, error_product=product, coercivity_estimator=alpha)
            training = model.parameter_space.sample_uniformly(2)
            return greedy(model, reductor, training, N_max=3, product=product)

        result_remote = run(rmodel, rmodel.products['h1_0_semi'])
        result_local = run(lmodel, lproduct)
        assert result_remote.selected_parameters == result_local.selected_parameters
        assert np.allclose(result_remote.max_err_history,
                           result_local.max_err_history, rtol=1e-10)

    def test_no_dim_sized_payloads(self, remote):
        model, session = remote
        mu = model.parameter_space.sample_randomly(1, 119)[0]
        u = model.solve(mu)
        u.inner(u)
        u.axpy(0.5, u.copy())
        # generous bound: any dim-proportional payload would be >> this
        for direction, op, size in session.message_log:
            if op != 'dofs':
                assert size < 16 * 1024, f'{op} message of {size} bytes'


class TestRobustness:

    def test_malformed_lines_do_not_crash_server(self):
        proc = subprocess.Popen(server_cmd(), stdin=subprocess.PIPE,
                                stdout=subprocess.PIPE, text=True, bufsize=1)
        try:
            bad_lines = ['not json', '{"id": 1}', '[]', '{"id": 2, "op": 5}',
                         '{"id": 3, "op": "solve", "args": {"mu": "x"}}',
                         '{"id": 4, "op": "copy", "args": {"array_id": -1}}',
                         '{"id": 5, "op": "free", "args": {}}',
                         '{"id": 6, "op": "dofs", "args": {"array_id": null}}']
            for line in bad_lines:
                proc.stdin.write(line + '\n')
                proc.stdin.flush()
                response = json.loads(proc.stdout.readline())
                assert response['ok'] is False
                assert response['error']['code'] in (
                    'BAD_REQUEST', 'UNKNOWN_OP', 'SOLVER_FAILURE')
            # the server still answers correctly afterwards
            proc.stdin.write(json.dumps(
                {'id': 10, 'op': 'hello', 'args': {'version': 1}}) + '\n')
            proc.stdin.flush()
            response = json.loads(proc.stdout.readline())
            assert response['ok'] and response['result']['version'] == PROTOCOL_VERSION
        finally:
            proc.kill()
            proc.wait()
