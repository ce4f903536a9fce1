import numpy as np
import pytest

from morkit import (InstationaryModel, MatrixOperator, StationaryModel,
                    VectorFunctional, explicit_euler)
from morkit.timestepping import TimeSteppingError
from morkit.vectorarrays import NumpyVectorArray


@pytest.fixture
def rng():
    return np.random.default_rng(11)


class TestStationaryModel:

    def test_solve_is_apply_inverse_of_rhs(self, rng):
        M = rng.standard_normal((6, 6)) + 6 * np.eye(6)
        f = rng.standard_normal(6)
        model = StationaryModel(MatrixOperator(M),
                                VectorFunctional(NumpyVectorArray(f)))
        u = model.solve()
        assert np.allclose(u.dofs(range(6)).ravel(), np.linalg.solve(M, f),
                           atol=1e-12)
        assert model.dim == 6

    def test_plain_vector_rhs(self, rng):
        f = NumpyVectorArray(rng.standard_normal(4))
        model = StationaryModel(MatrixOperator(np.eye(4)), f)
        assert np.allclose(model.rhs_vector().dofs(range(4)), f.dofs(range(4)))

    def test_rhs_dimension_checked(self, rng):
        with pytest.raises(ValueError):
            StationaryModel(MatrixOperator(np.eye(3)),
                            NumpyVectorArray(np.ones(4)))


class TestExplicitEuler:

    def test_matches_exact_decay(self):
        # u' = -u, u(0) = 1: explicit Euler gives (1 - dt)^k exactly
        op = MatrixOperator(np.eye(1))
        u0 = NumpyVectorArray([[1.0]])
        nt = 50
        traj = explicit_euler(op, None, u0, T=1.0, nt=nt)
        assert len(traj) == nt + 1
        dt = 1.0 / nt
        values = traj.dofs([0]).ravel()
        assert np.allclose(values, (1.0 - dt) ** np.arange(nt + 1), rtol=1e-13)

    def test_constant_rhs_steady_state(self, rng):
        M = np.diag([2.0, 4.0])
        f = np.array([1.0, 2.0])
        traj = explicit_euler(MatrixOperator(M), NumpyVectorArray(f),
                              NumpyVectorArray([[0.0, 0.0]]), T=10.0, nt=2000)
        final = traj.copy([len(traj) - 1]).dofs([0, 1]).ravel()
        assert np.allclose(final, np.linalg.solve(M, f), atol=1e-8)

    def test_nan_blowup_reported_with_step(self):
        op = MatrixOperator(np.array([[-1e200]]))  # overflows within two steps
        with pytest.raises(TimeSteppingError, match='step'):
            explicit_euler(op, None, NumpyVectorArray([[1.0]]), T=1.0, nt=10)


class TestInstationaryModel:

    def test_trajectory_shape(self, rng):
        model = InstationaryModel(MatrixOperator(np.eye(3)), None,
                                  NumpyVectorArray(rng.standard_normal(3)),
                                  T=0.5, nt=20)
        traj = model.solve()
        assert len(traj) == 21
        assert traj.dim == 3

    def test_validation(self, rng):
        u0 = NumpyVectorArray(rng.standard_normal(3))
        with pytest.raises(ValueError):
            InstationaryModel(MatrixOperator(np.eye(3)), None, u0, T=1.0, nt=0)
        with pytest.raises(ValueError):
            InstationaryModel(MatrixOperator(np.eye(4)), None, u0, T=1.0, nt=5)
        with pytest.raises(ValueError):
            InstationaryModel(MatrixOperator(np.eye(3)), None,
                              NumpyVectorArray(rng.standard_normal((2, 3))),
                              T=1.0, nt=5)
