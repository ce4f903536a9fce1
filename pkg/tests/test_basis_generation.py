import numpy as np
import pytest

from morkit import (GreedyError, WorkerPool, greedy, naive_basis, pod,
                    pod_basis, pod_greedy_extension)
from morkit.vectorarrays import NumpyVectorArray, inner


class TestNaiveAndPodBasis:

    def test_naive_basis_orthonormal(self, thermal_small):
        model, product = thermal_small
        basis = naive_basis(model, 4, seed=1, product=product)
        gram = inner(basis, basis, product)
        assert np.max(np.abs(gram - np.eye(len(basis)))) < 1e-10

    def test_naive_basis_deterministic(self, thermal_small):
        model, product = thermal_small
        a = naive_basis(model, 3, seed=5, product=product)
        b = naive_basis(model, 3, seed=5, product=product)
        assert np.array_equal(a.dofs(range(model.dim)), b.dofs(range(model.dim)))

    def test_pod_basis_orthonormal(self, thermal_small):
        model, product = thermal_small
        training = model.parameter_space.sample_uniformly(2)
        basis = pod_basis(model, training, modes=5, product=product)
        gram = inner(basis, basis, product)
        assert np.max(np.abs(gram - np.eye(len(basis)))) < 1e-10

    def test_empty_training_set_rejected(self, thermal_small):
        model, product = thermal_small
        with pytest.raises(ValueError):
            pod_basis(model, [], modes=3)


class TestGreedy:

    def test_decay_and_bookkeeping(self, thermal_small, thermal_reductor):
        model, product = thermal_small
        training = model.parameter_space.sample_uniformly(2)
        result = greedy(model, thermal_reductor, training, N_max=6,
                        product=product)
        assert len(result.basis) == 6
        assert len(result.max_err_history) == 7
        assert len(result.selected_parameters) == 6
        # selected parameters are pairwise distinct
        assert len(set(result.selected_parameters)) == 6
        assert result.max_err_history[-1] < result.max_err_history[0]
        gram = inner(result.basis, result.basis, product)
        assert np.max(np.abs(gram - np.eye(6))) < 1e-10

    def test_tolerance_stop(self, thermal_small, thermal_reductor):
        model, product = thermal_small
        training = model.parameter_space.sample_uniformly(2)
        result = greedy(model, thermal_reductor, training, tol=1e-1, N_max=20,
                        product=product)
        assert result.max_err_history[-1] <= 1e-1
        assert len(result.basis) < 20

    def test_single_parameter_training_set_terminates(self, thermal_small,
                                                      thermal_reductor):
        # after one snapshot the only training estimate is ~0; the loop must
        # stop (tolerance) or abort (stagnation/extension), never spin
        model, product = thermal_small
        training = model.parameter_space.sample_randomly(1, 43)
        try:
            result = greedy(model, thermal_reductor, training, tol=1e-12,
                            N_max=10, product=product)
            assert len(result.basis) <= 2
        except GreedyError:
            pass

    def test_reduced_model_returned_matches_basis(self, thermal_small,
                                                  thermal_reductor):
        model, product = thermal_small
        training = model.parameter_space.sample_uniformly(2)
        result = greedy(model, thermal_reductor, training, N_max=3,
                        product=product)
        assert result.reduced_model.N == len(result.basis)
        mu = training[0]
        u = result.reduced_model.solve(mu)
        assert u.shape == (3,)

    def test_pool_size_does_not_change_selection(self, thermal_small,
                                                 thermal_reductor):
        model, product = thermal_small
        training = model.parameter_space.sample_uniformly(2)
        results = [greedy(model, thermal_reductor, training, N_max=4,
                          pool=WorkerPool(size), product=product)
                   for size in (1, 2, 8)]
        for other in results[1:]:
            assert other.selected_parameters == results[0].selected_parameters
            assert other.max_err_history == results[0].max_err_history

    def test_needs_stopping_criterion(self, thermal_small, thermal_reductor):
        model, product = thermal_small
        with pytest.raises(ValueError):
            greedy(model, thermal_reductor,
                   model.parameter_space.sample_uniformly(2), product=product)
        with pytest.raises(ValueError):
            greedy(model, thermal_reductor, [], N_max=3, product=product)


class TestPodGreedyExtension:

    def test_extends_with_dominant_error_mode(self):
        rng = np.random.default_rng(47)
        basis = pod(NumpyVectorArray(rng.standard_normal((3, 10))), rtol=1e-13).modes
        trajectory = NumpyVectorArray(rng.standard_normal((8, 10)))
        extended = pod_greedy_extension(basis, trajectory, modes_per_extension=2)
        assert len(extended) == len(basis) + 2
        gram = extended.inner(extended)
        assert np.max(np.abs(gram - np.eye(len(extended)))) < 1e-10
        # the leading vectors are unchanged
        assert np.array_equal(extended.dofs(range(10))[:len(basis)],
                              basis.dofs(range(10)))

    def test_contained_trajectory_is_no_op(self):
        rng = np.random.default_rng(53)
        basis = pod(NumpyVectorArray(rng.standard_normal((4, 8))), rtol=1e-13).modes
        trajectory = basis.lincomb(rng.standard_normal((6, len(basis))))
        extended = pod_greedy_extension(basis, trajectory)
        assert len(extended) == len(basis)

    def test_empty_trajectory_rejected(self):
        basis = NumpyVectorArray(np.eye(3))
        with pytest.raises(ValueError):
            pod_greedy_extension(basis, NumpyVectorArray.empty(3))
