"""Snapshot-based construction of reduced spaces.

Provides naive random sampling, POD of snapshot sets, the estimator-driven
weak greedy loop and the POD-Greedy extension step for trajectories.
"""

from __future__ import annotations

import logging
import time
from dataclasses import dataclass, field

import numpy as np

from .algorithms import gram_schmidt, pod
from .parallel import WorkerPool
from .vectorarrays import VectorArray, inner

__all__ = ['GreedyResult', 'GreedyError', 'naive_basis', 'pod_basis', 'greedy',
           'pod_greedy_extension']

_log = logging.getLogger(__name__)

# abort when the max estimate fails to decrease by this factor over
# 3 iterations (guards against infinite loops from estimator noise)
_STAGNATION_FACTOR = 1.0 - 1e-10
_STAGNATION_WINDOW = 3


class GreedyError(Exception):
    """Greedy loop aborted (stagnation or failed basis extension)."""


@dataclass
class GreedyResult:
    basis: VectorArray
    max_err_history: list
    selected_parameters: list
    reduced_model: object
    reconstructor: object
    timings: dict = field(default_factory=dict)

    def to_dict(self):
        return {
            'max_err_history': [float(e) for e in self.max_err_history],
            'selected_parameters': [mu.to_dict() for mu in self.selected_parameters],
            'basis_size': len(self.basis),
            'timings': self.timings,
        }


def _empty_like_model(model):
    if hasattr(model, 'empty_array'):
        return model.empty_array()
    from .vectorarrays import NumpyVectorArray
    return NumpyVectorArray.empty(model.dim)


def naive_basis(model, n, seed, product=None):
    """Orthonormalized snapshots at `n` random parameters."""
    if n < 1:
        raise ValueError('n must be >= 1')
    parameters = model.parameter_space.sample_randomly(n, seed)
    snapshots = _empty_like_model(model)
    for mu in parameters:
        snapshots.append(model.solve(mu))
    return gram_schmidt(snapshots, product=product)


def pod_basis(model, training_set, modes, product=None, rtol=1e-7):
    """POD modes of the snapshots at the given training parameters."""
    training_set = list(training_set)
    if not training_set:
        raise ValueError('empty training set')
    snapshots = _empty_like_model(model)
    for mu in training_set:
        snapshots.append(model.solve(mu))
    return pod(snapshots, modes=modes, product=product, rtol=rtol).modes


def _estimation_task(mu, rm):
    return rm.estimate(rm.solve(mu), mu)


def greedy(model, reductor, training_set, tol=None, N_max=None, pool=None,
           product=None):
    """Weak greedy basis generation driven by the reduced error estimator.

    `reductor(model, basis)` must return `(reduced_model, reconstructor)`
    with a working `estimate`.  Per iteration the maximum estimate over the
    training set is located (ties broken towards the lowest index), one full
    solve is performed at the maximizer and the basis is extended by
    Gram-Schmidt.  Stops at `tol` or basis size `N_max`.
    """
    training_set = list(training_set)
    if not training_set:
        raise ValueError('empty training set')
    if tol is None and N_max is None:
        raise ValueError('need tol or N_max')
    pool = pool or WorkerPool(1)
    timings = {'reduce': 0.0, 'estimate': 0.0, 'solve': 0.0, 'extend': 0.0}

    basis = _empty_like_model(model)
    history = []
    selected = []
    while True:
        t0 = time.perf_counter()
        rm, rc = reductor(model, basis)
        timings['reduce'] += time.perf_counter() - t0

        t0 = time.perf_counter()
        estimates = pool.map(_estimation_task, training_set, shared=rm)
        timings['estimate'] += time.perf_counter() - t0
        idx = int(np.argmax(estimates))
        max_err = float(estimates[idx])
        history.append(max_err)
        _log.info('greedy: N=%d, max estimate %.6e', len(basis), max_err)

        if tol is not None and max_err <= tol:
            break
        if N_max is not None and len(basis) >= N_max:
            break
        if len(history) > _STAGNATION_WINDOW and \
                history[-1] > history[-1 - _STAGNATION_WINDOW] * _STAGNATION_FACTOR:
            raise GreedyError(
                f'estimate stagnated over {_STAGNATION_WINDOW} iterations '
                f'(history tail {history[-1 - _STAGNATION_WINDOW:]})')

        mu_star = training_set[idx]
        t0 = time.perf_counter()
        snapshot = model.solve(mu_star)
        timings['solve'] += time.perf_counter() - t0

        t0 = time.perf_counter()
        extended = basis.copy()
        extended.append(snapshot)
        new_basis = gram_schmidt(extended, product=product, offset=len(basis))
        timings['extend'] += time.perf_counter() - t0
        if len(new_basis) == len(basis):
            raise GreedyError(
                f'snapshot at {mu_star!r} is linearly dependent in the basis; '
                'extension failed')
        basis = new_basis
        selected.append(mu_star)

    return GreedyResult(basis, history, selected, rm, rc, timings)


def pod_greedy_extension(basis, trajectory, product=None, modes_per_extension=1):
    """Extend `basis` by leading POD modes of the projection error trajectory."""
    if len(trajectory) == 0:
        raise ValueError('empty trajectory')
    error = trajectory.copy()
    if len(basis):
        coeffs = inner(basis, trajectory, product)
        error.axpy(-1.0, basis.lincomb(coeffs.T))
    norms = np.sqrt(np.maximum(np.diag(inner(error, error, product)), 0.0))
    scale = np.sqrt(np.maximum(np.diag(inner(trajectory, trajectory, product)), 0.0))
    if np.all(norms <= 1e-13 * max(scale.max(), 1.0)):
        _log.info('pod_greedy_extension: trajectory already in span, no extension')
        return basis.copy()
    modes = pod(error, modes=modes_per_extension, product=product, rtol=1e-13).modes
    extended = basis.copy()
    extended.append(modes)
    return gram_schmidt(extended, product=product, offset=len(basis))
