"""Empirical operator interpolation (EI-Greedy and DEIM).

A collateral basis `c_1..c_M` and interpolation DOFs `x_1..x_M` are built
from training evaluations of an operator.  The interpolated operator agrees
with the original one exactly at the interpolation DOFs and its outputs live
in the span of the collateral basis, which restores online efficiency for
nonlinear operators once combined with restricted operator evaluation.
"""

from __future__ import annotations

import logging

import numpy as np
import scipy.linalg as spla

from .algorithms import pod
from .operators import Operator
from .vectorarrays import NumpyVectorArray

__all__ = ['EIData', 'ei_greedy', 'deim', 'interpolate_operator', 'restricted',
           'RestrictedOperator', 'EmpiricalInterpolatedOperator',
           'ProjectedEIOperator']

_log = logging.getLogger(__name__)

# relative smallest-singular-value threshold below which the interpolation
# matrix counts as rank-deficient
_SINGULARITY_TOL = 1e-13


class EIData:
    """Collateral basis, interpolation DOFs and interpolation matrix.

    The interpolation matrix has entries ``basis[j][dof[i]]``.  For
    EI-Greedy-built data it is unit lower triangular.
    """

    def __init__(self, collateral_basis, interpolation_dofs, triangular=False):
        dofs = np.asarray(list(interpolation_dofs), dtype=int)
        if len(np.unique(dofs)) != len(dofs):
            raise ValueError('interpolation DOFs must be distinct')
        if len(collateral_basis) != len(dofs):
            raise ValueError('collateral basis size and DOF count differ')
        self.collateral_basis = collateral_basis.copy()
        self.interpolation_dofs = dofs
        self.interpolation_matrix = collateral_basis.dofs(dofs).T
        self.triangular = triangular
        if len(dofs):
            svals = spla.svdvals(self.interpolation_matrix)
            if svals[-1] < _SINGULARITY_TOL * svals[0]:
                raise ValueError('interpolation matrix is numerically singular')
            self.condition_number = float(svals[0] / svals[-1])
        else:
            self.condition_number = 1.0

    @property
    def size(self):
        return len(self.interpolation_dofs)

    def solve_interpolation(self, values):
        """Collateral coefficients for DOF `values` of shape `(M,)` or `(M, k)`."""
        if self.size == 0:
            return np.zeros_like(values)
        if self.triangular:
            return spla.solve_triangular(self.interpolation_matrix, values,
                                         lower=True, unit_diagonal=True)
        return spla.solve(self.interpolation_matrix, values)


def ei_greedy(evaluations, max_dofs=None, rtol=None):
    """Greedy construction of interpolation data from operator evaluations.

    Repeatedly interpolates the training evaluations with the current data,
    picks the evaluation with the largest sup-norm error, normalizes its
    error vector at its largest-magnitude DOF (lowest index on ties) and
    appends it to the collateral basis.  Stops at `max_dofs` interpolation
    DOFs or once the maximum error dropped below `rtol` times its initial
    value.
    """
    if len(evaluations) == 0:
        raise ValueError('no training evaluations')
    E = evaluations.dofs(range(evaluations.dim))
    if not np.any(E):
        raise ValueError('all training evaluations are zero')
    K, dim = E.shape
    basis = np.empty((0, dim))
    dofs = []
    interp_matrix = np.empty((0, 0))
    initial_max = None
    errors = []
    limit = min(K, dim) if max_dofs is None else min(max_dofs, K, dim)

    while True:
        if dofs:
            coeffs = spla.solve_triangular(interp_matrix, E[:, dofs].T,
                                           lower=True, unit_diagonal=True)
            residual = E - coeffs.T @ basis
        else:
            residual = E
        sup_errors = np.max(np.abs(residual), axis=1)
        k_star = int(np.argmax(sup_errors))
        max_err = sup_errors[k_star]
        errors.append(float(max_err))
        if initial_max is None:
            initial_max = max_err
        if len(dofs) >= limit:
            break
        if rtol is not None and max_err <= rtol * initial_max:
            break
        if max_err <= 1e-15 * initial_max:
            break
        e = residual[k_star]
        dof = int(np.argmax(np.abs(e)))
        basis = np.vstack([basis, e / e[dof]])
        dofs.append(dof)
        interp_matrix = basis[:, dofs].T

    data = EIData(NumpyVectorArray(basis, dim=dim), dofs, triangular=True)
    data.training_errors = errors
    return data


def deim(evaluations, modes):
    """Discrete empirical interpolation: POD collateral basis + greedy points.

    The first DOF maximizes the first mode; each further DOF maximizes the
    residual of the next mode after interpolation on the DOFs selected so far.
    """
    result = pod(evaluations, modes=modes, rtol=1e-13)
    if len(result.modes) < modes:
        raise ValueError(f'requested {modes} modes but evaluations have '
                         f'numerical rank {len(result.modes)}')
    U = result.modes.dofs(range(evaluations.dim))
    dofs = [int(np.argmax(np.abs(U[0])))]
    for k in range(1, modes):
        c = spla.solve(U[:k, dofs].T, U[k, dofs])
        residual = U[k] - c @ U[:k]
        dofs.append(int(np.argmax(np.abs(residual))))
    return EIData(result.modes, dofs, triangular=False)


class RestrictedOperator:
    """Operator evaluating only selected range DOFs from stencil-local inputs.

    ``op.apply(U.dofs(source_dofs)) == full_op.apply(U).dofs(dofs)``.
    """

    def __init__(self, operator, source_dofs, dofs):
        self.operator = operator
        self.source_dofs = np.asarray(source_dofs, dtype=int)
        self.dofs = np.asarray(dofs, dtype=int)

    def apply_to_subvectors(self, sub_data, mu=None):
        """Evaluate on `(k, len(source_dofs))` input rows; returns `(k, len(dofs))`."""
        U = NumpyVectorArray(np.atleast_2d(sub_data), dim=len(self.source_dofs))
        out = self.operator.apply(U, mu=mu)
        return out.dofs(range(out.dim))


def restricted(op, dofs):
    """Restriction of `op` to the range DOFs `dofs`; see `RestrictedOperator`."""
    sub_op, source_dofs = op.restricted(dofs)
    return RestrictedOperator(sub_op, source_dofs, dofs)


class EmpiricalInterpolatedOperator(Operator):
    """Interpolated operator: collateral expansion of restricted evaluations.

    Uses the original operator's restricted evaluation when available,
    otherwise evaluates fully and extracts the interpolation DOFs.
    """

    def __init__(self, operator, ei_data):
        if operator.range_dim != ei_data.collateral_basis.dim:
            raise ValueError('operator range and collateral dimension differ')
        self.operator = operator
        self.ei_data = ei_data
        self.source_dim = operator.source_dim
        self.range_dim = operator.range_dim
        self.linear = operator.linear
        self.parametric = operator.parametric
        try:
            self.restricted_operator = restricted(operator, ei_data.interpolation_dofs)
        except NotImplementedError:
            self.restricted_operator = None

    def _dof_evaluations(self, U, mu):
        if self.restricted_operator is not None:
            sub = U.dofs(self.restricted_operator.source_dofs)
            return self.restricted_operator.apply_to_subvectors(sub, mu=mu)
        return self.operator.apply(U, mu=mu).dofs(self.ei_data.interpolation_dofs)

    def apply(self, U, mu=None):
        self._check_apply(U)
        values = self._dof_evaluations(U, mu)  # len(U) x M
        coeffs = self.ei_data.solve_interpolation(values.T)  # M x len(U)
        return self.ei_data.collateral_basis.lincomb(coeffs.T)


class ProjectedEIOperator(Operator):
    """Fully online-efficient Galerkin projection of an interpolated operator.

    Precomputes the test-basis projection of the collateral basis and the
    stencil rows of the source basis, so that an online apply touches only
    objects of size N, M and the stencil width.
    """

    def __init__(self, ei_operator, W, V):
        ei = ei_operator.ei_data
        self.ei_data = ei
        self.operator = ei_operator.operator
        self.source_dim = len(V)
        self.range_dim = len(W)
        self.linear = ei_operator.linear
        self.parametric = ei_operator.parametric
        self.projected_collateral = W.inner(ei.collateral_basis)  # N_W x M
        self.restricted_operator = ei_operator.restricted_operator
        if self.restricted_operator is not None:
            # stencil rows of the source basis: M' x N_V
            self.source_rows = V.dofs(self.restricted_operator.source_dofs).T
            self._full_basis = None
        else:
            self.source_rows = None
            self._full_basis = V.copy()

    @property
    def online_sizes(self):
        """Shapes of all data touched by an online apply (FLOP proxy)."""
        sizes = {'projected_collateral': self.projected_collateral.shape}
        if self.source_rows is not None:
            sizes['source_rows'] = self.source_rows.shape
        return sizes

    def _dof_evaluations(self, coeffs, mu):
        if self.restricted_operator is not None:
            sub = coeffs @ self.source_rows.T  # k x M'
            return self.restricted_operator.apply_to_subvectors(sub, mu=mu)
        full = self._full_basis.lincomb(coeffs)
        return self.operator.apply(full, mu=mu).dofs(self.ei_data.interpolation_dofs)

    def apply(self, U, mu=None):
        self._check_apply(U)
        coeffs = U.dofs(range(U.dim))  # k x N_V
        values = self._dof_evaluations(coeffs, mu)  # k x M
        c = self.ei_data.solve_interpolation(values.T)  # M x k
        return NumpyVectorArray.from_data((self.projected_collateral @ c).T)


def interpolate_operator(op, ei_data):
    """Interpolated version of `op` w.r.t. the given interpolation data."""
    return EmpiricalInterpolatedOperator(op, ei_data)


def project_ei_operator(ei_op, W, V):
    """Online-efficient reduced version of an interpolated operator."""
    if not isinstance(ei_op, EmpiricalInterpolatedOperator):
        raise ValueError('expected an empirically interpolated operator')
    return ProjectedEIOperator(ei_op, W, V)
