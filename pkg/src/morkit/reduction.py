"""Galerkin projection onto a reduced basis with residual-based error estimation.

The reductor produces a reduced model whose solve and estimate costs are
independent of the full dimension: reduced operator matrices are dense
``N x N`` blocks combined with the original coefficient functionals, and the
residual dual norm is evaluated from precomputed coefficients of all residual
Riesz representatives with respect to an orthonormal basis of their span
(the numerically stable variant; the plain Gramian variant is kept behind a
flag for cross-checking).
"""

from __future__ import annotations

import numpy as np
import scipy.linalg as spla

from .algorithms import gram_schmidt, riesz_representatives
from .operators import (IdentityOperator, LincombOperator, MatrixOperator,
                        Operator, VectorFunctional, ZeroOperator)
from .timestepping import explicit_euler
from .vectorarrays import NumpyVectorArray, VectorArray, inner

__all__ = [
    'Reconstructor', 'EstimatorData', 'ReducedStationaryModel',
    'ReducedInstationaryModel', 'project_operator',
    'reduce_stationary_coercive', 'reduce_instationary',
    'check_orthonormality',
]

MAX_REDUCED_DIM = 10_000
ORTHONORMALITY_TOL = 1e-8


class Reconstructor:
    """Maps reduced coefficient vectors back to the full space (linearly)."""

    def __init__(self, basis):
        self.basis = basis.copy()

    def reconstruct(self, coefficients):
        """Full-space vectors for one coefficient vector or a batch of them."""
        coefficients = np.atleast_2d(np.asarray(coefficients, dtype=float))
        if coefficients.shape[1] != len(self.basis):
            raise ValueError('coefficient length does not match basis size')
        return self.basis.lincomb(coefficients)


def project_operator(op, W, V):
    """Galerkin projection `W^T op V`, preserving lincomb structure.

    Matrix-kind leaves turn into dense reduced matrices, vector functionals
    into reduced vector functionals.  Nonlinear operators are rejected; use
    empirical interpolation first.
    """
    if isinstance(op, LincombOperator):
        return LincombOperator([project_operator(child, W, V) for child in op.operators],
                               list(op.coefficients))
    if isinstance(op, VectorFunctional):
        return VectorFunctional(NumpyVectorArray(W.inner(op.vector).T))
    if isinstance(op, ZeroOperator):
        return MatrixOperator(np.zeros((len(W), len(V))))
    if not op.linear:
        raise ValueError('cannot project a nonlinear operator directly; '
                         'interpolate it empirically first')
    if isinstance(op, IdentityOperator):
        return MatrixOperator(W.inner(V))
    return MatrixOperator(op.apply2(W, V))


class EstimatorData:
    """Online data for the residual-based a posteriori error estimate.

    `coefficients` holds, column-wise, the coordinates of the Riesz
    representatives of the rhs functional and of every `B_q b_n` with respect
    to an orthonormal basis of their joint span.  `gramian` is the plain
    Gramian of the representatives, used by the cross-check variant.
    """

    def __init__(self, coefficients, gramian, thetas, N, coercivity_estimator):
        self.coefficients = np.asarray(coefficients, dtype=float)
        self.gramian = np.asarray(gramian, dtype=float)
        self.thetas = list(thetas)
        self.N = int(N)
        self.coercivity_estimator = coercivity_estimator

    def _weights(self, u, mu):
        u = np.asarray(u, dtype=float).ravel()
        if u.size != self.N:
            raise ValueError('coefficient vector has wrong length')
        w = np.empty(1 + len(self.thetas) * self.N)
        w[0] = 1.0
        for q, theta in enumerate(self.thetas):
            w[1 + q * self.N:1 + (q + 1) * self.N] = -theta.evaluate(mu) * u
        return w

    def estimate(self, u, mu, stable=True):
        alpha = self.coercivity_estimator.evaluate(mu)
        if alpha <= 0:
            raise ValueError(f'non-positive coercivity estimate {alpha}')
        w = self._weights(u, mu)
        if stable:
            norm = np.linalg.norm(self.coefficients @ w)
        else:
            norm = np.sqrt(max(w @ self.gramian @ w, 0.0))
        return float(norm) / alpha


class ReducedStationaryModel:
    """Offline/online-decomposed stationary model of reduced dimension N."""

    def __init__(self, operator, rhs, estimator_data=None, parameter_space=None):
        self.operator = operator
        self.rhs = np.asarray(rhs, dtype=float).ravel()
        self.estimator_data = estimator_data
        self.parameter_space = parameter_space
        self.N = self.rhs.size
        if self.N > MAX_REDUCED_DIM:
            raise ValueError(f'reduced dimension {self.N} exceeds {MAX_REDUCED_DIM}')

    def solve(self, mu=None):
        """Reduced coefficient vector from a dense partial-pivoting LU solve."""
        if self.N == 0:
            return np.zeros(0)
        assembled = self.operator.assemble(mu)
        matrix = assembled.matrix if not assembled.sparse else assembled.matrix.toarray()
        try:
            return spla.solve(matrix, self.rhs)
        except spla.LinAlgError as e:
            raise ValueError(f'singular reduced system: {e}') from e

    def estimate(self, u, mu, stable=True):
        """A posteriori bound `||R_mu(u)||_{-1} / alpha_mu` for the coefficients `u`."""
        if self.estimator_data is None:
            raise ValueError('no estimator data assembled')
        return self.estimator_data.estimate(u, mu, stable=stable)


def check_orthonormality(basis, product=None, tol=ORTHONORMALITY_TOL):
    if len(basis) == 0:
        return
    gram = inner(basis, basis, product)
    defect = np.max(np.abs(gram - np.eye(len(basis))))
    if defect > tol:
        raise ValueError(f'basis not orthonormal (defect {defect:.3e} > {tol:.1e})')


def _affine_terms(operator):
    """Flat `(theta, B_q)` pairs of an affinely decomposed linear operator."""
    if isinstance(operator, LincombOperator):
        pairs = operator.flatten()
        if any(isinstance(op, LincombOperator) or not op.linear for _, op in pairs):
            raise ValueError('operator is not affinely decomposed into linear terms')
        return pairs
    if operator.linear and not operator.parametric:
        from .parameters import ConstantParameterFunctional
        return [(ConstantParameterFunctional(1.0), operator)]
    raise ValueError('operator is not affinely decomposed')


def reduce_stationary_coercive(model, basis, error_product=None,
                               coercivity_estimator=None):
    """Galerkin-project a stationary coercive model and assemble its estimator.

    `basis` must be orthonormal with respect to `error_product` (checked).
    Returns `(reduced_model, reconstructor)`.  The estimator measures the
    residual dual norm w.r.t. `error_product` and divides by the coercivity
    estimate; its online cost depends only on the number of affine terms and
    the basis size.
    """
    check_orthonormality(basis, error_product)
    terms = _affine_terms(model.operator)
    thetas = [t for t, _ in terms]
    ops = [op for _, op in terms]

    reduced_operator = LincombOperator(
        [MatrixOperator(op.apply2(basis, basis)) for op in ops], thetas)
    f = model.rhs_vector()
    reduced_rhs = basis.inner(f).ravel()

    estimator_data = None
    if coercivity_estimator is not None:
        product = error_product if error_product is not None \
            else IdentityOperator(model.dim)
        representatives = riesz_representatives(product, f)
        for op in ops:
            if len(basis):
                representatives.append(riesz_representatives(product, op.apply(basis)))
        onb = gram_schmidt(representatives, product=product)
        coefficients = inner(onb, representatives, product)
        gramian = inner(representatives, representatives, product)
        estimator_data = EstimatorData(coefficients, gramian, thetas,
                                       len(basis), coercivity_estimator)

    rm = ReducedStationaryModel(reduced_operator, reduced_rhs, estimator_data,
                                parameter_space=model.parameter_space)
    return rm, Reconstructor(basis)


class ReducedInstationaryModel:
    """Reduced method-of-lines model advanced with the same time stepper."""

    def __init__(self, operator, rhs, initial_coefficients, T, nt,
                 parameter_space=None):
        self.operator = operator
        self.rhs = None if rhs is None else np.asarray(rhs, dtype=float).ravel()
        self.initial_coefficients = np.asarray(initial_coefficients, dtype=float).ravel()
        self.T = float(T)
        self.nt = int(nt)
        self.parameter_space = parameter_space
        self.N = self.initial_coefficients.size

    def solve(self, mu=None):
        """Reduced trajectory as an `(nt + 1) x N` coefficient matrix."""
        u0 = NumpyVectorArray(self.initial_coefficients.reshape(1, -1))
        rhs = None if self.rhs is None else NumpyVectorArray(self.rhs.reshape(1, -1))
        trajectory = explicit_euler(self.operator, rhs, u0, self.T, self.nt, mu=mu)
        return trajectory.dofs(range(self.N))


def reduce_instationary(model, basis, ei_operator=None, product=None):
    """Galerkin-project an instationary model onto `basis`.

    For linear affine operators the operator is projected directly; nonlinear
    operators must be supplied in empirically interpolated form via
    `ei_operator`, whose decomposition keeps the reduced solve independent of
    the full dimension.  Returns `(reduced_model, reconstructor)`.
    """
    check_orthonormality(basis, product)
    # test against the product-weighted basis so that the reduced system is
    # the Galerkin projection w.r.t. the given inner product
    test_basis = basis if product is None else product.apply(basis)
    if ei_operator is not None:
        from .ei import project_ei_operator
        reduced_op = project_ei_operator(ei_operator, test_basis, basis)
    elif model.operator.linear:
        reduced_op = project_operator(model.operator, test_basis, basis)
    else:
        raise ValueError('nonlinear operator requires an ei_operator')

    if model.rhs is None:
        reduced_rhs = None
    else:
        rhs_vec = model.rhs if isinstance(model.rhs, VectorArray) \
            else model.rhs.as_vector()
        reduced_rhs = inner(basis, rhs_vec, product).ravel()

    initial = inner(basis, model.initial_data, product).ravel()
    rm = ReducedInstationaryModel(reduced_op, reduced_rhs, initial,
                                  model.T, model.nt,
                                  parameter_space=model.parameter_space)
    return rm, Reconstructor(basis)
