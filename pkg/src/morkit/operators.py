"""Parametric operator interface and in-process matrix-backed implementations.

Operators map vector arrays of their source dimension to arrays of their
range dimension.  `LincombOperator` encodes affine parameter decompositions
``B_mu = sum_q theta_q(mu) B_q`` and may be nested to arbitrary depth.
"""

from __future__ import annotations

import numpy as np
import scipy.linalg as spla
import scipy.sparse as sps
import scipy.sparse.linalg as spsla

from .parameters import (ConstantParameterFunctional, ParameterFunctional,
                         ProductFunctional)
from .vectorarrays import NumpyVectorArray, VectorArray

__all__ = [
    'Operator', 'MatrixOperator', 'LincombOperator', 'IdentityOperator',
    'ZeroOperator', 'VectorFunctional', 'InverseError',
]

# beyond this dimension apply_inverse switches from a sparse direct
# factorization to Jacobi-preconditioned CG
DIRECT_SOLVE_DIM_LIMIT = 50_000


class InverseError(Exception):
    """Linear solve failed (singular system or non-convergence)."""


class Operator:
    """Parametric map between vector arrays.

    Immutable after construction; safe to share across threads.
    """

    source_dim = None
    range_dim = None
    parametric = False
    linear = True

    def apply(self, U, mu=None):
        raise NotImplementedError

    def apply2(self, V, U, mu=None):
        """`M[i, j] = <V[i], self(U[j])>`."""
        return V.inner(self.apply(U, mu=mu))

    def apply_inverse(self, V, mu=None, solver_options=None):
        raise NotImplementedError(f'{type(self).__name__} has no inverse')

    def jacobian(self, u, mu=None):
        """Linearization at the single vector `u`; the operator itself if linear."""
        if self.linear:
            return self.assemble(mu) if self.parametric else self
        raise NotImplementedError

    def assemble(self, mu=None):
        """Parameter-independent operator equal to `self` at `mu`."""
        if not self.parametric:
            return self
        raise NotImplementedError

    def restricted(self, dofs):
        """Operator evaluating only the range DOFs in `dofs`.

        Returns `(op, source_dofs)` such that
        ``op.apply(U.dofs(source_dofs)) == self.apply(U).dofs(dofs)``.
        """
        raise NotImplementedError(f'{type(self).__name__} does not support restriction')

    def _check_apply(self, U):
        if U.dim != self.source_dim:
            raise ValueError(f'source dimension mismatch: {U.dim} != {self.source_dim}')


def _solve_matrix(matrix, rhs, solver_options=None):
    """Solve `matrix @ x.T = rhs.T` for a dense block of right-hand sides."""
    opts = dict(solver_options or {})
    n = matrix.shape[0]
    if matrix.shape[0] != matrix.shape[1]:
        raise InverseError('operator not square')
    if sps.issparse(matrix):
        kind = opts.get('type', 'direct' if n <= DIRECT_SOLVE_DIM_LIMIT else 'cg')
        if kind == 'direct':
            try:
                solve = spsla.factorized(matrix.tocsc())
            except RuntimeError as e:
                raise InverseError(str(e)) from e
            return np.column_stack([solve(r) for r in rhs]).T if len(rhs) else rhs.copy()
        # Jacobi-preconditioned CG
        rtol = opts.get('rtol', 1e-12)
        maxiter = opts.get('maxiter', 10 * n)
        diag = matrix.diagonal()
        if np.any(diag == 0):
            raise InverseError('zero diagonal entry, Jacobi preconditioner unavailable')
        M = sps.diags(1.0 / diag)
        out = np.empty_like(rhs)
        for i, r in enumerate(rhs):
            x, info = spsla.cg(matrix, r, rtol=rtol, atol=0.0, maxiter=maxiter, M=M)
            if info != 0:
                res = np.linalg.norm(matrix @ x - r)
                raise InverseError(f'CG did not converge (info={info}, residual={res:.3e})')
            out[i] = x
        return out
    try:
        lu, piv = spla.lu_factor(matrix)
    except (ValueError, spla.LinAlgError) as e:
        raise InverseError(str(e)) from e
    if not np.all(np.isfinite(lu)):
        raise InverseError('singular system')
    if np.any(np.abs(np.diag(lu)) < np.finfo(float).eps * max(np.abs(lu).max(), 1.0) * n):
        raise InverseError('singular system')
    return spla.lu_solve((lu, piv), rhs.T).T


class MatrixOperator(Operator):
    """Operator backed by a dense 2D array or a CSR sparse matrix."""

    def __init__(self, matrix):
        if sps.issparse(matrix):
            matrix = matrix.tocsr().astype(float)
            # CSR construction sums duplicate entries
            matrix.sum_duplicates()
        else:
            matrix = np.asarray(matrix, dtype=float)
            if matrix.ndim != 2:
                raise ValueError('expected a 2D matrix')
        self.matrix = matrix
        self.range_dim, self.source_dim = matrix.shape

    @property
    def sparse(self):
        return sps.issparse(self.matrix)

    def apply(self, U, mu=None):
        self._check_apply(U)
        data = U.dofs(range(U.dim))
        return NumpyVectorArray.from_data(np.asarray((self.matrix @ data.T).T))

    def apply_inverse(self, V, mu=None, solver_options=None):
        if V.dim != self.range_dim:
            raise ValueError('range dimension mismatch')
        rhs = V.dofs(range(V.dim))
        return NumpyVectorArray.from_data(_solve_matrix(self.matrix, rhs, solver_options))

    def restricted(self, dofs):
        dofs = np.asarray(list(dofs), dtype=int)
        if self.sparse:
            rows = self.matrix[dofs].tocoo()
            source_dofs = np.unique(rows.col)
            sub = sps.csr_matrix(
                (rows.data, (rows.row, np.searchsorted(source_dofs, rows.col))),
                shape=(len(dofs), len(source_dofs)))
        else:
            rows = self.matrix[dofs]
            source_dofs = np.nonzero(np.any(rows != 0, axis=0))[0]
            sub = rows[:, source_dofs]
        return MatrixOperator(sub), source_dofs


class IdentityOperator(Operator):

    def __init__(self, dim):
        self.source_dim = self.range_dim = int(dim)

    def apply(self, U, mu=None):
        self._check_apply(U)
        return U.copy()

    def apply_inverse(self, V, mu=None, solver_options=None):
        return V.copy()

    def restricted(self, dofs):
        dofs = np.asarray(list(dofs), dtype=int)
        return IdentityOperator(len(dofs)), dofs


class ZeroOperator(Operator):

    def __init__(self, source_dim, range_dim=None):
        self.source_dim = int(source_dim)
        self.range_dim = int(range_dim if range_dim is not None else source_dim)

    def apply(self, U, mu=None):
        self._check_apply(U)
        return NumpyVectorArray.from_data(np.zeros((len(U), self.range_dim)))

    def restricted(self, dofs):
        return ZeroOperator(0, len(list(dofs))), np.array([], dtype=int)


class VectorFunctional(Operator):
    """Operator of kind vector-functional, wrapping a single vector.

    Serves as right-hand side of models; `apply` evaluates the functional
    on each input vector, `as_vector` exposes the underlying vector.
    """

    def __init__(self, vector):
        if not isinstance(vector, VectorArray) or len(vector) != 1:
            raise ValueError('expected a vector array of length 1')
        self.vector = vector.copy()
        self.source_dim = vector.dim
        self.range_dim = 1

    def apply(self, U, mu=None):
        self._check_apply(U)
        return NumpyVectorArray.from_data(U.inner(self.vector))

    def as_vector(self, mu=None):
        return self.vector.copy()


class LincombOperator(Operator):
    """Affine combination `sum_q theta_q(mu) B_q` of child operators."""

    def __init__(self, operators, coefficients):
        operators = list(operators)
        if not operators:
            raise ValueError('need at least one operator')
        coefficients = [c if isinstance(c, ParameterFunctional)
                        else ConstantParameterFunctional(c)
                        for c in coefficients]
        if len(operators) != len(coefficients):
            raise ValueError('operator/coefficient count mismatch')
        if len({(op.source_dim, op.range_dim) for op in operators}) != 1:
            raise ValueError('child operator dimensions differ')
        self.operators = operators
        self.coefficients = coefficients
        self.source_dim = operators[0].source_dim
        self.range_dim = operators[0].range_dim
        self.parametric = any(not isinstance(c, ConstantParameterFunctional)
                              for c in coefficients) or \
            any(op.parametric for op in operators)
        self.linear = all(op.linear for op in operators)

    def evaluate_coefficients(self, mu):
        return np.array([c.evaluate(mu) for c in self.coefficients])

    def apply(self, U, mu=None):
        self._check_apply(U)
        thetas = self.evaluate_coefficients(mu)
        result = self.operators[0].apply(U, mu=mu)
        result.scal(thetas[0])
        for theta, op in zip(thetas[1:], self.operators[1:]):
            if theta != 0.0:
                result.axpy(theta, op.apply(U, mu=mu))
        return result

    def flatten(self):
        """Flat `(coefficient, leaf)` pairs with nested lincombs multiplied out.

        Coefficients of nested children become products of functionals.
        """
        pairs = []
        for c, op in zip(self.coefficients, self.operators):
            if isinstance(op, LincombOperator):
                for c2, leaf in op.flatten():
                    if isinstance(c, ConstantParameterFunctional) and \
                            isinstance(c2, ConstantParameterFunctional):
                        combined = ConstantParameterFunctional(c.value * c2.value)
                    else:
                        combined = ProductFunctional([c, c2])
                    pairs.append((combined, leaf))
            else:
                pairs.append((c, op))
        return pairs

    def _flatten(self, mu):
        """Yields `(theta, leaf)` pairs with nested lincombs multiplied out."""
        for c, op in zip(self.coefficients, self.operators):
            theta = c.evaluate(mu)
            if isinstance(op, LincombOperator):
                for t, leaf in op._flatten(mu):
                    yield theta * t, leaf
            else:
                yield theta, op

    def assemble(self, mu=None):
        """Single `MatrixOperator` equal to the combination at `mu`.

        All (flattened) leaves must be of matrix, identity, zero or
        vector-functional kind.
        """
        leaves = list(self._flatten(mu))
        if all(isinstance(op, VectorFunctional) for _, op in leaves):
            vec = leaves[0][1].vector.copy()
            vec.scal(leaves[0][0])
            for t, op in leaves[1:]:
                vec.axpy(t, op.vector)
            return VectorFunctional(vec)
        acc = None
        for t, op in leaves:
            if isinstance(op, MatrixOperator):
                m = op.matrix
            elif isinstance(op, IdentityOperator):
                m = sps.identity(op.source_dim, format='csr')
            elif isinstance(op, ZeroOperator):
                continue
            else:
                raise ValueError(f'cannot assemble leaf of kind {type(op).__name__}')
            term = m * t
            acc = term if acc is None else acc + term
        if acc is None:
            return ZeroOperator(self.source_dim, self.range_dim)
        return MatrixOperator(acc)

    def as_vector(self, mu=None):
        assembled = self.assemble(mu)
        if not isinstance(assembled, VectorFunctional):
            raise ValueError('not a combination of vector functionals')
        return assembled.as_vector()

    def apply_inverse(self, V, mu=None, solver_options=None):
        return self.assemble(mu).apply_inverse(V, solver_options=solver_options)

    def jacobian(self, u, mu=None):
        if self.linear:
            return self.assemble(mu)
        raise NotImplementedError
