"""Finite volume Burgers-type problem with Lax-Friedrichs flux.

Scalar conservation law `u_t + div(v * u^mu) = 0` with periodic boundary
conditions on a structured grid, in one or two space dimensions.  The
exponent `mu` is the (scalar) parameter.  Powers of possibly slightly
negative cell averages are evaluated as `sign(u) * |u|^mu` to stay
well-defined for non-integer exponents.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sps

from ..models import InstationaryModel
from ..operators import MatrixOperator, Operator
from ..parameters import ParameterSpace
from ..vectorarrays import NumpyVectorArray

__all__ = ['BurgersProblem', 'BurgersOperator', 'discretize_burgers']


@dataclass
class BurgersProblem:
    """Periodic transport problem on `[0, 2]` (1D) or `[0, 2] x [0, 1]` (2D)."""

    dim: int = 1
    cells: tuple = (500,)
    exponent_range: tuple = (1.0, 2.0)
    v: tuple = (1.0,)
    T: float = 0.3
    nt: int = 600
    lxf_lambda: tuple = None  # per-axis viscosity; None picks the default
    initial_shift: float = 0.5
    domain: tuple = field(default=None)

    def __post_init__(self):
        if self.dim not in (1, 2):
            raise ValueError('dim must be 1 or 2')
        if isinstance(self.cells, int):
            self.cells = (self.cells,) if self.dim == 1 else (self.cells, self.cells)
        if len(self.cells) != self.dim or any(c < 3 for c in self.cells):
            raise ValueError('need at least 3 cells per axis')
        if len(self.v) != self.dim:
            raise ValueError('transport vector has wrong dimension')
        if self.domain is None:
            self.domain = ((0.0, 2.0),) if self.dim == 1 else ((0.0, 2.0), (0.0, 1.0))


def _default_lambda(v, exponent_range):
    # sup over u in [0, 1], mu in the exponent range of |f'(u)| = |v| mu u^(mu-1)
    mu_max = max(abs(exponent_range[0]), abs(exponent_range[1]))
    return tuple(abs(va) * mu_max for va in v)


class BurgersOperator(Operator):
    """FV divergence of the Lax-Friedrichs flux on a periodic structured grid.

    DOFs are cell averages in C order (`(ny, nx)` for 2D).  The operator is
    the spatial term of `u' + A(u) = 0`.
    """

    linear = False
    parametric = True

    def __init__(self, cells, widths, v, lxf_lambda, parameter='exponent'):
        self.cells = tuple(cells)
        self.widths = tuple(widths)
        self.v = tuple(v)
        self.lxf_lambda = tuple(lxf_lambda)
        self.parameter = parameter
        self.source_dim = self.range_dim = int(np.prod(cells))

    def _exponent(self, mu):
        return float(mu[self.parameter][0])

    @staticmethod
    def _power(u, exponent):
        return np.sign(u) * np.abs(u) ** exponent

    @staticmethod
    def _power_derivative(u, exponent):
        return exponent * np.abs(u) ** (exponent - 1.0)

    def _axis_divergence(self, grid, exponent, axis_index, axis):
        v, lam = self.v[axis_index], self.lxf_lambda[axis_index]
        width = self.widths[axis_index]
        f = v * self._power(grid, exponent)
        f_right = np.roll(f, -1, axis=axis)
        u_right = np.roll(grid, -1, axis=axis)
        flux_right = 0.5 * (f + f_right) - 0.5 * lam * (u_right - grid)
        flux_left = np.roll(flux_right, 1, axis=axis)
        return (flux_right - flux_left) / width

    def apply(self, U, mu=None):
        self._check_apply(U)
        exponent = self._exponent(mu)
        data = U.dofs(range(U.dim))
        out = np.zeros_like(data)
        shape = (len(U),) + tuple(reversed(self.cells)) if len(self.cells) == 2 \
            else (len(U), self.cells[0])
        grid = data.reshape(shape)
        result = np.zeros_like(grid)
        for axis_index in range(len(self.cells)):
            # axis 0 of the grid is the batch; x varies fastest (last axis)
            axis = grid.ndim - 1 - axis_index
            result += self._axis_divergence(grid, exponent, axis_index, axis)
        out[:] = result.reshape(len(U), -1)
        return NumpyVectorArray.from_data(out)

    def jacobian(self, u, mu=None):
        exponent = self._exponent(mu)
        n = self.source_dim
        state = u.dofs(range(n)).ravel()
        jac = sps.csr_matrix((n, n))
        for axis_index in range(len(self.cells)):
            jac = jac + self._axis_jacobian(state, exponent, axis_index)
        return MatrixOperator(jac.tocsr())

    def _neighbor_indices(self, axis_index):
        """(left, right) periodic neighbor index arrays for all cells, C order."""
        n = self.source_dim
        idx = np.arange(n)
        if len(self.cells) == 1:
            return (idx - 1) % n, (idx + 1) % n
        nx, ny = self.cells
        ix, iy = idx % nx, idx // nx
        if axis_index == 0:
            left = iy * nx + (ix - 1) % nx
            right = iy * nx + (ix + 1) % nx
        else:
            left = ((iy - 1) % ny) * nx + ix
            right = ((iy + 1) % ny) * nx + ix
        return left, right

    def _axis_jacobian(self, state, exponent, axis_index):
        v, lam = self.v[axis_index], self.lxf_lambda[axis_index]
        width = self.widths[axis_index]
        n = self.source_dim
        left, right = self._neighbor_indices(axis_index)
        fprime = v * self._power_derivative(state, exponent)
        diag = np.full(n, lam / width)
        d_right = (0.5 * fprime[right] - 0.5 * lam) / width
        d_left = -(0.5 * fprime[left] + 0.5 * lam) / width
        idx = np.arange(n)
        rows = np.concatenate([idx, idx, idx])
        cols = np.concatenate([idx, right, left])
        vals = np.concatenate([diag, d_right, d_left])
        return sps.csr_matrix((vals, (rows, cols)), shape=(n, n))

    def restricted(self, dofs):
        dofs = np.asarray(list(dofs), dtype=int)
        neighbors = [dofs]
        for axis_index in range(len(self.cells)):
            left, right = self._neighbor_indices(axis_index)
            neighbors.extend([left[dofs], right[dofs]])
        source_dofs = np.unique(np.concatenate(neighbors))
        return _RestrictedBurgersOperator(self, dofs, source_dofs), source_dofs


class _RestrictedBurgersOperator(Operator):
    """Evaluates selected output cells of a `BurgersOperator` from stencil data."""

    linear = False
    parametric = True

    def __init__(self, parent, dofs, source_dofs):
        self.parent = parent
        self.dofs = dofs
        self.source_dim = len(source_dofs)
        self.range_dim = len(dofs)
        # positions of each output cell and its neighbors inside source_dofs
        self._center = np.searchsorted(source_dofs, dofs)
        self._neighbors = []
        for axis_index in range(len(parent.cells)):
            left, right = parent._neighbor_indices(axis_index)
            self._neighbors.append((np.searchsorted(source_dofs, left[dofs]),
                                    np.searchsorted(source_dofs, right[dofs])))

    def apply(self, U, mu=None):
        self._check_apply(U)
        exponent = self.parent._exponent(mu)
        data = U.dofs(range(U.dim))  # k x |source_dofs|
        uc = data[:, self._center]
        out = np.zeros_like(uc)
        for axis_index, (li, ri) in enumerate(self._neighbors):
            v = self.parent.v[axis_index]
            lam = self.parent.lxf_lambda[axis_index]
            width = self.parent.widths[axis_index]
            ul, ur = data[:, li], data[:, ri]
            fc = v * BurgersOperator._power(uc, exponent)
            fl = v * BurgersOperator._power(ul, exponent)
            fr = v * BurgersOperator._power(ur, exponent)
            flux_right = 0.5 * (fc + fr) - 0.5 * lam * (ur - uc)
            flux_left = 0.5 * (fl + fc) - 0.5 * lam * (uc - ul)
            out += (flux_right - flux_left) / width
        return NumpyVectorArray.from_data(out)


def discretize_burgers(problem):
    """Finite volume model for a `BurgersProblem`.

    The CFL restriction `dt * lambda / width <= 1` is the caller's
    responsibility; the defaults satisfy it.
    """
    widths = tuple((hi - lo) / c for (lo, hi), c in zip(problem.domain, problem.cells))
    lam = problem.lxf_lambda or _default_lambda(problem.v, problem.exponent_range)
    operator = BurgersOperator(problem.cells, widths, problem.v, lam)

    centers = [lo + (np.arange(c) + 0.5) * w
               for (lo, hi), c, w in zip(problem.domain, problem.cells, widths)]
    if problem.dim == 1:
        initial = problem.initial_shift * (1.0 + np.sin(2 * np.pi * centers[0]))
    else:
        x, y = np.meshgrid(centers[0], centers[1], indexing='xy')
        initial = problem.initial_shift * (1.0 + np.sin(2 * np.pi * x) * np.sin(2 * np.pi * y))
        initial = initial.reshape(-1)
    initial_data = NumpyVectorArray(initial.reshape(1, -1))

    cell_volume = float(np.prod(widths))
    l2_product = MatrixOperator(sps.identity(operator.source_dim, format='csr') * cell_volume)
    lo, hi = problem.exponent_range
    space = ParameterSpace({'exponent': (1, lo, hi)})
    return InstationaryModel(operator, None, initial_data, problem.T, problem.nt,
                             products={'l2': l2_product}, parameter_space=space)
