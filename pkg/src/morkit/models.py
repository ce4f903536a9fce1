"""Stationary and instationary model containers with a generic solve contract."""

from __future__ import annotations

from .operators import Operator, VectorFunctional
from .timestepping import explicit_euler
from .vectorarrays import VectorArray

__all__ = ['Model', 'StationaryModel', 'InstationaryModel']


def _rhs_vector(rhs, mu):
    if rhs is None:
        return None
    if isinstance(rhs, VectorArray):
        return rhs.copy()
    if isinstance(rhs, VectorFunctional):
        return rhs.as_vector(mu)
    if isinstance(rhs, Operator) and hasattr(rhs, 'as_vector'):
        return rhs.as_vector(mu)
    raise ValueError('rhs must be a vector array or a vector functional')


class Model:
    """Container of operators with a solve contract; immutable."""

    def solve(self, mu=None):
        raise NotImplementedError


class StationaryModel(Model):
    """`B_mu(u, .) = F(.)` in discrete form.

    `operator` maps the solution space to itself, `rhs` is a vector
    functional (or plain length-1 vector array).  `products` is a named map
    of symmetric positive semi-definite operators.
    """

    def __init__(self, operator, rhs, products=None, parameter_space=None,
                 solver_options=None):
        rhs_vec = _rhs_vector(rhs, None) if not getattr(rhs, 'parametric', False) else None
        if rhs_vec is not None and operator.range_dim != rhs_vec.dim:
            raise ValueError('operator range and rhs dimension differ')
        self.operator = operator
        self.rhs = rhs
        self.products = dict(products or {})
        self.parameter_space = parameter_space
        self.solver_options = solver_options
        self.dim = operator.source_dim

    def rhs_vector(self, mu=None):
        return _rhs_vector(self.rhs, mu)

    def solve(self, mu=None):
        return self.operator.apply_inverse(self.rhs_vector(mu), mu=mu,
                                           solver_options=self.solver_options)


class InstationaryModel(Model):
    """Method-of-lines model `u' + A_mu(u) = f`, solved with explicit Euler."""

    def __init__(self, operator, rhs, initial_data, T, nt, products=None,
                 parameter_space=None):
        if nt < 1:
            raise ValueError('nt must be >= 1')
        if initial_data.dim != operator.source_dim:
            raise ValueError('initial data dimension mismatch')
        if len(initial_data) != 1:
            raise ValueError('initial data must hold a single vector')
        self.operator = operator
        self.rhs = rhs
        self.initial_data = initial_data.copy()
        self.T = float(T)
        self.nt = int(nt)
        self.products = dict(products or {})
        self.parameter_space = parameter_space
        self.dim = operator.source_dim

    def solve(self, mu=None):
        """Full trajectory as a vector array of `nt + 1` vectors."""
        rhs_vec = _rhs_vector(self.rhs, mu)
        return explicit_euler(self.operator, rhs_vec, self.initial_data,
                              self.T, self.nt, mu=mu)
