"""Parameters, parameter spaces and parameter functionals.

A parameter is an ordered mapping from component names to flat real
vectors.  Parameter spaces are boxes over such components and provide
deterministic uniform/random sampling.  Parameter functionals map
parameters to scalars and encode the coefficient functions of affine
operator decompositions as well as coercivity estimates.
"""

from __future__ import annotations

import itertools
import math

import numpy as np

__all__ = [
    'Parameter', 'ParameterSpace',
    'ParameterFunctional', 'ProjectionParameterFunctional',
    'ConstantParameterFunctional', 'ExpressionParameterFunctional',
    'ProductFunctional', 'functional_from_dict',
]


class Parameter:
    """Immutable ordered map from component names to flat float vectors."""

    def __init__(self, components):
        comps = {}
        for name, value in dict(components).items():
            arr = np.asarray(value, dtype=float).ravel()
            if not np.all(np.isfinite(arr)):
                raise ValueError(f'parameter component {name!r} contains non-finite entries')
            arr.flags.writeable = False
            comps[str(name)] = arr
        self._components = comps

    @property
    def components(self):
        return dict(self._components)

    def __getitem__(self, name):
        return self._components[name]

    def __contains__(self, name):
        return name in self._components

    def keys(self):
        return self._components.keys()

    def __eq__(self, other):
        if not isinstance(other, Parameter):
            return NotImplemented
        if list(self._components) != list(other._components):
            return False
        return all(np.array_equal(self._components[k], other._components[k])
                   for k in self._components)

    def __hash__(self):
        return hash(tuple((k, tuple(v)) for k, v in self._components.items()))

    def __repr__(self):
        inner = ', '.join(f'{k}: {list(v)}' for k, v in self._components.items())
        return f'Parameter({{{inner}}})'

    def to_dict(self):
        return {k: v.tolist() for k, v in self._components.items()}

    @classmethod
    def from_dict(cls, data):
        return cls(data)


class ParameterSpace:
    """Box-constrained parameter domain.

    `ranges` maps component names to `(shape, lower, upper)`.  `shape` is
    an int or tuple giving the number of scalar entries of the (flattened)
    component, `lower <= upper` are scalar bounds applied entry-wise.
    """

    def __init__(self, ranges):
        self.ranges = {}
        for name, (shape, lo, hi) in dict(ranges).items():
            if isinstance(shape, int):
                size = shape
            else:
                size = int(np.prod(shape)) if len(shape) else 1
            lo, hi = float(lo), float(hi)
            if not lo <= hi:
                raise ValueError(f'lower bound exceeds upper bound for {name!r}')
            self.ranges[str(name)] = (size, lo, hi)

    @property
    def total_dim(self):
        return sum(size for size, _, _ in self.ranges.values())

    def contains(self, mu):
        for name, (size, lo, hi) in self.ranges.items():
            if name not in mu:
                return False
            v = mu[name]
            if v.size != size or np.any(v < lo) or np.any(v > hi):
                return False
        return True

    def sample_uniformly(self, k):
        """Tensor grid with `k` points per scalar dimension, endpoints included.

        `k == 1` degenerates to the lower bound of each range.  Parameters are
        returned in lexicographic order over the scalar dimensions (component
        insertion order, row-major within components).
        """
        if k < 1:
            raise ValueError('k must be >= 1')
        axes = []
        layout = []
        for name, (size, lo, hi) in self.ranges.items():
            pts = np.linspace(lo, hi, k)  # k=1 -> [lo]
            for i in range(size):
                axes.append(pts)
                layout.append(name)
        result = []
        for combo in itertools.product(*axes):
            comps = {}
            pos = 0
            for name, (size, _, _) in self.ranges.items():
                comps[name] = np.array(combo[pos:pos + size])
                pos += size
            result.append(Parameter(comps))
        return result

    def sample_randomly(self, n, seed):
        """`n` i.i.d. uniform draws from the box.

        Uses NumPy's PCG64 generator; the seed fully determines the sequence
        on all platforms.
        """
        if n < 0:
            raise ValueError('n must be >= 0')
        rng = np.random.default_rng(seed)
        result = []
        for _ in range(n):
            comps = {}
            for name, (size, lo, hi) in self.ranges.items():
                comps[name] = rng.uniform(lo, hi, size=size)
            result.append(Parameter(comps))
        return result

    def to_dict(self):
        return {name: [size, lo, hi] for name, (size, lo, hi) in self.ranges.items()}

    @classmethod
    def from_dict(cls, data):
        return cls({name: (int(s), lo, hi) for name, (s, lo, hi) in data.items()})


class ParameterFunctional:
    """Deterministic, pure map from parameters to scalars."""

    def evaluate(self, mu):
        raise NotImplementedError

    def __call__(self, mu):
        return self.evaluate(mu)

    def to_dict(self):
        raise NotImplementedError


class ProjectionParameterFunctional(ParameterFunctional):
    """Extracts a single entry of one parameter component."""

    def __init__(self, component, index=0):
        self.component = component
        self.index = int(index)

    def evaluate(self, mu):
        return float(mu[self.component][self.index])

    def __repr__(self):
        return f'ProjectionParameterFunctional({self.component!r}, {self.index})'

    def to_dict(self):
        return {'kind': 'projection', 'component': self.component, 'index': self.index}


class ConstantParameterFunctional(ParameterFunctional):

    def __init__(self, value):
        self.value = float(value)

    def evaluate(self, mu):
        return self.value

    def __repr__(self):
        return f'ConstantParameterFunctional({self.value})'

    def to_dict(self):
        return {'kind': 'constant', 'value': self.value}


class ExpressionParameterFunctional(ParameterFunctional):
    """Simple closed expressions over parameter components.

    Supported expressions:
      - ``min``/``max`` of one component's entries (coercivity/continuity
        estimates of blockwise-parametrized problems),
      - ``product`` of one component's entries,
      - ``affine``: ``bias + sum(coef * mu[comp][idx])`` over given terms.
    """

    def __init__(self, expression, component=None, bias=0.0, terms=()):
        if expression not in ('min', 'max', 'product', 'affine'):
            raise ValueError(f'unknown expression {expression!r}')
        if expression != 'affine' and component is None:
            raise ValueError('component required')
        self.expression = expression
        self.component = component
        self.bias = float(bias)
        self.terms = [(str(c), int(i), float(a)) for c, i, a in terms]

    def evaluate(self, mu):
        if self.expression == 'min':
            return float(np.min(mu[self.component]))
        if self.expression == 'max':
            return float(np.max(mu[self.component]))
        if self.expression == 'product':
            return float(np.prod(mu[self.component]))
        return self.bias + math.fsum(a * mu[c][i] for c, i, a in self.terms)

    def __repr__(self):
        return f'ExpressionParameterFunctional({self.expression!r}, {self.component!r})'

    def to_dict(self):
        return {'kind': 'expression', 'expression': self.expression,
                'component': self.component, 'bias': self.bias,
                'terms': [list(t) for t in self.terms]}


class ProductFunctional(ParameterFunctional):
    """Product of other parameter functionals.

    Arises when nested affine operator decompositions are flattened.
    """

    def __init__(self, factors):
        self.factors = list(factors)

    def evaluate(self, mu):
        result = 1.0
        for f in self.factors:
            result *= f.evaluate(mu)
        return result

    def __repr__(self):
        return f'ProductFunctional({self.factors!r})'

    def to_dict(self):
        return {'kind': 'product_of', 'factors': [f.to_dict() for f in self.factors]}


def functional_from_dict(data):
    """Inverse of the functionals' `to_dict` serialization."""
    kind = data['kind']
    if kind == 'projection':
        return ProjectionParameterFunctional(data['component'], data['index'])
    if kind == 'constant':
        return ConstantParameterFunctional(data['value'])
    if kind == 'expression':
        return ExpressionParameterFunctional(
            data['expression'], data.get('component'),
            data.get('bias', 0.0), data.get('terms', ()))
    if kind == 'product_of':
        return ProductFunctional([functional_from_dict(f) for f in data['factors']])
    raise ValueError(f'unknown functional kind {kind!r}')
