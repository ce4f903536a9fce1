"""Vector array interface and in-process backends.

A vector array is an ordered collection of vectors of identical dimension.
All reduction algorithms are written against this interface, so backends
holding their data out-of-process (see `morkit.remote`) compose with the
same algorithms.  Two in-process backends are provided: a contiguous dense
backend (`NumpyVectorArray`, vectorized operations touch one buffer) and a
list-of-vectors backend (`ListVectorArray`) used for interface benchmarks.
"""

from __future__ import annotations

import numpy as np

__all__ = ['VectorArray', 'NumpyVectorArray', 'ListVectorArray', 'inner']


class VectorArray:
    """Abstract ordered collection of same-dimension vectors.

    Mutating operations (`append`, `scal`, `axpy`) follow a single-writer
    contract; all other operations are pure.  Mutation never changes `dim`.
    """

    @property
    def dim(self):
        raise NotImplementedError

    def __len__(self):
        raise NotImplementedError

    def copy(self, indices=None):
        """New array holding the selected vectors (all if `indices` is None)."""
        raise NotImplementedError

    def append(self, other):
        raise NotImplementedError

    def scal(self, alpha):
        """In-place scaling; `alpha` scalar or one scalar per vector."""
        raise NotImplementedError

    def axpy(self, alpha, x):
        """In-place `self[i] += alpha_i * x[i]`; `x` of equal length or length 1."""
        raise NotImplementedError

    def lincomb(self, coefficients):
        """New array with `result[i] = sum_j coefficients[i, j] * self[j]`."""
        raise NotImplementedError

    def inner(self, other):
        """Euclidean inner product matrix of shape `len(self) x len(other)`."""
        raise NotImplementedError

    def dofs(self, indices):
        """Matrix of selected vector entries, shape `len(self) x len(indices)`."""
        raise NotImplementedError

    def norm(self):
        return np.sqrt(np.maximum(np.diag(self.inner(self)), 0.0))

    def _check_axpy(self, alpha, x):
        if x.dim != self.dim:
            raise ValueError('dimension mismatch')
        if len(x) not in (len(self), 1):
            raise ValueError('length mismatch')
        alpha = np.asarray(alpha, dtype=float)
        if alpha.ndim not in (0, 1) or (alpha.ndim == 1 and alpha.shape[0] != len(self)):
            raise ValueError('invalid alpha shape')
        return alpha


class NumpyVectorArray(VectorArray):
    """Dense backend storing all vectors contiguously in one 2D buffer."""

    def __init__(self, data, dim=None):
        data = np.asarray(data, dtype=float)
        if data.ndim == 1:
            data = data.reshape(1, -1)
        if data.ndim != 2:
            raise ValueError('expected a 2D array of row vectors')
        if dim is not None and data.shape[1] != dim:
            raise ValueError('dimension mismatch')
        self._data = np.array(data, dtype=float, copy=True)

    @classmethod
    def empty(cls, dim, reserve=0):
        return cls(np.empty((0, dim)))

    @classmethod
    def zeros(cls, dim, count=1):
        return cls(np.zeros((count, dim)))

    @classmethod
    def from_data(cls, data):
        """Adopts `data` (2D float array) without copying."""
        obj = cls.__new__(cls)
        obj._data = np.ascontiguousarray(data, dtype=float)
        return obj

    @property
    def data(self):
        return self._data

    @property
    def dim(self):
        return self._data.shape[1]

    def __len__(self):
        return self._data.shape[0]

    def copy(self, indices=None):
        if indices is None:
            return NumpyVectorArray(self._data)
        return NumpyVectorArray(self._data[np.asarray(indices, dtype=int)].reshape(len(indices), self.dim))

    def append(self, other):
        if other.dim != self.dim:
            raise ValueError('dimension mismatch')
        if isinstance(other, NumpyVectorArray):
            block = other._data
        else:
            block = other.dofs(range(other.dim))
        self._data = np.vstack([self._data, block])

    def scal(self, alpha):
        alpha = np.asarray(alpha, dtype=float)
        if alpha.ndim == 1:
            self._data *= alpha[:, np.newaxis]
        else:
            self._data *= alpha

    def axpy(self, alpha, x):
        alpha = self._check_axpy(alpha, x)
        xd = x._data if isinstance(x, NumpyVectorArray) else x.dofs(range(x.dim))
        if alpha.ndim == 1:
            self._data += alpha[:, np.newaxis] * xd
        else:
            self._data += alpha * xd

    def lincomb(self, coefficients):
        coefficients = np.atleast_2d(np.asarray(coefficients, dtype=float))
        if coefficients.shape[1] != len(self):
            raise ValueError('coefficient matrix has wrong number of columns')
        return NumpyVectorArray.from_data(coefficients @ self._data)

    def inner(self, other):
        if other.dim != self.dim:
            raise ValueError('dimension mismatch')
        od = other._data if isinstance(other, NumpyVectorArray) else other.dofs(range(other.dim))
        return self._data @ od.T

    def dofs(self, indices):
        indices = np.asarray(list(indices), dtype=int)
        if indices.size and (indices.min() < 0 or indices.max() >= self.dim):
            raise IndexError('DOF index out of range')
        return self._data[:, indices].copy()


class ListVectorArray(VectorArray):
    """Backend storing each vector as its own 1D buffer."""

    def __init__(self, vectors, dim=None):
        vectors = [np.array(v, dtype=float).ravel() for v in vectors]
        if dim is None:
            if not vectors:
                raise ValueError('dim required for empty arrays')
            dim = vectors[0].size
        if any(v.size != dim for v in vectors):
            raise ValueError('dimension mismatch')
        self._vectors = vectors
        self._dim = int(dim)

    @classmethod
    def empty(cls, dim):
        return cls([], dim=dim)

    @classmethod
    def zeros(cls, dim, count=1):
        return cls([np.zeros(dim) for _ in range(count)], dim=dim)

    @property
    def dim(self):
        return self._dim

    def __len__(self):
        return len(self._vectors)

    def copy(self, indices=None):
        if indices is None:
            indices = range(len(self))
        return ListVectorArray([self._vectors[i] for i in indices], dim=self._dim)

    def append(self, other):
        if other.dim != self.dim:
            raise ValueError('dimension mismatch')
        block = other.dofs(range(other.dim))
        self._vectors.extend(np.array(row) for row in block)

    def scal(self, alpha):
        alpha = np.asarray(alpha, dtype=float)
        if alpha.ndim == 1:
            for v, a in zip(self._vectors, alpha):
                v *= a
        else:
            for v in self._vectors:
                v *= alpha

    def axpy(self, alpha, x):
        alpha = self._check_axpy(alpha, x)
        xd = x.dofs(range(x.dim))
        alphas = alpha if alpha.ndim == 1 else np.full(len(self), float(alpha))
        for i, v in enumerate(self._vectors):
            xv = xd[i] if xd.shape[0] > 1 else xd[0]
            v += alphas[i] * xv

    def lincomb(self, coefficients):
        coefficients = np.atleast_2d(np.asarray(coefficients, dtype=float))
        if coefficients.shape[1] != len(self):
            raise ValueError('coefficient matrix has wrong number of columns')
        out = []
        for row in coefficients:
            acc = np.zeros(self._dim)
            for c, v in zip(row, self._vectors):
                acc += c * v
            out.append(acc)
        return ListVectorArray(out, dim=self._dim)

    def inner(self, other):
        if other.dim != self.dim:
            raise ValueError('dimension mismatch')
        od = other.dofs(range(other.dim))
        result = np.empty((len(self), od.shape[0]))
        for i, v in enumerate(self._vectors):
            result[i] = od @ v
        return result

    def dofs(self, indices):
        indices = np.asarray(list(indices), dtype=int)
        if indices.size and (indices.min() < 0 or indices.max() >= self.dim):
            raise IndexError('DOF index out of range')
        result = np.empty((len(self), indices.size))
        for i, v in enumerate(self._vectors):
            result[i] = v[indices]
        return result


def inner(A, B, product=None):
    """Product-weighted inner product matrix `M[i, j] = <A[i], P B[j]>`.

    `product` is an operator applied to `B` (identity if None).
    """
    if product is None:
        return A.inner(B)
    return A.inner(product.apply(B))
