"""Backend-agnostic numerical building blocks.

Everything here is written purely against the vector array / operator
interfaces, so the same code runs on in-process and remote data.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .vectorarrays import VectorArray, inner

__all__ = ['gram_schmidt', 'pod', 'PodResult', 'riesz_representatives', 'newton',
           'NewtonError']

_log = logging.getLogger(__name__)

# eigenvalues of the snapshot Gramian below this fraction of the largest
# one are clamped to zero
_GRAMIAN_CLAMP = 1e-14

# re-orthonormalization trigger: another projection pass is performed when a
# pass reduced the vector norm below this fraction of its previous value.
# This criterion is a heuristic choice; see the package documentation.
_REORTH_FACTOR = 0.1
_MAX_PASSES = 5


def _norm(v, product):
    return float(np.sqrt(max(inner(v, v, product)[0, 0], 0.0)))


def gram_schmidt(A, product=None, offset=0, atol=1e-13, rtol=1e-13):
    """Stabilized modified Gram-Schmidt orthonormalization.

    The leading `offset` vectors must already be orthonormal with respect to
    `product` and are passed through unchanged.  Each remaining vector gets
    one unconditional re-orthonormalization pass; further passes run while a
    pass shrinks the norm below 0.1x its previous value.  Vectors whose
    post-projection norm falls below ``atol + rtol * original_norm`` are
    dropped (reported via logging, not an error).  `A` is left unchanged.
    """
    result = A.copy(list(range(offset)))
    dropped = 0
    for i in range(offset, len(A)):
        v = A.copy([i])
        norm0 = _norm(v, product)
        norm = norm0
        passes = 0
        while True:
            for j in range(len(result)):
                b = result.copy([j])
                coeff = inner(b, v, product)[0, 0]
                v.axpy(-coeff, b)
            new_norm = _norm(v, product)
            passes += 1
            small = new_norm < _REORTH_FACTOR * norm
            norm = new_norm
            if passes >= _MAX_PASSES or (passes >= 2 and not small):
                break
        if norm < atol + rtol * norm0:
            dropped += 1
            continue
        v.scal(1.0 / norm)
        result.append(v)
    if dropped:
        _log.info('gram_schmidt dropped %d linearly dependent vector(s)', dropped)
    return result


@dataclass
class PodResult:
    """Orthonormal POD modes with their descending singular values."""

    modes: VectorArray
    singular_values: np.ndarray


def pod(A, modes=None, product=None, rtol=1e-7):
    """Proper orthogonal decomposition via the method of snapshots.

    Builds the Gramian of `A` w.r.t. `product`, eigendecomposes it and maps
    the eigenvectors back through `A`.  Truncates after `modes` modes (if
    given) and at the last singular value above ``rtol * sigma_1``.
    """
    if len(A) == 0:
        raise ValueError('pod of empty snapshot array')
    gramian = inner(A, A, product)
    gramian = (gramian + gramian.T) / 2.0
    evals, evecs = np.linalg.eigh(gramian)
    evals, evecs = evals[::-1], evecs[:, ::-1]
    evals = np.where(evals < _GRAMIAN_CLAMP * max(evals[0], 0.0), 0.0, evals)
    sigma = np.sqrt(np.maximum(evals, 0.0))
    keep = int(np.sum(sigma > rtol * sigma[0])) if sigma[0] > 0 else 0
    if modes is not None:
        keep = min(keep, modes)
    sigma = sigma[:keep]
    coeffs = evecs[:, :keep] / sigma[np.newaxis, :] if keep else np.zeros((len(A), 0))
    return PodResult(A.lincomb(coeffs.T), sigma)


def riesz_representatives(product, F):
    """Riesz representatives `product^{-1} F[i]` of the functional vectors `F`.

    The product-norm of a representative is the dual norm of its functional.
    """
    return product.apply_inverse(F)


class NewtonError(Exception):
    """Newton iteration failed to converge."""


def newton(op, rhs, mu=None, initial=None, rel_tol=1e-12, max_iter=100):
    """Solve `op(u) = rhs` by Newton's method.

    `rhs` and `initial` are vector arrays of length 1.  Iterates until the
    residual norm falls to ``rel_tol`` times the initial residual norm.
    Returns `(u, iterations)`.
    """
    if initial is None:
        raise ValueError('initial guess required')
    u = initial.copy()

    def residual(u):
        r = rhs.copy()
        r.axpy(-1.0, op.apply(u, mu=mu))
        return r

    r = residual(u)
    norm0 = float(r.norm()[0])
    norm = norm0
    iterations = 0
    while norm > rel_tol * norm0 and norm > 0.0:
        if iterations >= max_iter:
            raise NewtonError(f'no convergence after {max_iter} iterations '
                              f'(relative residual {norm / norm0:.3e})')
        jac = op.jacobian(u, mu=mu)
        delta = jac.apply_inverse(r, mu=mu)
        u.axpy(1.0, delta)
        r = residual(u)
        norm = float(r.norm()[0])
        iterations += 1
    return u, iterations
