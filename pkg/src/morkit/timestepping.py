"""Explicit time stepping used by instationary models (full and reduced)."""

from __future__ import annotations

import numpy as np

__all__ = ['explicit_euler']


class TimeSteppingError(Exception):
    """Time stepping produced non-finite values."""


def explicit_euler(operator, rhs, u0, T, nt, mu=None):
    """Forward Euler trajectory for `u' = -(operator(u) - rhs)`.

    `u0` is a vector array of length 1, `rhs` a vector array of length 1 or
    None.  Returns the trajectory as a vector array of `nt + 1` vectors,
    starting with `u0`.  Aborts with the offending step index when the state
    turns NaN/Inf.
    """
    if nt < 1:
        raise ValueError('nt must be >= 1')
    dt = T / nt
    trajectory = u0.copy()
    u = u0.copy()
    for k in range(nt):
        increment = operator.apply(u, mu=mu)
        u.axpy(-dt, increment)
        if rhs is not None:
            u.axpy(dt, rhs)
        if not np.all(np.isfinite(u.norm())):
            raise TimeSteppingError(f'non-finite state after step {k + 1}')
        trajectory.append(u)
    return trajectory
