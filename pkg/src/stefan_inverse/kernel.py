"""Heat kernel on the real line and its reflected (Neumann) counterpart.

Both functions accept scalars or broadcastable numpy arrays and return a
float or an array of the broadcast shape.
"""

from typing import NamedTuple

import numpy as np

from .errors import KernelDomainError

# exp(x) for x below this is returned as exactly zero
UNDERFLOW_EXPONENT = -700.0


class KernelArgs(NamedTuple):
    """Evaluation point ``(x, t)`` and source point ``(xi, tau)``, ``tau < t``."""

    x: float
    xi: float
    t: float
    tau: float


def _elapsed(t, tau):
    dt = np.asarray(t, dtype=float) - np.asarray(tau, dtype=float)
    if np.any(~(dt > 0.0)):
        raise KernelDomainError("heat kernel requires t > tau")
    return dt


def _gaussian(x, xi, dt):
    expo = -np.square(np.asarray(x, dtype=float) - xi) / (4.0 * dt)
    with np.errstate(under="ignore"):
        val = np.exp(np.maximum(expo, UNDERFLOW_EXPONENT)) / (2.0 * np.sqrt(np.pi * dt))
    return np.where(expo < UNDERFLOW_EXPONENT, 0.0, val)


def _out(val):
    return float(val) if np.ndim(val) == 0 else val


def heat_kernel(x, xi, t, tau):
    """Fundamental solution ``exp(-(x-xi)^2 / 4(t-tau)) / (2 sqrt(pi (t-tau)))``.

    Raises
    ------
    KernelDomainError
        If any ``t - tau <= 0``.
    """
    dt = _elapsed(t, tau)
    return _out(_gaussian(x, xi, dt))


def neumann(x, xi, t, tau):
    """Kernel reflected about ``x = 0``: ``K(x, xi) + K(-x, xi)``.

    Its x-derivative vanishes at ``x = 0``, matching a flux condition there.
    """
    dt = _elapsed(t, tau)
    x = np.asarray(x, dtype=float)
    return _out(_gaussian(x, xi, dt) + _gaussian(-x, xi, dt))
