"""Complete elliptic integrals of the first and second kind.

All functions take the modulus ``k`` (not the parameter ``m = k**2``) and
accept scalars or numpy arrays. Values are computed with the
arithmetic-geometric mean, which also yields the complement
``1 - E(k)/K(k)`` without cancellation; the angle averages in
:mod:`hmfvlasov.pendulum` are built on that complement.

The first-kind integral diverges as ``k -> 1``; the functions here reject
``k >= 1`` instead of clamping.
"""

import math
from dataclasses import dataclass

import numpy as np

from ._validation import check_modulus, maybe_scalar
from .exceptions import ConvergenceError

AGM_TOL = 1e-15
_MAX_ITER = 64


@dataclass(frozen=True)
class EllipticPair:
    k: float
    K: float
    E: float


def _agm_scalar(k):
    a = 1.0
    b = math.sqrt((1.0 - k) * (1.0 + k))
    # s accumulates sum_n 2**(n-1) c_n**2 with c_0 = k, so that E = K (1 - s)
    s = 0.5 * k * k
    weight = 0.5
    for _ in range(_MAX_ITER):
        if abs(a - b) < AGM_TOL:
            return a, s
        c = 0.5 * (a - b)
        a, b = 0.5 * (a + b), math.sqrt(a * b)
        weight *= 2.0
        s += weight * c * c
    raise ConvergenceError(f"AGM did not converge for k={k}")


def _agm_array(k):
    a = np.ones_like(k)
    b = np.sqrt((1.0 - k) * (1.0 + k))
    s = 0.5 * k * k
    weight = 0.5
    for _ in range(_MAX_ITER):
        if np.all(np.abs(a - b) < AGM_TOL):
            return a, s
        c = 0.5 * (a - b)
        a, b = 0.5 * (a + b), np.sqrt(a * b)
        weight *= 2.0
        s = s + weight * c * c
    raise ConvergenceError("AGM did not converge")


def _agm(k):
    """Return ``(agm(1, k'), 1 - E/K)`` for validated ``k``."""
    if np.ndim(k) == 0:
        return _agm_scalar(float(k))
    return _agm_array(np.asarray(k, dtype=float))


def complete_elliptic(k):
    """Return ``EllipticPair(k, K(k), E(k))`` for ``0 <= k < 1``."""
    k = check_modulus(k)
    a, s = _agm(k)
    K = np.pi / (2.0 * a)
    E = K * (1.0 - s)
    return EllipticPair(maybe_scalar(k), maybe_scalar(K), maybe_scalar(E))


def ellipk(k):
    return complete_elliptic(k).K


def ellipe(k):
    return complete_elliptic(k).E


def ek_complement(k):
    """``1 - E(k)/K(k)`` for ``0 <= k < 1``, accurate also for tiny ``k``."""
    k = check_modulus(k)
    return maybe_scalar(_agm(k)[1])


def ek_ratio(k):
    """``E(k)/K(k)``; behaves as ``1 - k**2/2 + O(k**4)`` near zero."""
    return maybe_scalar(1.0 - np.asarray(ek_complement(k)))


def elliptic_derivatives(k):
    """Return ``(dK/dk, dE/dk)`` for ``0 < k < 1``.

    Uses ``dK/dk = [E - (1-k^2) K] / [k (1-k^2)]`` and
    ``dE/dk = (E - K)/k``, with both numerators rewritten through
    ``1 - E/K`` so small moduli do not cancel.
    """
    k = check_modulus(k, lower_open=True)
    a, s = _agm(k)
    K = np.pi / (2.0 * a)
    kp2 = (1.0 - k) * (1.0 + k)
    dK = K * (k * k - s) / (k * kp2)
    dE = -K * s / k
    return maybe_scalar(dK), maybe_scalar(dE)
