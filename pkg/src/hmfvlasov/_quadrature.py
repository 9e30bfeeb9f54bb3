"""Thin wrappers around :func:`scipy.integrate.quad` that fail loudly."""

import warnings
from dataclasses import dataclass

import numpy as np
from scipy import integrate

from .exceptions import QuadratureError


@dataclass(frozen=True)
class QuadratureSpec:
    """Tolerances for the adaptive quadratures.

    ``eta`` is the half-width, relative to ``M``, of the energy band
    ``|h - M| < eta M`` that is integrated separately around the separatrix.
    """

    epsabs: float = 1e-12
    epsrel: float = 1e-10
    limit: int = 200
    eta: float = 1e-3

    def __post_init__(self):
        if not (self.epsabs >= 0 and self.epsrel >= 0 and self.epsabs + self.epsrel > 0):
            raise ValueError("quadrature tolerances must be non-negative and not both zero")
        if int(self.limit) < 1:
            raise ValueError("limit must be a positive integer")
        if not 0 < self.eta < 1:
            raise ValueError("eta must lie in (0, 1)")


def adaptive(func, a, b, *, epsabs, epsrel, limit, what="quadrature"):
    if a == b:
        return 0.0
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        out = integrate.quad(func, a, b, epsabs=epsabs, epsrel=epsrel,
                             limit=limit, full_output=1)
    val, err = out[0], out[1]
    if not np.isfinite(val):
        raise QuadratureError(f"{what} produced a non-finite value")
    if len(out) > 3 and out[3] and err > max(epsabs, epsrel * abs(val)) * 10:
        raise QuadratureError(
            f"{what} did not converge within {limit} subdivisions "
            f"(estimate {val:.3e} +- {err:.1e})"
        )
    return val


def piecewise(func, points, spec, what="quadrature"):
    """Sum of adaptive integrals over consecutive ``points`` (sorted, deduplicated)."""
    pts = sorted(set(float(x) for x in points))
    total = 0.0
    for a, b in zip(pts[:-1], pts[1:]):
        total += adaptive(func, a, b, epsabs=spec.epsabs, epsrel=spec.epsrel,
                          limit=spec.limit, what=what)
    return total
