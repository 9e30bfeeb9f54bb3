"""Grid norms (L^p, W^{1,p}, spectral H^s) and the ``1/u_a`` weight.

``W^{1,p}`` is ``||f||_p + || |grad f| ||_p`` with a centred-difference
gradient (periodic in ``q``, one-sided at the momentum edges). ``H^s`` is
the spectral norm ``(sum (1 + |xi|^2)^s |f_hat(xi)|^2)^{1/2}`` over the
periodised box, so the data must vanish at the momentum edges.

Fractional ``W^{s,a}`` norms with ``a != 2`` are not provided.
"""

import enum
import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy import integrate

from ._quadrature import QuadratureSpec, adaptive
from ._validation import check_grid, check_positive
from .exceptions import DivergenceError, DomainError


class NormFamily(enum.Enum):
    LP = "Lp"
    W1P = "W1p"
    HS = "Hs"


@dataclass(frozen=True)
class NormSpec:
    family: NormFamily
    p: float = 2.0
    s: float = 0.0

    def __post_init__(self):
        family = self.family if isinstance(self.family, NormFamily) else NormFamily(self.family)
        object.__setattr__(self, "family", family)
        if family is NormFamily.HS:
            if self.p != 2:
                raise DomainError("H^s norms have p = 2")
            if not self.s >= 0:
                raise DomainError("s must be >= 0")
        elif not self.p >= 1:
            raise DomainError("p must be >= 1")
        if family is NormFamily.W1P and math.isinf(self.p):
            raise DomainError("W^{1,p} needs finite p")


def _lp(values, cell, p):
    a = np.abs(values)
    if math.isinf(p):
        return float(a.max()) if a.size else 0.0
    if p == 1:
        return float(a.sum() * cell)
    if p == 2:
        return math.sqrt(float(np.sum(a * a)) * cell)
    top = a.max()
    if top == 0:
        return 0.0
    # factor out the maximum so |f|^p does not under/overflow
    return float(top * (np.sum((a / top) ** p) * cell) ** (1.0 / p))


def lp_norm(grid, p=2.0):
    check_grid(grid)
    p = float(p)
    if not p >= 1:
        raise DomainError("p must be >= 1")
    return _lp(grid.values, grid.cell_area, p)


def gradient(grid):
    """Centred differences ``(df/dq, df/dp)``; periodic in ``q``."""
    check_grid(grid)
    v = grid.values
    dq = (np.roll(v, -1, axis=0) - np.roll(v, 1, axis=0)) / (2.0 * grid.dq)
    dp = np.gradient(v, grid.dp, axis=1, edge_order=2)
    return dq, dp


def w1p_norm(grid, p=2.0):
    """``||f||_{L^p} + || |grad f| ||_{L^p}`` on the grid."""
    p = float(p)
    if not 1 <= p < math.inf:
        raise DomainError("W^{1,p} needs 1 <= p < inf")
    gq, gp = gradient(grid)
    return lp_norm(grid, p) + _lp(np.hypot(gq, gp), grid.cell_area, p)


def spectral_hs_norm(values, dx, dy, s):
    """H^s norm of data sampled on a doubly periodic box with spacings ``dx, dy``.

    Wavenumbers follow from the box lengths; at ``s = 0`` this is exactly the
    discrete L^2 norm (Parseval).
    """
    s = check_positive(s, "s", strict=False)
    values = np.asarray(values, dtype=float)
    nx, ny = values.shape
    F = np.fft.fft2(values)
    kx = 2.0 * np.pi * np.fft.fftfreq(nx, d=dx)
    ky = 2.0 * np.pi * np.fft.fftfreq(ny, d=dy)
    xi2 = kx[:, None] ** 2 + ky[None, :] ** 2
    weight = (1.0 + xi2) ** s
    total = float(np.sum(weight * (F.real ** 2 + F.imag ** 2)))
    return math.sqrt(total * dx * dy / (nx * ny))


def hs_norm(grid, s, *, boundary_tol=1e-10):
    """Spectral H^s norm of a grid, treating ``p`` as periodic on the box.

    Raises :class:`DomainError` when the data at the momentum edges exceed
    ``boundary_tol`` times the maximum, since the periodisation would then
    introduce a spurious jump.
    """
    check_grid(grid)
    top = float(np.max(np.abs(grid.values)))
    if top > 0 and grid.boundary_max() > boundary_tol * top:
        raise DomainError(
            f"data reach {grid.boundary_max() / top:.1e} of the maximum at the momentum edge; "
            "enlarge p_max before taking spectral norms"
        )
    return spectral_hs_norm(grid.values, grid.dq, grid.dp, s)


def norm(grid, spec):
    if spec.family is NormFamily.LP:
        return lp_norm(grid, spec.p)
    if spec.family is NormFamily.W1P:
        return w1p_norm(grid, spec.p)
    return hs_norm(grid, spec.s)


# -- the 1/u_a weight -------------------------------------------------------------


def ua_weight(q, p, m, a):
    """``u_a(q, p; m) = (|p|^a + |m sin q|^a)^{1/a}``."""
    m = check_positive(m, "m")
    a = check_positive(a, "a")
    q = np.asarray(q, dtype=float)
    p = np.asarray(p, dtype=float)
    out = (np.abs(p) ** a + np.abs(m * np.sin(q)) ** a) ** (1.0 / a)
    return float(out) if out.ndim == 0 else out


def _alg_weighted(func, lo, hi, alpha, quad):
    """``int_lo^hi (x - lo)^alpha func(x) dx`` with QUADPACK's algebraic weight."""
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        val, _ = integrate.quad(func, lo, hi, weight="alg", wvar=(alpha, 0.0),
                                epsabs=0.0, epsrel=quad.epsrel, limit=quad.limit)
    return val


def _inner_p(c, a, b, quad, p_top=np.inf):
    """``int_0^p_top (p^a + c^a)^{-b/a} dp`` split on the scale ``c``.

    Beyond ``64 c`` the substitution ``u = 1/p`` turns the ``p^{-b}`` tail
    into an algebraic endpoint weight ``u^{b-2}``.
    """
    def f(p):
        return (p ** a + c ** a) ** (-b / a)

    far = 64.0 * c
    pts = [0.0, c, 4.0 * c, 16.0 * c, far]
    if p_top < far:
        pts = [x for x in pts if x < p_top] + [p_top]
    kw = dict(epsabs=0.0, epsrel=quad.epsrel * 0.1, limit=quad.limit, what="u_a inner quadrature")
    val = sum(adaptive(f, lo, hi, **kw) for lo, hi in zip(pts[:-1], pts[1:]))
    if p_top > far:
        u_lo = 0.0 if math.isinf(p_top) else 1.0 / p_top

        def tail(u):
            # (u^{-a} + c^a)^{-b/a} u^{-2} = u^{b-2} (1 + (c u)^a)^{-b/a}
            return (1.0 + (c * u) ** a) ** (-b / a)

        if u_lo == 0.0:
            val += _alg_weighted(tail, 0.0, 1.0 / far, b - 2.0, quad)
        else:
            # the truncated tail spans many decades in u: split geometrically
            edges = np.geomspace(u_lo, 1.0 / far, max(2, int(math.log10(1.0 / (far * u_lo))) + 2))
            val += sum(adaptive(lambda u: u ** (b - 2.0) * tail(u), lo, hi, **kw)
                       for lo, hi in zip(edges[:-1], edges[1:]))
    return val


def inv_ua_lb_norm_power(a, b, m, quad=None):
    """``||1/u_a||_{L^b}^b`` over ``(-pi, pi] x R`` for ``1 < b < 2``.

    By the symmetries in ``q`` and ``p`` this is
    ``8 int_0^{pi/2} dq int_0^inf (p^a + (m sin q)^a)^{-b/a} dp``. The inner
    integral behaves like ``(m q)^{1-b}`` as ``q -> 0``; that algebraic
    singularity is handed to QUADPACK's weighted rule.
    """
    quad = quad or QuadratureSpec()
    m = check_positive(m, "m")
    a = check_positive(a, "a")
    if not 1 < b < 2:
        raise DivergenceError(f"||1/u_a||_L^b diverges for b={b} outside (1, 2)")

    def smooth(q):
        if q == 0.0:
            # limit of inner(m sin q) / q^{1-b}
            return m ** (1.0 - b) * _inner_p(1.0, a, b, quad)
        return _inner_p(m * math.sin(q), a, b, quad) / q ** (1.0 - b)

    return 8.0 * _alg_weighted(smooth, 0.0, 0.5 * math.pi, 1.0 - b, quad)


def inv_ua_lb_norm(a, b, m, quad=None):
    """``||1/u_a||_{L^b}``; for ``b`` outside ``(1, 2)`` the divergence is
    demonstrated by :func:`truncated_inv_ua_sequence` and reported as
    :class:`DivergenceError`."""
    if not 1 < b < 2:
        seq = truncated_inv_ua_sequence(a, b, m, quad)
        growth = ", ".join(f"{v:.3e}" for _, v in seq)
        raise DivergenceError(
            f"||1/u_a||_L^b with b={b} grows without bound under refinement: {growth}"
        )
    return inv_ua_lb_norm_power(a, b, m, quad) ** (1.0 / b)


def truncated_inv_ua_sequence(a, b, m, quad=None, radii=(1e-1, 1e-2, 1e-3, 1e-4, 1e-5)):
    """Truncated ``||1/u_a||^b`` integrals with the singular sets cut out.

    For each ``r`` the region ``sin q < r`` around ``q = 0, pi`` is removed and
    ``|p|`` is capped at ``1/r``. The sequence converges exactly when
    ``1 < b < 2``.
    """
    quad = quad or QuadratureSpec()
    m = check_positive(m, "m")
    a = check_positive(a, "a")
    out = []
    for r in radii:
        q0 = math.asin(r)

        def inner(q, r=r):
            return _inner_p(m * math.sin(q), a, b, quad, p_top=1.0 / r)

        val = adaptive(inner, q0, 0.5 * math.pi, epsabs=0.0, epsrel=quad.epsrel,
                       limit=quad.limit, what="truncated u_a quadrature")
        out.append((r, 8.0 * val))
    return out


def loglog_slope(x, y):
    """Least-squares slope of ``log|y|`` against ``log x``."""
    x = np.asarray(x, dtype=float)
    y = np.abs(np.asarray(y, dtype=float))
    if np.any(x <= 0) or np.any(y <= 0):
        raise DomainError("log-log fit needs positive data")
    return float(np.polyfit(np.log(x), np.log(y), 1)[0])


# -- scaling of the bump perturbations ---------------------------------------------


def bump_hs_norm(eps, delta, s, T, *, M=0.0, n=256, width=12.0):
    """H^s norm of ``eps^delta exp(-(h - h_min) / (T eps^2))``.

    With ``M = 0`` the bump depends on ``p`` only (homogeneous case); with
    ``M > 0`` it sits at the bottom of the well. The bump is sampled on a
    patch of ``width`` standard deviations per direction around its centre
    (the whole circle in ``q`` when the patch would not fit), so the
    resolution follows ``eps``.
    """
    eps = check_positive(eps, "eps")
    T = check_positive(T, "T")
    M = check_positive(M, "M", strict=False)
    sigma_p = eps * math.sqrt(T)
    p = np.linspace(-width * sigma_p, width * sigma_p, n, endpoint=False)
    dp = p[1] - p[0]
    if M == 0:
        q, dq = np.zeros(1), 2.0 * math.pi
    else:
        half = min(math.pi, width * sigma_p / math.sqrt(M))
        q = np.linspace(-half, half, n, endpoint=False)
        dq = q[1] - q[0]
    expo = (0.5 * p[None, :] ** 2 + M * (1.0 - np.cos(q))[:, None]) / (T * eps * eps)
    values = eps ** delta * np.exp(-expo)
    return spectral_hs_norm(values, dq, dp, s)


def bump_hs_exponent(eps_list, delta, s, T, *, M=0.0, n=256):
    """Fitted exponent of :func:`bump_hs_norm` against ``eps``."""
    vals = [bump_hs_norm(e, delta, s, T, M=M, n=n) for e in eps_list]
    return loglog_slope(eps_list, vals), vals
