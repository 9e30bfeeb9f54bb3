"""One-body pendulum structure of the mean-field Hamiltonian.

With the magnetization phase set to zero the one-body Hamiltonian is
``h = p**2/2 - M cos q``. Every phase-space point is labelled by the
pendulum modulus ``k = psi(q, p; M)``::

    k**2 = (p**2/2 + M (1 - cos q)) / (2 M) = h/(2M) + 1/2

so ``k < 1`` inside the separatrix (libration) and ``k > 1`` outside it
(rotation, split by the sign of ``p``). Orbit averages of ``cos Q`` have
closed forms in terms of complete elliptic integrals; :func:`orbit_average`
recomputes any orbit average by direct quadrature and serves as the
independent check of those closed forms.
"""

import enum
import math
from dataclasses import dataclass

import numpy as np
from ._quadrature import adaptive
from ._validation import check_magnetization, check_modulus, check_positive, maybe_scalar
from .elliptic import _agm
from .exceptions import DomainError

SEPARATRIX_RTOL = 1e-14


class Region(enum.Enum):
    ROTATION_UPPER = "U1"
    LIBRATION = "U2"
    ROTATION_LOWER = "U3"
    SEPARATRIX = "separatrix"

    @property
    def is_rotation(self):
        return self in (Region.ROTATION_UPPER, Region.ROTATION_LOWER)


@dataclass(frozen=True)
class OrbitCoordinate:
    region: Region
    k: float
    h: float
    M: float


@dataclass(frozen=True)
class ActionRange:
    region: Region
    j_min: float
    j_max: float

    def __contains__(self, J):
        return self.j_min < J < self.j_max


def action_range(region, M):
    """Open interval of actions covered by ``region`` at magnetization ``M``."""
    M = check_magnetization(M)
    if region is Region.LIBRATION:
        return ActionRange(region, 0.0, 8.0 * math.sqrt(M) / math.pi)
    if region.is_rotation:
        return ActionRange(region, 4.0 * math.sqrt(M) / math.pi, math.inf)
    raise DomainError("the separatrix carries no action interval")


def hamiltonian(q, p, M):
    check_positive(M, "M", strict=False)
    q = np.asarray(q, dtype=float)
    p = np.asarray(p, dtype=float)
    return maybe_scalar(0.5 * p * p - M * np.cos(q))


def modulus(q, p, M):
    """Pendulum modulus ``psi(q, p; M)``; vectorised over ``q`` and ``p``."""
    M = check_positive(M, "M")
    q = np.asarray(q, dtype=float)
    p = np.asarray(p, dtype=float)
    # 1 - cos q written as 2 sin^2(q/2) to stay accurate near q = 0
    s = np.sin(0.5 * q)
    return maybe_scalar(np.sqrt((0.25 * p * p + M * s * s) / M))


def classify(q, p, M):
    M = check_positive(M, "M")
    h = float(hamiltonian(q, p, M))
    k = float(modulus(q, p, M))
    if abs(h - M) <= SEPARATRIX_RTOL * M:
        return OrbitCoordinate(Region.SEPARATRIX, 1.0, h, M)
    if h < M:
        region = Region.LIBRATION
    else:
        region = Region.ROTATION_UPPER if p > 0 else Region.ROTATION_LOWER
    return OrbitCoordinate(region, k, h, M)


# -- closed-form angle averages ---------------------------------------------


def avg_cos_libration(k):
    """Orbit average of ``cos Q`` inside the separatrix: ``2 E(k)/K(k) - 1``."""
    k = check_modulus(k)
    return maybe_scalar(1.0 - 2.0 * np.asarray(_agm(k)[1]))


def avg_cos_rotation(k):
    """Orbit average of ``cos Q`` outside the separatrix.

    Equal to ``2 k^2 E(1/k)/K(1/k) - 2 k^2 + 1``; decays like ``-1/(8 k^2)``.
    """
    k = check_modulus(k, lower=1.0, upper=np.inf, lower_open=True)
    inv = 1.0 / k
    return maybe_scalar(1.0 - 2.0 * k * k * np.asarray(_agm(inv)[1]))


def avg_cos(k):
    """Dispatch on ``k`` to the libration or rotation average (``k != 1``)."""
    arr = np.asarray(k, dtype=float)
    if np.any(arr == 1.0):
        raise DomainError("k = 1 lies on the separatrix")
    return maybe_scalar(_avg_cos_any(arr))


def _avg_cos_any(k):
    """Like :func:`avg_cos` but maps the separatrix to its limit value -1.

    Phase-space integrands use this: the separatrix is a null set there.
    """
    if np.ndim(k) == 0:
        k = float(k)
        if k < 1.0:
            return 1.0 - 2.0 * _agm(k)[1]
        if k > 1.0:
            return 1.0 - 2.0 * k * k * _agm(1.0 / k)[1]
        return -1.0
    k = np.asarray(k, dtype=float)
    out = np.full(k.shape, -1.0)
    inside = k < 1.0
    outside = k > 1.0
    if np.any(inside):
        out[inside] = 1.0 - 2.0 * _agm(k[inside])[1]
    if np.any(outside):
        ko = k[outside]
        out[outside] = 1.0 - 2.0 * ko * ko * _agm(1.0 / ko)[1]
    return out


def orbit_period(k, M):
    """Time to traverse the orbit with modulus ``k`` once.

    ``4 K(k)/sqrt(M)`` for a full libration and ``2 K(1/k)/(k sqrt(M))`` for
    one turn of a rotation. It is also the phase-space density of states:
    ``iint g(h) dq dp = int g(h) period(h) dh`` summed over the regions.
    """
    M = check_positive(M, "M")
    k = float(k)
    if k < 1.0:
        check_modulus(k)
        return 2.0 * math.pi / _agm(k)[0] / math.sqrt(M)
    if k > 1.0:
        return math.pi / _agm(1.0 / k)[0] / (k * math.sqrt(M))
    raise DomainError("the separatrix has infinite period")


# -- M-derivatives of the averages at fixed (q, p) ---------------------------


def d_avg_cos_dM_libration(q, p, M):
    """``d/dM <cos Q>`` at fixed ``(q, p)`` strictly inside the separatrix.

    ``(p^2/4M^2) k^-2 [ (E/K - 1)^2 + k^2/(1-k^2) (E/K)^2 ]``. The
    ``k -> 0`` limit ``p^2/(4M^2)`` is used at the centre.
    """
    M = check_positive(M, "M")
    k = np.asarray(modulus(q, p, M), dtype=float)
    if np.any(k >= 1.0):
        raise DomainError("point is not strictly inside the separatrix")
    p = np.asarray(p, dtype=float)
    s = np.asarray(_agm(k)[1], dtype=float)
    with np.errstate(invalid="ignore", divide="ignore"):
        first = np.where(k > 0.0, (s / np.where(k > 0, k, 1.0)) ** 2, 0.0)
    bracket = first + (1.0 - s) ** 2 / ((1.0 - k) * (1.0 + k))
    return maybe_scalar(p * p / (4.0 * M * M) * bracket)


def d_avg_cos_dM_rotation(q, p, M):
    """``d/dM <cos Q>`` at fixed ``(q, p)`` strictly outside the separatrix.

    With ``r = E(1/k)/K(1/k)``:
    ``(p^2/4M^2) [ -(r - 1)^2 + r^2/(1-k^2) - 2 (r - 1) ]``. The sign of the
    squared term differs from the commonly quoted expression; this one is the
    derivative of :func:`avg_cos_rotation` (checked by finite differences).
    """
    M = check_positive(M, "M")
    k = np.asarray(modulus(q, p, M), dtype=float)
    if np.any(k <= 1.0):
        raise DomainError("point is not strictly outside the separatrix")
    p = np.asarray(p, dtype=float)
    s = np.asarray(_agm(1.0 / k)[1], dtype=float)  # 1 - r
    r = 1.0 - s
    bracket = -s * s + r * r / ((1.0 - k) * (1.0 + k)) + 2.0 * s
    return maybe_scalar(p * p / (4.0 * M * M) * bracket)


# -- direct orbit quadrature ---------------------------------------------------


def _adaptive(func, a, b, *, epsabs, epsrel, limit):
    return adaptive(func, a, b, epsabs=epsabs, epsrel=epsrel, limit=limit,
                    what="orbit quadrature")


def _libration_orbit_integral(obs, k, power, epsabs, epsrel, limit):
    """``int A(q) (k^2 - sin^2(q/2))**power dq`` across the libration orbit.

    The turning points ``q_t = 2 asin k`` are handled with ``q = q_t - u^2``,
    which makes both ``power = -1/2`` and ``power = +1/2`` smooth in ``u``.
    """
    qt = 2.0 * math.asin(k)
    half = 0.5 * qt

    def mid(q):
        # k^2 - sin^2(q/2) = sin((qt-q)/2) sin((qt+q)/2)
        return obs(q) * (math.sin(0.5 * (qt - q)) * math.sin(0.5 * (qt + q))) ** power

    def end(u, sign):
        x = 0.5 * u * u
        d = math.sin(x) * math.sin(qt - x)
        if d <= 0.0:
            if power < 0:
                # u -> 0 limit of 2u / sqrt(sin(u^2/2) sin(qt - u^2/2))
                return obs(sign * qt) * 2.0 * math.sqrt(2.0 / math.sin(qt))
            return 0.0
        return obs(sign * (qt - u * u)) * 2.0 * u * d ** power

    umax = math.sqrt(qt - half)
    kw = dict(epsabs=epsabs, epsrel=epsrel, limit=limit)
    return (
        _adaptive(mid, -half, half, **kw)
        + _adaptive(lambda u: end(u, 1.0), 0.0, umax, **kw)
        + _adaptive(lambda u: end(u, -1.0), 0.0, umax, **kw)
    )


def _libration_time_integral(obs, k, epsabs, epsrel, limit):
    return _libration_orbit_integral(obs, k, -0.5, epsabs, epsrel, limit)


def _rotation_orbit_integral(obs, k, power, epsabs, epsrel, limit):
    """``int A(q) (k^2 - sin^2(q/2))**power dq`` over ``q`` in ``(-pi, pi]``.

    Written in ``v = pi - |q|`` where the weight is ``(k^2 - 1 + sin^2(v/2))``;
    breakpoints on the scale ``sqrt(k^2 - 1)`` resolve the near-separatrix
    peak at ``q = pi``.
    """
    kp2 = (k - 1.0) * (k + 1.0)

    def g(v):
        s = math.sin(0.5 * v)
        return (obs(math.pi - v) + obs(v - math.pi)) * (kp2 + s * s) ** power

    pts = [0.0]
    c = math.sqrt(kp2)
    while c < math.pi:
        pts.append(c)
        c *= 4.0
    pts.append(math.pi)
    kw = dict(epsabs=epsabs, epsrel=epsrel, limit=limit)
    return sum(_adaptive(g, a, b, **kw) for a, b in zip(pts[:-1], pts[1:]))


def _rotation_time_integral(obs, k, epsabs, epsrel, limit):
    return _rotation_orbit_integral(obs, k, -0.5, epsabs, epsrel, limit)


def orbit_average(observable, k, region=None, *, epsabs=1e-13, epsrel=1e-12, limit=200):
    """Time average of ``observable(q)`` along the level set with modulus ``k``.

    Computes ``oint A(q) dq/|p| / oint dq/|p|`` by adaptive quadrature, with
    ``|p| = 2 sqrt(M) sqrt(k^2 - sin^2(q/2))`` (the ``sqrt(M)`` factor cancels).
    ``region`` defaults to libration for ``k < 1`` and rotation for ``k > 1``;
    both rotation regions give the same average.
    """
    k = float(k)
    if region is None:
        region = Region.LIBRATION if k < 1.0 else Region.ROTATION_UPPER
    if k == 1.0 or region is Region.SEPARATRIX:
        raise DomainError("orbit averages are not defined on the separatrix")
    if region is Region.LIBRATION:
        check_modulus(k)
        if k == 0.0:
            return float(observable(0.0))
        fn = _libration_time_integral
    else:
        check_modulus(k, lower=1.0, upper=np.inf, lower_open=True)
        fn = _rotation_time_integral
    num = fn(observable, k, epsabs, epsrel, limit)
    den = fn(lambda q: 1.0, k, epsabs, epsrel, limit)
    return num / den


def action(k, M, region=None, *, epsrel=1e-12, limit=200):
    """Action ``J = (1/2 pi) oint p dq`` of the orbit with modulus ``k``.

    Computed by quadrature. Libration actions tend to ``8 sqrt(M)/pi`` and
    rotation actions to ``4 sqrt(M)/pi`` at the separatrix.
    """
    M = check_magnetization(M)
    k = float(k)
    if region is None:
        region = Region.LIBRATION if k < 1.0 else Region.ROTATION_UPPER
    if k == 1.0 or region is Region.SEPARATRIX:
        raise DomainError("the action is not single-valued on the separatrix")
    scale = 2.0 * math.sqrt(M)
    if region is Region.LIBRATION:
        check_modulus(k)
        if k == 0.0:
            return 0.0
        # both momentum branches of the closed orbit
        inner = _libration_orbit_integral(lambda q: 1.0, k, 0.5, 0.0, epsrel, limit)
        return 2.0 * scale * inner / (2.0 * math.pi)
    check_modulus(k, lower=1.0, upper=np.inf, lower_open=True)
    inner = _rotation_orbit_integral(lambda q: 1.0, k, 0.5, 0.0, epsrel, limit)
    return scale * inner / (2.0 * math.pi)
