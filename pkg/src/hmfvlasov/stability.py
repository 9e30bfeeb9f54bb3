"""Formal stability functional of monotonous stationary states.

For a stationary state ``f = F(h)`` the functional reads::

    I[f] = 1 + iint F'(h(q, p)) [cos^2 q - <cos Q>^2_{j(q,p)}] dq dp

and for homogeneous states (``M = 0``) it reduces to
``1 + pi int f'(p)/p dp``. ``I > 0`` means formally stable.

The module also holds the stationary families used in the experiments
(thermal, thermal plus a narrow bump, thermal plus the destabilizer
``g_{eps,alpha}``), the self-consistent magnetization of these families in
closed form, and the tabulation of initial conditions on a
:class:`~hmfvlasov.grid.PhaseGrid`.
"""

import enum
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import optimize, special

from ._quadrature import QuadratureSpec, adaptive, piecewise
from ._validation import check_magnetization, check_positive
from .exceptions import ConvergenceError, DomainError, SingularIntegrandError
from .grid import PhaseGrid
from .pendulum import _avg_cos_any

T_CRITICAL = 0.5
VERDICT_TOL = 1e-10
_SQRT_2PI = math.sqrt(2.0 * math.pi)


class Verdict(enum.Enum):
    STABLE = "Stable"
    UNSTABLE = "Unstable"
    MARGINAL = "Marginal"


def verdict_of(I, tol=VERDICT_TOL):
    if I > tol:
        return Verdict.STABLE
    if I < -tol:
        return Verdict.UNSTABLE
    return Verdict.MARGINAL


@dataclass(frozen=True)
class StabilityReport:
    I: float
    term_unity: float
    term_integral: float
    verdict: Verdict
    M_used: float

    @classmethod
    def from_integral(cls, integral, M, tol=VERDICT_TOL):
        I = 1.0 + integral
        return cls(I, 1.0, float(integral), verdict_of(I, tol), float(M))


# -- analytic profiles -------------------------------------------------------


@dataclass(frozen=True)
class MomentumProfile:
    """Homogeneous density ``f(p) = sum_i c_i exp(-p^2 / (2 s_i^2))``.

    The density is per unit ``dq dp``, so ``mass() = 2 pi int f dp``.
    Weights may be negative (differences of profiles).
    """

    weights: tuple
    widths: tuple

    def __post_init__(self):
        w = tuple(float(c) for c in np.atleast_1d(self.weights))
        s = tuple(float(x) for x in np.atleast_1d(self.widths))
        if len(w) != len(s) or not w:
            raise DomainError("weights and widths must be non-empty and of equal length")
        if any(not x > 0 for x in s):
            raise DomainError("widths must be positive")
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "widths", s)

    def __call__(self, p):
        p = np.asarray(p, dtype=float)
        return sum(c * np.exp(-0.5 * (p / s) ** 2) for c, s in zip(self.weights, self.widths))

    def derivative(self, p):
        p = np.asarray(p, dtype=float)
        return sum(-c * p / (s * s) * np.exp(-0.5 * (p / s) ** 2)
                   for c, s in zip(self.weights, self.widths))

    def mass(self):
        return 2.0 * math.pi * _SQRT_2PI * sum(c * s for c, s in zip(self.weights, self.widths))

    def pv_integral(self):
        """Closed form of ``int f'(p)/p dp``."""
        return -_SQRT_2PI * sum(c / s for c, s in zip(self.weights, self.widths))

    def scaled(self, factor):
        return MomentumProfile(tuple(factor * c for c in self.weights), self.widths)

    def __add__(self, other):
        return MomentumProfile(self.weights + other.weights, self.widths + other.widths)

    def __sub__(self, other):
        return self + other.scaled(-1.0)


@dataclass(frozen=True)
class EnergyProfile:
    """Stationary state ``F(h) = sum_i c_i exp(-(h - h0_i) / theta_i)``."""

    weights: tuple
    offsets: tuple
    scales: tuple

    def __post_init__(self):
        cols = [tuple(float(x) for x in np.atleast_1d(v))
                for v in (self.weights, self.offsets, self.scales)]
        if len({len(c) for c in cols}) != 1 or not cols[0]:
            raise DomainError("weights, offsets and scales must have equal non-zero length")
        if any(not t > 0 for t in cols[2]):
            raise DomainError("scales must be positive")
        for name, col in zip(("weights", "offsets", "scales"), cols):
            object.__setattr__(self, name, col)

    def __call__(self, h):
        h = np.asarray(h, dtype=float)
        return sum(c * np.exp(-(h - h0) / t) for c, h0, t in zip(self.weights, self.offsets, self.scales))

    def derivative(self, h):
        h = np.asarray(h, dtype=float)
        return sum(-c / t * np.exp(-(h - h0) / t)
                   for c, h0, t in zip(self.weights, self.offsets, self.scales))

    def levels(self, h_floor):
        """Energies where a component changes by a few e-folds; quadrature breakpoints."""
        out = []
        for h0, t in zip(self.offsets, self.scales):
            start = max(h0, h_floor)
            out.extend(start + t * np.array([0.5, 2.0, 6.0, 15.0, 30.0]))
        return out


# -- self-consistency ----------------------------------------------------------


def _moments(M, T, eps, delta):
    """Scaled ``(Z, C)``: mass and ``cos q`` moment of the unnormalised density.

    The density is ``e^{-h/T} + eps^delta e^{-(h + M)/(T eps^2)}``; both are
    divided by ``e^{M/T}`` to keep the Bessel factors finite.
    """
    x = M / T
    a = 2.0 * math.pi * math.sqrt(2.0 * math.pi * T)
    Z = a * special.ive(0, x)
    C = a * special.ive(1, x)
    if eps > 0 and delta is not None:
        y = M / (T * eps * eps) if M > 0 else 0.0
        b = eps ** delta * eps * a * math.exp(-x)
        Z += b * special.ive(0, y)
        C += b * special.ive(1, y)
    return Z, C


def selfconsistency_residual(M, T, eps=0.0, delta=None):
    """``M - iint f_M cos q`` for the (possibly bump-modified) thermal family."""
    Z, C = _moments(M, T, eps, delta)
    return M - C / Z


def solve_selfconsistent_M(T, eps=0.0, delta=None, *, xtol=1e-15, maxiter=200, n_scan=400):
    """Largest root ``M`` in ``(0, 1)`` of the self-consistency equation; 0 if none.

    ``eps > 0`` adds the bump ``eps^delta e^{-(h + M)/(T eps^2)}`` to the
    thermal weight ``e^{-h/T}``. Roots are bracketed on a scan of ``n_scan``
    points and refined with Brent's method.
    """
    T = check_positive(T, "T")
    eps = check_positive(eps, "eps", strict=False)
    if eps > 0 and delta is None:
        raise DomainError("delta is required when eps > 0")
    grid = np.linspace(1e-6, 1.0 - 1e-9, n_scan)
    r = np.array([selfconsistency_residual(m, T, eps, delta) for m in grid])
    change = np.nonzero((r[:-1] < 0) & (r[1:] >= 0))[0]
    if change.size == 0:
        return 0.0
    i = change[-1]
    try:
        root, info = optimize.brentq(selfconsistency_residual, grid[i], grid[i + 1],
                                     args=(T, eps, delta), xtol=xtol, rtol=4 * np.finfo(float).eps,
                                     maxiter=maxiter, full_output=True)
    except RuntimeError as exc:
        raise ConvergenceError(str(exc)) from exc
    if not info.converged:
        raise ConvergenceError(f"self-consistency root did not converge: {info.flag}")
    return float(root)


# -- stationary families --------------------------------------------------------


class StateKind(enum.Enum):
    THERMAL_HOMOGENEOUS = "ThermalHomogeneous"
    THERMAL_INHOMOGENEOUS = "ThermalInhomogeneous"
    MODIFIED_THERMAL = "ModifiedThermal"
    HOMOGENEOUS_WITH_BUMP = "HomogeneousWithBump"


@dataclass(frozen=True)
class StationarySpec:
    """Parametric stationary state plus the diagnostic perturbation ``mu``.

    ``ModifiedThermal`` is ``e^{-h/T} + eps^delta e^{-(h - h(0,0))/(T eps^2)}``;
    it is treated as homogeneous (``M = 0``) for ``T >= 0.5`` and with the
    self-consistent ``M > 0`` otherwise. ``HomogeneousWithBump`` is
    ``(f0 + g_{eps,alpha}) / (1 + eps^{1+alpha})`` with ``f0`` thermal.
    """

    kind: StateKind
    T: float
    eps: float = 0.0
    delta: float = None
    alpha: float = None
    mu: float = 0.0
    _M: float = field(default=None, init=False, repr=False, compare=False)

    def __post_init__(self):
        kind = self.kind if isinstance(self.kind, StateKind) else StateKind(self.kind)
        object.__setattr__(self, "kind", kind)
        check_positive(self.T, "T")
        check_positive(self.eps, "eps", strict=False)
        if not math.isfinite(self.mu) or abs(self.mu) >= 1:
            raise DomainError(f"mu must satisfy |mu| < 1, got {self.mu}")
        if kind is StateKind.THERMAL_INHOMOGENEOUS and self.T >= T_CRITICAL:
            raise DomainError(f"no inhomogeneous thermal state at T={self.T} >= {T_CRITICAL}")
        if kind is StateKind.MODIFIED_THERMAL and self.eps > 0 and self.delta is None:
            raise DomainError("ModifiedThermal with eps > 0 needs delta")
        if kind is StateKind.HOMOGENEOUS_WITH_BUMP:
            if not self.eps > 0:
                raise DomainError("HomogeneousWithBump needs eps > 0")
            if self.alpha is None or not self.alpha > 0:
                raise DomainError("HomogeneousWithBump needs alpha > 0")

    @property
    def homogeneous(self):
        if self.kind in (StateKind.THERMAL_HOMOGENEOUS, StateKind.HOMOGENEOUS_WITH_BUMP):
            return True
        if self.kind is StateKind.MODIFIED_THERMAL:
            return self.T >= T_CRITICAL
        return False

    @property
    def bump(self):
        return self.kind is StateKind.MODIFIED_THERMAL and self.eps > 0

    def magnetization(self):
        if self.homogeneous:
            return 0.0
        if self._M is None:
            eps, delta = (self.eps, self.delta) if self.bump else (0.0, None)
            M = solve_selfconsistent_M(self.T, eps, delta)
            if not M > 0:
                raise DomainError(f"no self-consistent M > 0 at T={self.T}")
            object.__setattr__(self, "_M", M)
        return self._M

    def momentum_profile(self):
        """Normalised ``f(p)`` of a homogeneous member of the family."""
        if not self.homogeneous:
            raise DomainError("momentum profiles describe homogeneous states only")
        f0 = thermal_profile(self.T)
        if self.kind is StateKind.HOMOGENEOUS_WITH_BUMP:
            return f0 + build_destabilizer_f1(f0, self.eps, self.alpha, check_alpha=False)
        if self.bump:
            raw = MomentumProfile((1.0, self.eps ** self.delta),
                                  (math.sqrt(self.T), self.eps * math.sqrt(self.T)))
            return raw.scaled(1.0 / raw.mass())
        return f0

    def energy_profile(self, M=None):
        """Normalised ``F(h)`` at magnetization ``M`` (default: self-consistent)."""
        if self.kind is StateKind.HOMOGENEOUS_WITH_BUMP:
            raise DomainError("the destabilised family is defined in p only")
        M = self.magnetization() if M is None else float(M)
        eps = self.eps if self.bump else 0.0
        Z, _ = _moments(M, self.T, eps, self.delta)
        # _moments divides by e^{M/T}; undo it in the weights
        A = math.exp(-M / self.T) / Z
        if not self.bump:
            return EnergyProfile((A,), (0.0,), (self.T,))
        return EnergyProfile((A, A * self.eps ** self.delta), (0.0, -M),
                             (self.T, self.T * self.eps ** 2))


def thermal_profile(T):
    """Normalised homogeneous Maxwellian ``e^{-p^2/2T} / (2 pi sqrt(2 pi T))``."""
    T = check_positive(T, "T")
    return MomentumProfile((1.0 / (2.0 * math.pi * math.sqrt(2.0 * math.pi * T)),), (math.sqrt(T),))


def build_bump_g(eps, alpha):
    """``g_{eps,alpha}(p) = eps g(p / eps^alpha)`` with ``g = e^{-p^2/2} / (2 pi)^{3/2}``."""
    eps = check_positive(eps, "eps")
    alpha = check_positive(alpha, "alpha", strict=False)
    return MomentumProfile((eps / (2.0 * math.pi) ** 1.5,), (eps ** alpha,))


def build_destabilizer_f1(f0, eps, alpha, *, check_alpha=True):
    """Modification ``f1`` with ``f0 + f1 = (f0 + g_{eps,alpha}) / (1 + eps^{1+alpha})``.

    ``f1`` carries zero mass. For ``alpha > 1`` the bump drives ``I[f0 + f1]``
    negative once ``eps`` is small, while ``f1`` stays small in rough norms.
    """
    if not isinstance(f0, MomentumProfile):
        raise TypeError("f0 must be a MomentumProfile")
    if abs(f0.mass() - 1.0) > 1e-12:
        raise DomainError(f"f0 must be normalised, mass is {f0.mass()!r}")
    if check_alpha and not alpha > 1:
        raise DomainError(f"the destabilising regime needs alpha > 1, got {alpha}")
    g = build_bump_g(eps, alpha)
    norm = 1.0 / (1.0 + eps ** (1.0 + alpha))
    return g.scaled(norm) - f0.scaled(eps ** (1.0 + alpha) * norm)


# -- the functional ------------------------------------------------------------


def _odd_and_regular(dfdp, scale):
    ps = scale * np.geomspace(1e-6, 10.0, 25)
    right = np.array([float(dfdp(x)) for x in ps])
    left = np.array([float(dfdp(-x)) for x in ps])
    size = max(np.max(np.abs(right)), 1e-300)
    if np.max(np.abs(right + left)) > 1e-9 * size:
        raise DomainError("profile is not even in p; the principal value needs symmetry")
    a, b = abs(float(dfdp(1e-12 * scale))), abs(float(dfdp(1e-10 * scale)))
    if b > 1e-12 * size:
        exponent = math.log(max(b, 1e-300) / max(a, 1e-300)) / math.log(100.0)
        if exponent < 0.05:
            raise SingularIntegrandError(
                "f'(p) does not vanish at p = 0; int f'(p)/p dp diverges"
            )


def stability_homogeneous(dfdp, quad=None, *, tol=VERDICT_TOL):
    """``I = 1 + pi int f'(p)/p dp`` for a homogeneous even profile.

    ``dfdp`` is a callable or a :class:`MomentumProfile` (its derivative is
    used). The integral is computed as ``2 int_0^inf`` by adaptive quadrature
    with breakpoints on the profile's scales.
    """
    quad = quad or QuadratureSpec()
    if isinstance(dfdp, MomentumProfile):
        widths = dfdp.widths
        func = dfdp.derivative
    else:
        widths = (1.0,)
        func = dfdp
    scale = min(widths)
    _odd_and_regular(func, scale)

    def integrand(p):
        return float(func(p)) / p

    pts = {0.0}
    for s in widths:
        pts.update(s * np.array([0.25, 1.0, 2.5, 5.0, 10.0]))
    pts.update(np.geomspace(1e-8, 1e2, 11) * scale)
    pts = sorted(pts)
    val = piecewise(integrand, pts, quad, what="homogeneous stability integral")
    val += adaptive(integrand, pts[-1], np.inf, epsabs=quad.epsabs, epsrel=quad.epsrel,
                    limit=quad.limit, what="homogeneous stability tail")
    return StabilityReport.from_integral(math.pi * 2.0 * val, 0.0, tol)


def _level_momentum(level, M, cq):
    """``p >= 0`` on the level set ``h = level`` at ``cos q = cq``, or None."""
    arg = 2.0 * (level + M * cq)
    return math.sqrt(arg) if arg > 0 else None


def _w1(q, p, M):
    s = math.sin(0.5 * q)
    k = math.sqrt((0.25 * p * p + M * s * s) / M)
    c = _avg_cos_any(k)
    return math.cos(q) ** 2 - c * c


def separatrix_curves(M, quad, levels=()):
    """Level sets ``(M, h)`` bounding the separatrix band plus extra ``levels``."""
    eta = quad.eta * M
    return [(M, L) for L in sorted({M - eta, M, M + eta, *levels})]


def phase_space_integral(integrand, curves, quad):
    """``4 int_0^pi int_0^inf integrand(q, p) dp dq`` with level-set subdivision.

    ``integrand`` must be even in ``q`` and ``p``. Each curve ``(M, L)`` is the
    level set ``p^2/2 - M cos q = L``; it contributes a breakpoint in ``p`` at
    every ``q`` it crosses and a breakpoint in ``q`` where it meets ``p = 0``.
    """
    inner_spec = QuadratureSpec(quad.epsabs * 0.1, quad.epsrel * 0.1, quad.limit, quad.eta)

    def inner(q):
        cq = math.cos(q)
        pts = [0.0]
        for M, L in curves:
            pl = _level_momentum(L, M, cq)
            if pl is not None:
                pts.append(pl)

        def f(p):
            return integrand(q, p)

        val = piecewise(f, pts, inner_spec, what="inner phase-space integral")
        return val + adaptive(f, max(pts), np.inf, epsabs=inner_spec.epsabs,
                              epsrel=inner_spec.epsrel, limit=quad.limit,
                              what="inner phase-space tail")

    qs = {0.0, math.pi}
    for M, L in curves:
        if -M < L < M:
            qs.add(math.acos(-L / M))
    return 4.0 * piecewise(inner, sorted(qs), quad, what="outer phase-space integral")


def inhomogeneous_integral(Fprime, M, weight, quad, levels=()):
    """``iint F'(h) weight(q, p) dq dp`` at magnetization ``M``."""
    def integrand(q, p):
        return float(Fprime(0.5 * p * p - M * math.cos(q))) * weight(q, p)

    return phase_space_integral(integrand, separatrix_curves(M, quad, levels), quad)


def stability_inhomogeneous(Fprime, M, quad=None, *, tol=VERDICT_TOL, levels=None):
    """``I = 1 + iint F'(h) [cos^2 q - <cos Q>^2] dq dp`` at magnetization ``M``.

    ``Fprime`` is a callable of the energy or an :class:`EnergyProfile`.
    The homogeneous limit is singular, so ``M = 0`` is rejected rather than
    silently treated as homogeneous.
    """
    quad = quad or QuadratureSpec()
    if M == 0:
        raise DomainError("M = 0 is homogeneous; use stability_homogeneous")
    M = check_magnetization(M)
    if isinstance(Fprime, EnergyProfile):
        levels = Fprime.levels(-M) if levels is None else levels
        Fprime = Fprime.derivative
    integral = inhomogeneous_integral(Fprime, M, lambda q, p: _w1(q, p, M), quad, levels or ())
    return StabilityReport.from_integral(integral, M, tol)


def stability_functional(spec, quad=None, *, tol=VERDICT_TOL):
    """Evaluate ``I`` for a :class:`StationarySpec` by the matching quadrature route."""
    if spec.homogeneous:
        return stability_homogeneous(spec.momentum_profile(), quad, tol=tol)
    M = spec.magnetization()
    return stability_inhomogeneous(spec.energy_profile(M), M, quad, tol=tol)


def stability_modified_homogeneous_closed(eps, delta, T, *, tol=VERDICT_TOL):
    """Closed form ``1 - (1 + eps^{delta-1}) / (2T (1 + eps^{delta+1}))``.

    ``eps = 0`` means no modification and gives ``1 - 1/(2T)``.
    """
    eps = check_positive(eps, "eps", strict=False)
    T = check_positive(T, "T")
    if eps == 0:
        term = -1.0 / (2.0 * T)
    else:
        term = -(1.0 + eps ** (delta - 1.0)) / (2.0 * T * (1.0 + eps ** (delta + 1.0)))
    return StabilityReport.from_integral(term, 0.0, tol)


def critical_delta(eps, T, bracket=(-10.0, 60.0), *, xtol=1e-14):
    """Exponent ``delta_c`` where the closed-form homogeneous ``I`` vanishes."""
    eps = check_positive(eps, "eps")
    if eps >= 1:
        raise DomainError("eps must be < 1")

    def I(d):
        return stability_modified_homogeneous_closed(eps, d, T).I

    lo, hi = bracket
    if not I(lo) < 0 < I(hi):
        raise DomainError(f"no stability threshold in delta at eps={eps}, T={T}")
    return float(optimize.brentq(I, lo, hi, xtol=xtol, rtol=4 * np.finfo(float).eps))


# -- initial data on the grid -----------------------------------------------------


def build_initial_condition(spec, M=None, n_q=256, n_p=256, p_max=3.0):
    """Tabulate the perturbed state and normalise it to unit mass on the grid.

    ``A [e^{-h/T} (1 + mu cos q) + eps^delta e^{-(h - h(0,0))/(T eps^2)}]``
    for the thermal families (``h`` uses ``M``), and
    ``A [f0(p) (1 + mu cos q) + g_{eps,alpha}(p)]`` for ``HomogeneousWithBump``.
    """
    if M is None:
        M = spec.magnetization()
    M = check_positive(M, "M", strict=False)
    T, mu = spec.T, spec.mu

    if spec.kind is StateKind.HOMOGENEOUS_WITH_BUMP:
        f0 = thermal_profile(T)
        g = build_bump_g(spec.eps, spec.alpha)

        def density(Q, P):
            return f0(P) * (1.0 + mu * np.cos(Q)) + g(P)
    else:
        bump_w = spec.eps ** spec.delta if spec.bump else 0.0

        def density(Q, P):
            lift = 0.5 * P * P + M * (1.0 - np.cos(Q))  # h - h(0, 0) >= 0
            # e^{-h/T} = e^{M/T} e^{-lift/T}; the common e^{M/T} is absorbed in A
            out = np.exp(-lift / T) * (1.0 + mu * np.cos(Q))
            if bump_w:
                out = out + bump_w * math.exp(-M / T) * np.exp(-lift / (T * spec.eps ** 2))
            return out

    grid = PhaseGrid.tabulate(density, n_q, n_p, p_max)
    grid.values /= grid.mass()
    return grid
