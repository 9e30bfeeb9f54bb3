"""Numerical checks around the continuity argument, and the campaign runners.

The continuity argument compares two inhomogeneous states ``f`` and
``f~`` with magnetizations ``M < M~``. Phase space is split by energy (of
the reference Hamiltonian) into the core ``mu1``, the band ``mu2`` around
the separatrix and the exterior ``mu3``, and ``Delta I`` is split as
``Delta I1 - (Delta I21 + Delta I22 + Delta I23)``. This module evaluates
those pieces and the bounds they obey.

The campaign runners integrate the (eps, delta) families with the Vlasov
solver and compare the final magnetization with ``mu/2``.
"""

import csv
import enum
import logging
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from ._quadrature import QuadratureSpec, adaptive, piecewise
from ._validation import check_magnetization, check_positive
from .elliptic import _agm
from .exceptions import DomainError
from .norms import loglog_slope
from .pendulum import _avg_cos_any, orbit_average, orbit_period
from .stability import (
    MomentumProfile,
    StateKind,
    StationarySpec,
    Verdict,
    build_initial_condition,
    phase_space_integral,
    separatrix_curves,
    solve_selfconsistent_M,
    stability_functional,
    stability_homogeneous,
    stability_modified_homogeneous_closed,
    thermal_profile,
)
from .vlasov import SimConfig, run

log = logging.getLogger(__name__)

SWEEP_COLUMNS = ("eps", "delta", "M_f", "verdict", "I_theory")
DELTA_I_COLUMNS = ("dI", "dI1", "dI21", "dI22", "dI23")
_ULPS = 1e-13


class MuRegion(enum.Enum):
    MU1 = "mu1"
    MU2 = "mu2"
    MU3 = "mu3"


@dataclass(frozen=True)
class MuPartition:
    """Energy partition of phase space for ``M`` and ``M~ = M + dM``."""

    M: float
    dM: float

    def __post_init__(self):
        check_magnetization(self.M)
        check_positive(self.dM, "dM")
        if not self.M1 > 0:
            raise DomainError(f"partition needs M - 2 dM > 0, got M1 = {self.M1}")

    @property
    def M1(self):
        return self.M - 2.0 * self.dM

    @property
    def M2(self):
        return self.M + 2.0 * self.dM

    @property
    def h_low(self):
        return 2.0 * self.M1 - self.M

    @property
    def h_high(self):
        return 2.0 * self.M2 - self.M

    @property
    def q_max(self):
        """Largest ``|q|`` reached by the lower band edge ``h = 2 M1 - M``."""
        return math.acos(-self.h_low / self.M)

    def region(self, q, p):
        h = 0.5 * p * p - self.M * math.cos(q)
        if h < self.h_low:
            return MuRegion.MU1
        if h > self.h_high:
            return MuRegion.MU3
        return MuRegion.MU2

    def curves(self):
        return [(self.M, self.h_low), (self.M, self.h_high)]


def _band_height(level, M, q):
    arg = 2.0 * (level + M * math.cos(q))
    return math.sqrt(arg) if arg > 0 else 0.0


def mu2_area(M, dM, quad=None):
    """Area of the separatrix band ``mu2`` and the bound ``16 pi sqrt(dM)``.

    Returns ``(area, bound)``; the area is ``4 int_0^pi (p_u - p_l) dq``
    with the lower edge vanishing beyond ``q_max``.
    """
    quad = quad or QuadratureSpec()
    part = MuPartition(M, dM)

    def height(q):
        return _band_height(part.h_high, M, q) - _band_height(part.h_low, M, q)

    area = 4.0 * piecewise(height, [0.0, part.q_max, math.pi], quad, what="mu2 area")
    return area, 16.0 * math.pi * math.sqrt(dM)


def mu2_area_by_period(M, dM, quad=None):
    """Same area as an energy integral of the orbit period (density of states).

    Independent of :func:`mu2_area`; both rotation branches count above the
    separatrix.
    """
    quad = quad or QuadratureSpec()
    part = MuPartition(M, dM)

    def k_of(h):
        return math.sqrt(0.5 * (h / M + 1.0))

    def inside(h):
        return orbit_period(k_of(h), M)

    def outside(h):
        return 2.0 * orbit_period(k_of(h), M)

    # log singularity at h = M: geometric breakpoints toward it
    lo = [M - 4.0 * dM * 0.5 ** n for n in range(0, 40)]
    hi = [M + 4.0 * dM * 0.5 ** n for n in range(0, 40)]
    kw = dict(epsabs=0.1 * quad.epsrel * dM, epsrel=quad.epsrel, limit=quad.limit,
              what="mu2 area by period")
    a = sum(adaptive(inside, x, y, **kw) for x, y in zip(lo[:-1], lo[1:]))
    b = sum(adaptive(outside, y, x, **kw) for x, y in zip(hi[:-1], hi[1:]))
    return a + b


@dataclass(frozen=True)
class KRangeResult:
    region: MuRegion
    extreme_k2: float
    bound_k2: float
    holds: bool


def k_range_check(M, dM, Mstar, region, n_scan=20001):
    """Scan the ``mu1`` (resp. ``mu3``) boundary for the largest (smallest) ``k^2``.

    ``k`` is the modulus at magnetization ``Mstar`` in ``[M, M + dM]``. The
    bounds are ``k^2 <= 1 - 2 dM / M~`` on ``mu1`` and ``k^2 >= 1 + dM / M~``
    on ``mu3`` with ``M~ = M + dM``; both are attained at ``Mstar = M~``, so
    the comparison allows a few ulps of rounding.
    """
    part = MuPartition(M, dM)
    region = MuRegion(region) if not isinstance(region, MuRegion) else region
    if not M <= Mstar <= M + dM:
        raise DomainError("Mstar must lie in [M, M + dM]")
    Mt = M + dM
    if region is MuRegion.MU1:
        q = np.linspace(0.0, part.q_max, n_scan)
        level = part.h_low
    elif region is MuRegion.MU3:
        q = np.linspace(0.0, math.pi, n_scan)
        level = part.h_high
    else:
        raise DomainError("k ranges are bounded on mu1 and mu3 only")
    p2 = np.maximum(2.0 * (level + M * np.cos(q)), 0.0)
    k2 = (0.25 * p2 + Mstar * np.sin(0.5 * q) ** 2) / Mstar
    if region is MuRegion.MU1:
        extreme, bound = float(k2.max()), 1.0 - 2.0 * dM / Mt
        return KRangeResult(region, extreme, bound, extreme <= bound * (1.0 + _ULPS))
    extreme, bound = float(k2.min()), 1.0 + dM / Mt
    return KRangeResult(region, extreme, bound, extreme >= bound * (1.0 - _ULPS))


# -- Delta I decomposition ----------------------------------------------------


@dataclass(frozen=True)
class DeltaIDecomposition:
    dI: float
    dI1: float
    dI21: float
    dI22: float
    dI23: float
    dI_direct: float
    M: float
    M_tilde: float
    swapped: bool
    Fprime_max: float
    area_mu2: float

    @property
    def identity_residual(self):
        return self.dI1 - (self.dI21 + self.dI22 + self.dI23) - self.dI

    def row(self):
        return tuple(getattr(self, name) for name in DELTA_I_COLUMNS)


def _w1(q, p, M):
    s = math.sin(0.5 * q)
    c = _avg_cos_any(math.sqrt((0.25 * p * p + M * s * s) / M))
    return math.cos(q) ** 2 - c * c


def _avg_cos_sq(q, p, M):
    s = math.sin(0.5 * q)
    c = _avg_cos_any(math.sqrt((0.25 * p * p + M * s * s) / M))
    return c * c


def delta_I_decomposition(f, f_tilde, quad=None):
    """``Delta I = I[f~] - I[f]`` assembled from its pieces.

    Roles are swapped when needed so that ``dM = M~ - M > 0``; all pieces and
    ``dI`` then refer to the swapped pair (``swapped`` records it). The direct
    difference of two :func:`~hmfvlasov.stability.stability_functional`
    evaluations is returned alongside for comparison.
    """
    quad = quad or QuadratureSpec()
    for s in (f, f_tilde):
        if s.homogeneous:
            raise DomainError("the decomposition compares inhomogeneous states")
    M, Mt = f.magnetization(), f_tilde.magnetization()
    swapped = Mt < M
    if swapped:
        f, f_tilde, M, Mt = f_tilde, f, Mt, M
    F, Ft = f.energy_profile(M), f_tilde.energy_profile(Mt)
    curves = separatrix_curves(M, quad, F.levels(-M)) + separatrix_curves(Mt, quad, Ft.levels(-Mt))

    def d1(q, p):
        cq = math.cos(q)
        h, ht = 0.5 * p * p - M * cq, 0.5 * p * p - Mt * cq
        return (float(Ft.derivative(ht)) - float(F.derivative(h))) * _w1(q, p, Mt)

    dI1 = phase_space_integral(d1, curves, quad)
    I_f = stability_functional(f, quad).I
    I_ft = stability_functional(f_tilde, quad).I
    direct = I_ft - I_f
    if (Mt - M) <= 1e-14 * M:
        return DeltaIDecomposition(dI1, dI1, 0.0, 0.0, 0.0, direct, M, Mt, swapped, 0.0, 0.0)
    part = MuPartition(M, Mt - M)
    pieces = []
    for target in MuRegion:
        def d2(q, p, target=target):
            if part.region(q, p) is not target:
                return 0.0
            h = 0.5 * p * p - M * math.cos(q)
            return float(F.derivative(h)) * (_avg_cos_sq(q, p, Mt) - _avg_cos_sq(q, p, M))

        pieces.append(phase_space_integral(d2, curves + part.curves(), quad))
    hs = np.linspace(part.h_low, part.h_high, 2001)
    fmax = float(np.max(np.abs(F.derivative(hs))))
    area, _ = mu2_area(M, Mt - M, quad)
    return DeltaIDecomposition(dI1 - sum(pieces), dI1, *pieces, direct, M, Mt, swapped, fmax, area)


# -- bump contributions to I ------------------------------------------------------


def bump_stability_contribution(eps, delta, T, *, homogeneous, quad=None):
    """Contribution of the bump ``eps^delta e^{-(h - h(0,0))/(T eps^2)}`` to ``I``.

    The bump carries the normalisation of the unmodified thermal state. In
    the homogeneous case this is ``pi int g'/p dp`` by 1D quadrature. In the
    inhomogeneous case (``M`` self-consistent for the thermal state) it is
    ``iint F_b'(h) w dq dp`` evaluated shell by shell as
    ``int F_b'(h) period(h) var_h(cos Q) dh``, which avoids the cancellation
    between ``cos^2 q`` and ``<cos Q>^2`` at small orbits.
    """
    quad = quad or QuadratureSpec()
    eps = check_positive(eps, "eps")
    T = check_positive(T, "T")
    if homogeneous:
        A = thermal_profile(T).weights[0]
        g = MomentumProfile((A * eps ** delta,), (eps * math.sqrt(T),))
        return stability_homogeneous(g, quad).I - 1.0
    M = solve_selfconsistent_M(T)
    if not M > 0:
        raise DomainError(f"no inhomogeneous thermal state at T={T}")
    th = StationarySpec(StateKind.THERMAL_INHOMOGENEOUS, T).energy_profile(M)
    A = th.weights[0]
    theta = T * eps * eps
    c_b = A * eps ** delta

    def integrand(k):
        # h = -M + 2 M k^2, dh = 4 M k dk
        s = _agm(k)[1]  # <sin^2(q/2)> = 1 - E/K
        var = 4.0 * orbit_average(lambda q: (math.sin(0.5 * q) ** 2 - s) ** 2, k,
                                  epsabs=0.0, epsrel=1e-10)
        fprime = -c_b / theta * math.exp(-2.0 * M * k * k / theta)
        return fprime * orbit_period(k, M) * var * 4.0 * M * k

    k_top = min(math.sqrt(40.0 * theta / (2.0 * M)), 1.0 - 1e-6)
    pts = [0.0] + [k_top * x for x in (0.05, 0.15, 0.3, 0.5, 0.75, 1.0)]
    return piecewise(integrand, pts, QuadratureSpec(0.0, 1e-8, quad.limit, quad.eta),
                     what="bump contribution")


def bump_contribution_exponent(eps_list, delta, T, *, homogeneous, quad=None):
    """Fitted exponent of ``|I[g] - 1|`` against ``eps``."""
    vals = [bump_stability_contribution(e, delta, T, homogeneous=homogeneous, quad=quad)
            for e in eps_list]
    return loglog_slope(eps_list, vals), vals


# -- campaigns ---------------------------------------------------------------


@dataclass(frozen=True)
class SweepProtocol:
    """Run parameters shared by all cells of a campaign.

    ``threshold`` defaults to ``mu / 2``. In the inhomogeneous campaign the
    deviation ``|M(t_end) - M_st|`` is compared with it.
    """

    T: float = 0.6
    mu: float = 1e-4
    n_q: int = 256
    n_p: int = 256
    p_max: float = 3.0
    dt: float = 0.05
    t_end: float = 500.0
    diag_stride: int = 20
    interpolation: str = "cubic"
    threshold: float = None
    line_eps: float = 0.05
    line_delta: float = 0.5
    theory: bool = True
    keep_trace: bool = False

    @property
    def M_threshold(self):
        return self.mu / 2.0 if self.threshold is None else self.threshold

    def sim_config(self):
        return SimConfig(dt=self.dt, t_end=self.t_end, diag_stride=self.diag_stride,
                         interpolation=self.interpolation)


@dataclass
class SweepResult:
    eps: float
    delta: float
    M_f: float
    verdict: Verdict
    I_theory: float
    M_ref: float = 0.0
    error: str = None
    t: np.ndarray = field(default=None, repr=False)
    deviation: np.ndarray = field(default=None, repr=False)

    def row(self):
        verdict = self.verdict.value if self.verdict is not None else "Failed"
        return (self.eps, self.delta, self.M_f, verdict, self.I_theory)


def _homogeneous_cell(args):
    eps, delta, protocol = args
    spec = StationarySpec(StateKind.MODIFIED_THERMAL, protocol.T, eps, delta, mu=protocol.mu)
    I_theory = stability_modified_homogeneous_closed(eps, delta, protocol.T).I
    return _run_cell(spec, 0.0, I_theory, protocol)


def _inhomogeneous_cell(args):
    eps, delta, protocol = args
    spec = StationarySpec(StateKind.MODIFIED_THERMAL, protocol.T, eps, delta, mu=protocol.mu)
    try:
        M = spec.magnetization()
        I_theory = stability_functional(spec).I if protocol.theory else math.nan
    except Exception as exc:  # recorded per cell, the campaign goes on
        return SweepResult(eps, delta, math.nan, None, math.nan, error=f"{type(exc).__name__}: {exc}")
    return _run_cell(spec, M, I_theory, protocol)


def _run_cell(spec, M_ref, I_theory, protocol):
    eps, delta = spec.eps, spec.delta
    try:
        grid = build_initial_condition(spec, M_ref, protocol.n_q, protocol.n_p, protocol.p_max)
        series = run(grid, protocol.sim_config())
    except Exception as exc:
        log.warning("cell eps=%g delta=%g failed: %s", eps, delta, exc)
        return SweepResult(eps, delta, math.nan, None, I_theory, M_ref,
                           error=f"{type(exc).__name__}: {exc}")
    deviation = series.M - M_ref
    score = abs(deviation[-1])
    verdict = Verdict.UNSTABLE if score > protocol.M_threshold else Verdict.STABLE
    res = SweepResult(eps, delta, series.M_final, verdict, I_theory, M_ref)
    if protocol.keep_trace:
        res.t, res.deviation = series.t, deviation
    return res


def _map_cells(func, cells, workers):
    workers = int(workers or 1)
    if workers <= 1 or len(cells) <= 1:
        return [func(c) for c in cells]
    with ProcessPoolExecutor(max_workers=min(workers, len(cells))) as pool:
        return list(pool.map(func, cells))


def default_workers():
    env = os.environ.get("HMF_WORKERS")
    return int(env) if env else 1


def scan_phase_diagram(eps_list, delta_list, protocol=None, workers=None):
    """One homogeneous run per ``(eps, delta)`` cell, in lexicographic order."""
    protocol = protocol or SweepProtocol()
    cells = [(float(e), float(d), protocol) for e in sorted(eps_list) for d in sorted(delta_list)]
    return _map_cells(_homogeneous_cell, cells, workers or default_workers())


def inhomogeneous_robustness(eps_list, delta_list, protocol=None, workers=None):
    """Runs at ``T < 1/2`` along ``delta = line_delta`` and ``eps = line_eps``.

    Returns the first line (varying ``eps``) followed by the second line
    (varying ``delta``), each in increasing parameter order.
    """
    protocol = protocol or SweepProtocol(T=0.4, t_end=200.0, keep_trace=True)
    if protocol.T >= 0.5:
        raise DomainError("the inhomogeneous campaign needs T < 1/2")
    cells = [(float(e), protocol.line_delta, protocol) for e in sorted(eps_list)]
    cells += [(protocol.line_eps, float(d), protocol) for d in sorted(delta_list)]
    return _map_cells(_inhomogeneous_cell, cells, workers or default_workers())


def trace_spread(results):
    """Largest pairwise ``sup|a - b| / max(sup|a|, sup|b|)`` between deviation traces."""
    traces = [r.deviation for r in results if r.deviation is not None]
    worst = 0.0
    for i in range(len(traces)):
        for j in range(i + 1, len(traces)):
            a, b = traces[i], traces[j]
            scale = max(np.max(np.abs(a)), np.max(np.abs(b)))
            if scale > 0:
                worst = max(worst, float(np.max(np.abs(a - b)) / scale))
    return worst


def sustained_growth(t, deviation, factor=1.5):
    """True when the late-half envelope of ``|deviation|`` exceeds ``factor`` times the early half."""
    t = np.asarray(t)
    d = np.abs(np.asarray(deviation))
    half = t <= 0.5 * t[-1]
    return bool(np.max(d[~half]) > factor * np.max(d[half]))


def write_csv(path, columns, rows):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(columns)
        for row in rows:
            writer.writerow([v if isinstance(v, str) else f"{v:.16g}" for v in row])
