"""End-to-end acceptance criteria, one test per criterion.

Run with ``pytest tests/test_acceptance.py -v``; a summary of the PASS/FAIL
lines is printed at the end of the session. The dynamical criteria (3, 4
and 10) take several minutes on one core.
"""

import math

import numpy as np
import pytest
from scipy import integrate, optimize

from hmfvlasov import config as cfgmod
from hmfvlasov.cli import cmd_stability
from hmfvlasov.elliptic import complete_elliptic, ek_ratio, elliptic_derivatives
from hmfvlasov.neighborhood import (
    MuRegion,
    SweepProtocol,
    bump_contribution_exponent,
    inhomogeneous_robustness,
    k_range_check,
    mu2_area,
    scan_phase_diagram,
    sustained_growth,
    trace_spread,
)
from hmfvlasov.norms import bump_hs_exponent, inv_ua_lb_norm, loglog_slope
from hmfvlasov.pendulum import (
    avg_cos_libration,
    avg_cos_rotation,
    d_avg_cos_dM_libration,
    d_avg_cos_dM_rotation,
    modulus,
    orbit_average,
)
from hmfvlasov.stability import (
    StateKind,
    StationarySpec,
    Verdict,
    build_bump_g,
    build_destabilizer_f1,
    build_initial_condition,
    critical_delta,
    stability_functional,
    stability_homogeneous,
    thermal_profile,
)
from hmfvlasov.vlasov import SimConfig, run

pytestmark = pytest.mark.acceptance


def quad(f, a, b, **kw):
    kw.setdefault("epsabs", 0.0)
    kw.setdefault("epsrel", 1e-13)
    return integrate.quad(f, a, b, limit=400, **kw)[0]


def test_criterion_1_closed_form_stability(tmp_path, criterion):
    errors = {}
    for T in (0.5, 0.6, 0.8, 1.5):
        job = cfgmod.StabilityJob(cfgmod.StateConfig(kind="ThermalHomogeneous", T=T))
        report = cmd_stability(cfgmod.RunConfig("stability", job, out=str(tmp_path)))
        errors[T] = report.I - (1.0 - 1.0 / (2.0 * T))
    I06 = 1.0 / 6.0 + errors[0.6]
    I05 = errors[0.5]
    ok = abs(I06 - 1.0 / 6.0) < 1e-9 and abs(I05) < 1e-9 and max(map(abs, errors.values())) < 1e-9
    criterion(1, ok, f"I(0.6) = {I06:.15f}, |I(0.5)| = {abs(I05):.1e}")


def test_criterion_2_threshold(criterion):
    dc = critical_delta(0.05, 0.6)

    def I_quadrature(d):
        return stability_functional(StationarySpec(StateKind.MODIFIED_THERMAL, 0.6, 0.05, d)).I

    dc_quad = optimize.brentq(I_quadrature, 1.4, 1.7, xtol=1e-12)
    ok = abs(dc - 1.536) <= 1e-3 and abs(dc_quad - 1.536) <= 1e-3
    criterion(2, ok, f"delta_c = {dc:.6f} (closed form), {dc_quad:.6f} (quadrature)")


@pytest.mark.slow
def test_criterion_3_dynamical_phase_diagram(criterion):
    protocol = SweepProtocol(T=0.6, mu=1e-4, n_q=256, n_p=256, t_end=500.0)
    unstable, stable = scan_phase_diagram([0.05], [1.40, 1.55], protocol, workers=None)
    ok = (unstable.M_f > 5e-5 and stable.M_f < 5e-5
          and unstable.I_theory < 0 < stable.I_theory)
    criterion(3, ok, f"M_f(1.40) = {unstable.M_f:.3e} > 5e-5, M_f(1.55) = {stable.M_f:.3e} < 5e-5")


@pytest.mark.slow
def test_criterion_4_inhomogeneous_robustness(criterion):
    protocol = SweepProtocol(T=0.4, mu=1e-4, n_q=256, n_p=256, t_end=200.0, keep_trace=True)
    results = inhomogeneous_robustness([0.01, 0.02, 0.03, 0.04, 0.05],
                                       [0.1, 0.2, 0.3, 0.4, 0.5], protocol)
    eps_line, delta_line = results[:5], results[5:]
    all_stable = len(results) == 10 and all(r.verdict is Verdict.STABLE for r in results)
    growth = [(r.eps, r.delta) for r in results if sustained_growth(r.t, r.deviation)]
    spreads = trace_spread(eps_line), trace_spread(delta_line)
    ok = all_stable and not growth and max(spreads) <= 0.1
    criterion(4, ok, f"all Stable: {all_stable}, growing: {growth or 'none'}, "
                     f"trace spread {spreads[0]:.3f} (eps line) {spreads[1]:.3f} (delta line)")


def test_criterion_5_orbit_averages(criterion):
    inside = np.linspace(0.01, 0.99, 50)
    outside = 1.0 / np.linspace(0.02, 0.98, 50)
    err_in = max(abs(avg_cos_libration(k) - orbit_average(math.cos, k)) for k in inside)
    err_out = max(abs(avg_cos_rotation(k) - orbit_average(math.cos, k)) for k in outside)
    criterion(5, max(err_in, err_out) < 1e-8,
              f"max error inside {err_in:.1e}, outside {err_out:.1e}")


def test_criterion_6_elliptic_layer(criterion):
    worst_val = 0.0
    for k in np.linspace(0.0, 0.999, 50):
        pair = complete_elliptic(k)
        K = quad(lambda t: 1.0 / math.sqrt(1.0 - (k * math.sin(t)) ** 2), 0.0, math.pi / 2)
        E = quad(lambda t: math.sqrt(1.0 - (k * math.sin(t)) ** 2), 0.0, math.pi / 2)
        worst_val = max(worst_val, abs(pair.K / K - 1), abs(pair.E / E - 1))

    h = 1e-6
    worst_der = 0.0
    for k in np.linspace(0.05, 0.95, 20):
        dK, dE = elliptic_derivatives(k)
        hi, lo = complete_elliptic(k + h), complete_elliptic(k - h)
        worst_der = max(worst_der, abs((hi.K - lo.K) / (2 * h) / dK - 1),
                        abs((hi.E - lo.E) / (2 * h) / dE - 1))
    M, hM = 0.5, 1e-6
    for q, p, deriv in ((0.3, 0.2, d_avg_cos_dM_libration), (2.0, 0.5, d_avg_cos_dM_libration),
                        (0.5, 1.8, d_avg_cos_dM_rotation), (2.5, -1.6, d_avg_cos_dM_rotation)):
        avg = avg_cos_libration if deriv is d_avg_cos_dM_libration else avg_cos_rotation
        fd = (avg(modulus(q, p, M + hM)) - avg(modulus(q, p, M - hM))) / (2 * hM)
        worst_der = max(worst_der, abs(fd / deriv(q, p, M) - 1))

    ratio_err = abs(ek_ratio(1e-3) - (1 - 5e-7))
    worst_rem = max(abs(ek_ratio(k) - (1 - 0.5 * k * k)) / k ** 4 for k in (1e-3, 1e-2, 5e-2))
    ok = worst_val < 1e-11 and worst_der < 1e-6 and ratio_err <= 5e-12 and worst_rem <= 5.0
    criterion(6, ok, f"K,E rel err {worst_val:.1e}; derivatives vs FD {worst_der:.1e}; "
                     f"E/K at k=1e-3 off by {ratio_err:.1e}, remainder/k^4 <= {worst_rem:.3f}")


def test_criterion_7_separatrix_and_weight_bounds(criterion):
    M = 0.5
    dMs = np.geomspace(1e-4, 1e-2, 5)
    areas = [mu2_area(M, d) for d in dMs]
    bound_ok = all(a <= b for a, b in areas)
    area_slope = loglog_slope(dMs, [a for a, _ in areas])
    area_ok = bound_ok and abs(area_slope - 0.5) <= 0.05

    ms = np.geomspace(0.1, 1.0, 5)
    norm_fails = {}
    finite = True
    for a in (2.5, 3.0, 4.0):
        for b in (1.3, 1.5, 1.8):
            vals = [inv_ua_lb_norm(a, b, m) for m in ms]
            finite &= all(math.isfinite(v) and v > 0 for v in vals)
            slope = loglog_slope(ms, vals)
            if abs(slope + 1.0 / b) > 0.05:
                norm_fails.setdefault(b, []).append(f"{slope:.3f}")
    norm_ok = finite and not norm_fails

    k_ok = True
    for dM in (1e-3, 1e-2, 2e-2):
        for Mstar in np.linspace(M, M + dM, 5):
            k_ok &= k_range_check(M, dM, Mstar, MuRegion.MU1).holds
            k_ok &= k_range_check(M, dM, Mstar, MuRegion.MU3).holds

    detail = (f"area <= 16 pi sqrt(dM): {bound_ok}, area slope {area_slope:.3f} (want 0.5 +- 0.05); "
              f"norms finite: {finite}, m-slopes off: "
              f"{'; '.join(f'b={b:g}: {set(v)} vs {-1 / b:.3f}' for b, v in norm_fails.items()) or 'none'}; "
              f"k-ranges hold: {k_ok}")
    criterion(7, area_ok and norm_ok and k_ok, detail)


def test_criterion_8_perturbation_identities(criterion):
    eps, alpha = 1e-3, 1.5
    g = build_bump_g(eps, alpha)
    s = eps ** alpha
    pv = 2.0 * quad(lambda p: g.derivative(p) / p if p else -float(g(0.0)) / s ** 2, 0.0, 40 * s)
    pv_err = abs(pv / (-eps ** (1 - alpha) / (2 * math.pi)) - 1)
    mass = 2.0 * math.pi * 2.0 * quad(lambda p: float(g(p)), 0.0, 40 * s)
    mass_err = abs(mass / eps ** (1 + alpha) - 1)
    f0 = thermal_profile(0.6)
    I0 = stability_homogeneous(f0).I
    I1 = stability_homogeneous(f0 + build_destabilizer_f1(f0, eps, alpha)).I
    ok = pv_err < 1e-10 and mass_err < 1e-12 and I0 > 0 > I1
    criterion(8, ok, f"pv rel err {pv_err:.1e}, mass rel err {mass_err:.1e}, I {I0:.4f} -> {I1:.4f}")


def test_criterion_9_norm_scaling(criterion):
    eps = np.geomspace(1e-3, 1e-1, 5)
    T_hom, T_inh = 0.6, 0.4
    M_inh = StationarySpec(StateKind.THERMAL_INHOMOGENEOUS, T_inh).magnetization()
    worst = 0.0
    for delta in (0.5, 1.0, 1.5):
        for s in (0.0, 0.5, 1.0):
            hom, _ = bump_hs_exponent(eps, delta, s, T_hom)
            inh, _ = bump_hs_exponent(eps, delta, s, T_inh, M=M_inh)
            worst = max(worst, abs(hom - (0.5 + delta - s)), abs(inh - (1 + delta - s)))
    worst_I = 0.0
    for delta in (0.5, 1.5):
        hom, _ = bump_contribution_exponent(eps, delta, T_hom, homogeneous=True)
        inh, _ = bump_contribution_exponent(eps, delta, T_inh, homogeneous=False)
        worst_I = max(worst_I, abs(hom - (delta - 1)), abs(inh - (delta + 4)))
    criterion(9, worst <= 0.1 and worst_I <= 0.5,
              f"max H^s slope error {worst:.1e}, max I-exponent error {worst_I:.1e}")


@pytest.mark.slow
def test_criterion_10_conservation(criterion):
    spec = StationarySpec(StateKind.THERMAL_INHOMOGENEOUS, 0.4, mu=1e-4)
    grid = build_initial_condition(spec, spec.magnetization(), 256, 256, 3.0)
    ts = run(grid, SimConfig(dt=0.05, t_end=200.0, diag_stride=20))
    mass = max(np.max(np.abs(ts.mass - 1)), np.max(np.abs(ts.mass_drift)))
    l2_rise = float(np.max(ts.l2 / ts.l2[0]) - 1)
    energy = float(np.max(np.abs(ts.energy / ts.energy[0] - 1)))
    ok = mass < 1e-4 and l2_rise <= 1e-3 and energy < 1e-3
    criterion(10, ok, f"mass drift {mass:.1e}, L2 rise {l2_rise:.1e}, energy drift {energy:.1e}")
