import math
import warnings

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from hmfvlasov.exceptions import CFLWarning, ConservationError, DomainError
from hmfvlasov.grid import PhaseGrid
from hmfvlasov.stability import StateKind, StationarySpec, build_initial_condition
from hmfvlasov.vlasov import CSV_COLUMNS, SimConfig, TimeSeries, diagnostics, magnetization, run, step


def maxwellian(T=0.6, mu=0.0, n_q=64, n_p=64, p_max=3.0):
    spec = StationarySpec(StateKind.THERMAL_HOMOGENEOUS, T, mu=mu)
    return build_initial_condition(spec, n_q=n_q, n_p=n_p, p_max=p_max)


def test_homogeneous_grid_has_no_magnetization():
    M, _ = magnetization(maxwellian())
    assert M < 1e-15


def test_thermal_grid_carries_the_self_consistent_magnetization():
    spec = StationarySpec(StateKind.THERMAL_INHOMOGENEOUS, 0.4)
    g = build_initial_condition(spec, n_q=128, n_p=128)
    assert magnetization(g)[0] == pytest.approx(spec.magnetization(), abs=1e-6)


def test_concentrated_density_approaches_unit_magnetization():
    g = PhaseGrid.tabulate(lambda Q, P: np.exp(-(Q * Q + P * P) / (2 * 0.01 ** 2)), 512, 64, 0.1)
    g.values /= g.mass()
    M, phase = magnetization(g)
    assert 0.999 < M <= 1.0 + 1e-12
    assert abs(phase) < 1e-12


def test_phase_follows_a_rotation_of_the_density():
    base = maxwellian(0.4, mu=0.3)
    rolled = base.with_values(np.roll(base.values, 8, axis=0))
    _, phase = magnetization(rolled)
    assert phase == pytest.approx(8 * base.dq, abs=1e-12)


def test_step_is_identity_on_homogeneous_data():
    g = maxwellian()
    out = step(g, 0.05)
    assert np.max(np.abs(out.values - g.values)) < 1e-12


def test_free_streaming_keeps_momentum_marginals():
    g = maxwellian(mu=0.2)
    cfg = SimConfig(dt=0.05, t_end=2.0, force=False)
    final = run(g, cfg).final_grid
    assert np.allclose(final.values.sum(axis=0), g.values.sum(axis=0), rtol=1e-11, atol=1e-14)
    # the q-profile did move
    assert np.max(np.abs(final.values - g.values)) > 1e-3 * g.values.max()


def test_free_streaming_follows_characteristics():
    g = maxwellian(mu=0.2, n_q=128)
    t = 1.0
    final = run(g, SimConfig(dt=0.05, t_end=t, force=False)).final_grid
    Q, P = g.mesh()
    T = 0.6
    exact = np.exp(-P * P / (2 * T)) * (1 + 0.2 * np.cos(Q - P * t))
    exact /= exact.sum() * g.cell_area
    assert np.max(np.abs(final.values - exact)) < 1e-4 * exact.max()


def test_time_reversal_returns_the_initial_grid():
    spec = StationarySpec(StateKind.MODIFIED_THERMAL, 0.6, 0.05, 1.4, mu=1e-2)
    g = build_initial_condition(spec, n_q=64, n_p=64)
    fwd = run(g, SimConfig(dt=0.05, t_end=10.0)).final_grid
    back = fwd
    for _ in range(200):
        back = step(back, -0.05)
    assert np.max(np.abs(back.values - g.values)) < 1e-4 * g.values.max()


def test_thermal_state_stays_stationary():
    spec = StationarySpec(StateKind.THERMAL_INHOMOGENEOUS, 0.4)
    M_st = spec.magnetization()
    g = build_initial_condition(spec, n_q=128, n_p=128)
    series = run(g, SimConfig(dt=0.05, t_end=100.0, diag_stride=40))
    assert np.max(np.abs(series.M - M_st)) < 1e-4


def test_conservation_on_a_short_stable_run():
    g = maxwellian(0.6, mu=1e-3, n_q=64, n_p=128)
    s = run(g, SimConfig(dt=0.05, t_end=20.0, diag_stride=10))
    assert np.max(np.abs(s.mass - 1.0)) < 1e-12
    assert np.max(np.abs(s.mass_drift)) < 1e-4
    assert np.all(s.l2[1:] <= s.l2[0] * (1 + 1e-3))
    assert np.max(np.abs(s.energy / s.energy[0] - 1.0)) < 1e-3


def test_recurrence_follows_the_momentum_spacing():
    # free streaming damps M by phase mixing; the grid revives it at 2 pi / dp
    for n_p in (64, 128):
        g = maxwellian(0.6, mu=0.1, n_q=32, n_p=n_p)
        t_r = g.recurrence_time()
        s = run(g, SimConfig(dt=0.05, t_end=70.0, diag_stride=2, force=False))
        near = np.abs(s.t - 2 * math.pi * 64 / 6) < 1.0
        middle = np.abs(s.t - 30.0) < 1.0
        assert s.M[middle].max() < 1e-3 * s.M[0]
        if t_r < 70:
            assert s.M[near].max() > 0.5 * s.M[0]
        else:
            assert s.M[near].max() < 1e-3 * s.M[0]


def test_zero_duration_gives_one_row(tmp_path):
    s = run(maxwellian(), SimConfig(t_end=0.0))
    assert len(s) == 1 and s.t[0] == 0.0
    path = tmp_path / "ts.csv"
    s.to_csv(path)
    assert path.read_text().splitlines()[0] == ",".join(CSV_COLUMNS)


def test_csv_round_trip(tmp_path):
    s = run(maxwellian(mu=0.01), SimConfig(t_end=1.0, diag_stride=5))
    path = tmp_path / "ts.csv"
    s.to_csv(path)
    back = TimeSeries.from_csv(path)
    for name in CSV_COLUMNS:
        # 16 significant digits: equal up to the last binary digit
        assert np.allclose(getattr(back, name), getattr(s, name), rtol=1e-15, atol=0)
    again = tmp_path / "again.csv"
    back.to_csv(again)
    assert again.read_bytes() == path.read_bytes()


def test_mass_drift_abort():
    with pytest.raises(ConservationError):
        run(maxwellian(mu=0.01), SimConfig(t_end=1.0, max_mass_drift=1e-16))


def test_config_validation():
    with pytest.raises(DomainError):
        SimConfig(dt=0.0)
    with pytest.raises(DomainError):
        SimConfig(t_end=-1.0)
    with pytest.raises(DomainError):
        SimConfig(interpolation="spectral")
    with pytest.raises(DomainError):
        SimConfig(dt=0.05, t_end=0.123).n_steps
    assert SimConfig(interpolation="CubicSpline").interpolation == "cubic"


def test_large_steps_warn_about_cfl():
    with pytest.warns(CFLWarning):
        step(maxwellian(n_q=256), 2.0)


def test_time_series_invariants():
    with pytest.raises(ValueError):
        TimeSeries([0, 1], [0], [0], [0], [0], [0])
    with pytest.raises(ValueError):
        TimeSeries([1, 0], [0, 0], [0, 0], [0, 0], [0, 0], [0, 0])


def test_linear_interpolation_runs():
    s = run(maxwellian(mu=0.01), SimConfig(t_end=1.0, interpolation="linear"))
    assert np.all(np.isfinite(s.M))


@given(st.floats(min_value=0.0, max_value=0.5))
def test_diagnostics_of_perturbed_maxwellian(mu):
    g = maxwellian(0.6, mu=mu, n_q=32, n_p=64)
    M, phase, mass, l2, energy = diagnostics(g)
    # M = pi mu / (2 pi) over unit mass: the cos q moment of (1 + mu cos q)/(2 pi)
    assert M == pytest.approx(mu / 2, abs=1e-12)
    assert mass == pytest.approx(1.0, abs=1e-12)
    assert l2 > 0 and math.isfinite(energy)
