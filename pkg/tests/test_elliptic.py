import math

import mpmath
import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import integrate

from hmfvlasov.elliptic import (
    complete_elliptic,
    ek_complement,
    ek_ratio,
    elliptic_derivatives,
    ellipe,
    ellipk,
)
from hmfvlasov.exceptions import DomainError

moduli = st.floats(min_value=0.0, max_value=0.999999, allow_nan=False)


def quad_K(k):
    return integrate.quad(lambda t: 1.0 / math.sqrt(1.0 - (k * math.sin(t)) ** 2),
                          0.0, 0.5 * math.pi, epsabs=0.0, epsrel=1e-13, limit=200)[0]


def quad_E(k):
    return integrate.quad(lambda t: math.sqrt(1.0 - (k * math.sin(t)) ** 2),
                          0.0, 0.5 * math.pi, epsabs=0.0, epsrel=1e-13, limit=200)[0]


def test_values_at_zero_are_quarter_circle():
    pair = complete_elliptic(0.0)
    assert abs(pair.K - math.pi / 2) < 1e-14
    assert abs(pair.E - math.pi / 2) < 1e-14


def test_E_tends_to_one_at_the_top():
    assert abs(ellipe(1.0 - 1e-12) - 1.0) < 1e-9
    assert ellipk(1.0 - 1e-12) > 14.0


def test_mid_modulus_matches_quadrature():
    assert ellipk(0.5) == pytest.approx(quad_K(0.5), rel=1e-13)
    assert ellipe(0.5) == pytest.approx(quad_E(0.5), rel=1e-13)


@pytest.mark.parametrize("k", np.linspace(0.0, 0.99, 100))
def test_agrees_with_quadrature_oracle(k):
    pair = complete_elliptic(k)
    assert pair.K == pytest.approx(quad_K(k), rel=1e-11)
    assert pair.E == pytest.approx(quad_E(k), rel=1e-11)


@pytest.mark.parametrize("k", [0.1, 0.7, 0.9, 0.999, 0.999999])
def test_agrees_with_mpmath(k):
    # extra digits: near k = 1 the oracle itself loses accuracy at double precision
    with mpmath.workdps(40):
        m = mpmath.mpf(k) ** 2
        K, E = float(mpmath.ellipk(m)), float(mpmath.ellipe(m))
    assert ellipk(k) == pytest.approx(K, rel=1e-13)
    assert ellipe(k) == pytest.approx(E, rel=1e-13)


def test_vectorised_matches_scalar():
    ks = np.linspace(0.0, 0.95, 17)
    pair = complete_elliptic(ks)
    assert np.allclose(pair.K, [ellipk(k) for k in ks], rtol=1e-15, atol=0)
    assert np.allclose(pair.E, [ellipe(k) for k in ks], rtol=1e-15, atol=0)


@pytest.mark.parametrize("bad", [-0.1, 1.0, 1.5, float("nan")])
def test_rejects_moduli_outside_unit_interval(bad):
    with pytest.raises(DomainError):
        complete_elliptic(bad)


@pytest.mark.parametrize("bad", [0.0, 1.0])
def test_derivatives_reject_singular_endpoints(bad):
    with pytest.raises(DomainError):
        elliptic_derivatives(bad)


@pytest.mark.parametrize("k", np.linspace(0.04, 0.96, 20))
def test_derivatives_match_central_differences(k):
    h = 1e-6
    dK, dE = elliptic_derivatives(k)
    hi, lo = complete_elliptic(k + h), complete_elliptic(k - h)
    assert dK == pytest.approx((hi.K - lo.K) / (2 * h), rel=1e-6)
    assert dE == pytest.approx((hi.E - lo.E) / (2 * h), rel=1e-6)


def test_derivative_at_point_three():
    h = 1e-6
    dK, dE = elliptic_derivatives(0.3)
    assert dK == pytest.approx((ellipk(0.3 + h) - ellipk(0.3 - h)) / (2 * h), rel=1e-6)
    assert dE == pytest.approx((ellipe(0.3 + h) - ellipe(0.3 - h)) / (2 * h), rel=1e-6)


def test_derivative_formulas_in_textbook_form():
    for k in (0.2, 0.5, 0.8):
        K, E = ellipk(k), ellipe(k)
        dK, dE = elliptic_derivatives(k)
        assert dK == pytest.approx((E - (1 - k * k) * K) / (k * (1 - k * k)), rel=1e-13)
        assert dE == pytest.approx((E - K) / k, rel=1e-13)


@pytest.mark.parametrize("k", [1e-3, 0.01, 0.03, 0.05])
def test_taylor_series_near_zero(k):
    K_series = 0.5 * math.pi * (1 + k ** 2 / 4 + 9 * k ** 4 / 64)
    E_series = 0.5 * math.pi * (1 - k ** 2 / 4 - 3 * k ** 4 / 64)
    # next omitted terms are 25/256 k^6 and 5/256 k^6
    assert abs(ellipk(k) - K_series) <= 10 * 0.5 * math.pi * 25 / 256 * k ** 6 + 1e-15
    assert abs(ellipe(k) - E_series) <= 10 * 0.5 * math.pi * 5 / 256 * k ** 6 + 1e-15


def test_ratio_small_k_expansion():
    assert ek_ratio(0.0) == 1.0
    assert abs(ek_ratio(1e-3) - (1 - 5e-7)) < 5e-12
    for k in np.geomspace(1e-6, 1e-3, 7):
        assert abs(ek_ratio(k) - (1 - k * k / 2)) <= 5 * k ** 4


def test_ratio_against_quadrature():
    assert ek_ratio(0.9) == pytest.approx(quad_E(0.9) / quad_K(0.9), rel=1e-12)


def test_complement_keeps_relative_accuracy_for_tiny_k():
    k = 1e-9
    assert ek_complement(k) == pytest.approx(k * k / 2, rel=1e-6)


@given(moduli, moduli)
def test_K_increases_and_E_decreases(a, b):
    lo, hi = sorted((a, b))
    if hi - lo < 1e-12:
        return
    assert ellipk(hi) >= ellipk(lo)
    assert ellipe(hi) <= ellipe(lo)


@given(moduli)
def test_bounds_about_quarter_circle(k):
    pair = complete_elliptic(k)
    assert pair.K >= math.pi / 2 - 1e-15
    assert pair.E <= math.pi / 2 + 1e-15
    assert pair.E >= 1.0 - 1e-15


@given(st.floats(min_value=1e-3, max_value=0.999))
def test_derivative_signs(k):
    dK, dE = elliptic_derivatives(k)
    assert dK > 0 > dE


@given(st.floats(min_value=1e-6, max_value=0.99))
def test_legendre_relation(k):
    # E K' + E' K - K K' = pi/2 involves only the pair computed here
    kp = math.sqrt(1 - k * k)
    K, E = ellipk(k), ellipe(k)
    Kp, Ep = ellipk(kp), ellipe(kp)
    if kp >= 1.0:
        return
    assert E * Kp + Ep * K - K * Kp == pytest.approx(math.pi / 2, rel=1e-12)
