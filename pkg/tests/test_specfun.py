import math
from fractions import Fraction

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pdem_bgcs import specfun
from pdem_bgcs.errors import (
    ContourError,
    NoConvergence,
    ParamSingular,
    PoleError,
    QuadratureNotConverged,
)
from pdem_bgcs.specfun import PrecisionConfig

# 50-digit mpmath values, frozen
GAMMA_M0564 = -3.6025724868247796227
F03_111_4 = 6.0501592745262551506
F03_1_43_43_1 = 1.5885882333545286998
I0_2 = 2.2795853023360672674
G_THIRD = {  # G^{4,0}_{0,4}(y | 0, 0, 1/3, 1/3)
    1e-3: 11.464042776860600563,
    1.0: 0.1318875251468696939,
    10.0: 0.0037649578346286793288,
    1e3: 3.1243840244167635582e-10,
}


def test_gamma_basic_values():
    assert specfun.gamma(1.0) == 1.0
    assert specfun.gamma(0.5) == pytest.approx(math.sqrt(math.pi), rel=1e-15)
    assert specfun.gamma(-0.564) == pytest.approx(GAMMA_M0564, rel=1e-13)


def test_gamma_log_mode_sign():
    lg, sign = specfun.gamma(-0.564, "log")
    assert sign == -1
    assert lg == pytest.approx(math.log(abs(GAMMA_M0564)), rel=1e-13)
    lg, sign = specfun.gamma(-1.5, "log")
    assert sign == 1
    assert math.exp(lg) == pytest.approx(4.0 * math.sqrt(math.pi) / 3.0, rel=1e-14)


@pytest.mark.parametrize("x", [-0.99999, -2.0 + 1e-7, -3.5, 0.25])
def test_gamma_near_poles_against_mpmath(x):
    assert specfun.gamma(x) == pytest.approx(float(mp.gamma(x)), rel=1e-13)


@pytest.mark.parametrize("x", [0.0, -1.0, -7.0, -3.0 + 1e-13])
def test_gamma_poles(x):
    with pytest.raises(PoleError):
        specfun.gamma(x)


def test_gamma_unknown_mode():
    with pytest.raises(ValueError):
        specfun.gamma(1.0, "bogus")


@settings(max_examples=200, deadline=None)
@given(st.floats(-5.0, 20.0))
def test_gamma_recurrence(x):
    # make x + 1 exact so both sides see the same input
    x = (x + 1.0) - 1.0
    if x <= 0.5 and abs(x - round(x)) < 1e-3:
        return
    assert specfun.gamma(x + 1.0) == pytest.approx(x * specfun.gamma(x), rel=1e-12)


@settings(max_examples=60, deadline=None)
@given(st.floats(-4.9, 4.9))
def test_gamma_against_mpmath(x):
    if abs(x - round(x)) < 1e-9 and x <= 0.5:
        return
    assert specfun.gamma(x) == pytest.approx(float(mp.gamma(x)), rel=1e-13)


def test_pochhammer():
    assert specfun.pochhammer(3.7, 0) == 1.0
    assert specfun.pochhammer(1.0, 6) == 720.0
    assert specfun.pochhammer(-2.0, 4) == 0.0
    assert specfun.pochhammer(0.5, 3) == pytest.approx(0.5 * 1.5 * 2.5)


def test_log_pochhammer_matches_product():
    lp, sign = specfun.log_pochhammer(-2.5, 5)
    direct = -2.5 * -1.5 * -0.5 * 0.5 * 1.5
    assert sign == -1
    assert math.exp(lp) == pytest.approx(abs(direct), rel=1e-14)


def test_hyper0f3_at_zero_is_one():
    assert specfun.hyper0f3(0.3, 1.7, 2.2, 0.0) == 1.0


def test_hyper0f3_brute_force_oracle():
    assert specfun.hyper0f3(1, 1, 1, 4.0) == pytest.approx(F03_111_4, rel=1e-13)


def test_hyper0f3_rational_oracle():
    s, t, b = Fraction(0), Fraction(1), Fraction(4, 3)
    for n in range(40):
        s += t
        t = t / ((n + 1) * (1 + n) * (b + n) ** 2)
    assert float(s) == pytest.approx(F03_1_43_43_1, rel=1e-15)
    assert specfun.hyper0f3(1.0, 4 / 3, 4 / 3, 1.0) == pytest.approx(float(s), rel=1e-13)


def test_hyper0f3_error_bound_is_honest():
    val, err = specfun.hyper0f3(0.7, 1.3, 2.9, 37.0, with_error=True)
    exact = float(mp.hyper([], [0.7, 1.3, 2.9], 37.0))
    assert abs(val - exact) <= err + 1e-15 * abs(exact)
    assert err <= 1e-12 * abs(val)


def test_hyper0f3_complex_argument():
    w = 1.3 - 0.7j
    got = specfun.hyper0f3(1.0, 0.8, 0.8, w)
    want = complex(mp.hyper([], [1, 0.8, 0.8], w))
    assert abs(got - want) <= 1e-13 * abs(want)


def test_hyper0f3_negative_b_past_pole():
    got = specfun.hyper0f3(1.0, -2.5, -2.5, 3.0)
    assert got == pytest.approx(float(mp.hyper([], [1, -2.5, -2.5], 3.0)), rel=1e-12)


def test_hyper0f3_param_singular():
    with pytest.raises(ParamSingular):
        specfun.hyper0f3(1.0, -2.0, 0.5, 1.0)


def test_hyper0f3_no_convergence():
    with pytest.raises(NoConvergence):
        specfun.hyper0f3(1.0, 1.0, 1.0, 1e12, PrecisionConfig(max_terms=32))


@settings(max_examples=100, deadline=None)
@given(st.floats(0.1, 6.0), st.floats(0.1, 6.0), st.floats(0.1, 6.0), st.floats(0.0, 50.0))
def test_hyper0f3_recurrence_vs_direct_sum(b1, b2, b3, x):
    got = specfun.hyper0f3(b1, b2, b3, x)
    terms = []
    for n in range(80):
        lp = sum(specfun.log_pochhammer(b, n)[0] for b in (b1, b2, b3))
        log_x = n * math.log(x) if x > 0 else (0.0 if n == 0 else -math.inf)
        terms.append(math.exp(log_x - math.lgamma(n + 1) - lp))
    assert got == pytest.approx(math.fsum(terms), rel=1e-12)


def test_bessel_i():
    assert specfun.bessel_i(0, 0.0) == 1.0
    assert specfun.bessel_i(1, 0.0) == 0.0
    assert specfun.bessel_i(0, 2.0) == pytest.approx(I0_2, rel=1e-14)
    assert specfun.bessel_i(1, 3.3) == pytest.approx(float(mp.besseli(1, 3.3)), rel=1e-13)
    with pytest.raises(ValueError):
        specfun.bessel_i(0, -1.0)


def test_precision_config_validation():
    with pytest.raises(ValueError):
        PrecisionConfig(rel_tol=0.0)
    with pytest.raises(ValueError):
        PrecisionConfig(rel_tol=1e-2)
    with pytest.raises(ValueError):
        PrecisionConfig(max_terms=10)
    with pytest.raises(ContourError):
        PrecisionConfig(contour_abscissa=0.0, b_params=(0.0, 0.0, 1 / 3, 1 / 3))
    PrecisionConfig(contour_abscissa=0.1, b_params=(0.0, 0.0, 1 / 3, 1 / 3))


def test_meijer_contour_left_of_pole_rejected():
    cfg = PrecisionConfig(contour_abscissa=-0.5)
    with pytest.raises(ContourError):
        specfun.meijer_g_4040((0.0, 0.0, 1 / 3, 1 / 3), 1.0, cfg)


def test_meijer_rejects_nonpositive_y():
    with pytest.raises(ValueError):
        specfun.meijer_g_4040((0.0, 0.0, 1 / 3, 1 / 3), -1.0)


@pytest.mark.parametrize("y", sorted(G_THIRD))
def test_meijer_against_frozen_mpmath(y):
    got, err = specfun.meijer_g_4040((0.0, 0.0, 1 / 3, 1 / 3), y, with_error=True)
    assert got == pytest.approx(G_THIRD[y], rel=1e-12)
    assert abs(got - G_THIRD[y]) <= err + 1e-15 * G_THIRD[y]


def test_meijer_stable_under_refinement():
    b = (0.0, 0.0, 1 / 3, 1 / 3)
    base = specfun.meijer_g_4040(b, 1.0)
    fine = specfun.meijer_g_4040(b, 1.0, PrecisionConfig(contour_halfheight=40.0, contour_step=0.025))
    assert fine == pytest.approx(base, rel=1e-13)


def test_meijer_vectorized_matches_scalar():
    b = (0.0, 0.0, -0.2, -0.2)
    ys = np.array([0.01, 0.5, 7.0, 300.0])
    vec = specfun.meijer_g_4040(b, ys)
    # chunks share one contour height, so agreement is at rel_tol, not bitwise
    assert np.allclose(vec, [specfun.meijer_g_4040(b, y) for y in ys], rtol=1e-13, atol=0)


def test_meijer_random_b_against_mpmath():
    b = (0.0, 0.4, 1.1, 2.3)
    for y in (0.05, 2.0, 80.0):
        want = float(mp.meijerg([[], []], [list(b), []], y))
        assert specfun.meijer_g_4040(b, y) == pytest.approx(want, rel=1e-11)


def test_meijer_quadrature_failure_reported():
    cfg = PrecisionConfig(contour_halfheight=0.5, contour_step=2.0)
    with pytest.raises(QuadratureNotConverged):
        specfun.meijer_g_4040((0.0, 0.0, 1 / 3, 1 / 3), 1.0, cfg)


@pytest.mark.parametrize("k", range(1, 7))
def test_meijer_mellin_moments(k):
    # int_0^inf G(y) y^(k-1) dy = prod Gamma(b_i + k)
    b = (0.0, 0.0, 1 / 3, 1 / 3)
    u = np.linspace(-70.0, 4.0 * math.log(60.0 + 10 * k), 4000)
    y = np.exp(u)
    g = specfun.meijer_g_4040(b, y)
    f = g * y ** k
    integral = (u[1] - u[0]) * (f.sum() - 0.5 * (f[0] + f[-1]))
    want = math.prod(math.gamma(bi + k) for bi in b)
    assert integral == pytest.approx(want, rel=1e-6)
