import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import quad

from semiquant import (
    CorrectionScheme,
    LevelShift,
    PhysicalScale,
    closed_form_delta1,
    compute_q,
    delta1_numeric,
    improved_delta,
    make_builtin,
    pade_delta,
    phase_integral,
    simplified_delta1,
    turning_points,
)
from semiquant.correction import DeltaInputs, apply_scheme
from semiquant.errors import ConfigError, InapplicableSchemeError, NumericError

TANH_D1 = -1.0 / (8.0 * math.sqrt(12.0))
finite = st.floats(min_value=-1e3, max_value=1e3, allow_nan=False)


# --------------------------------------------------------------------------
# delta1 from quadrature


@pytest.mark.parametrize("frac", [0.1, 0.25, 0.5, 0.75, 0.95])
def test_delta1_tanh2_matches_closed_form(tanh2_12, unit_scale, frac):
    assert delta1_numeric(tanh2_12, frac * 12.0, unit_scale) == pytest.approx(TANH_D1, abs=1e-6)


@pytest.mark.parametrize("U,beta", [(1.0, 1.0), (100.0, 1.0), (12.0, 0.5)])
def test_delta1_tanh2_scaling(U, beta):
    well = make_builtin("tanh2", U=U)
    expected = closed_form_delta1(well.shape, PhysicalScale(beta))
    assert expected == pytest.approx(-beta / (8 * math.sqrt(U)), rel=1e-14)
    assert delta1_numeric(well, 0.4 * U, PhysicalScale(beta)) == pytest.approx(expected, abs=1e-6)


@pytest.mark.parametrize("eps", [0.5, 3.0, 10.0])
def test_delta1_harmonic_vanishes(harmonic, unit_scale, eps):
    assert abs(delta1_numeric(harmonic, eps, unit_scale)) < 1e-8


def _adaptive_I(well, eps):
    tp = turning_points(well, eps)
    f = lambda x: float(well.derivative(x)) ** 2 / math.sqrt(max(eps - float(well.value(x)), 1e-300))
    right = quad(lambda t: f(tp.x_plus - t * t) * 2 * t, 0, math.sqrt(tp.x_plus),
                 epsabs=0, epsrel=1e-13, limit=400)[0]
    return 2.0 * right  # the gauss well is even


def test_delta1_gauss_against_adaptive_oracle(gauss_1, unit_scale):
    eps = 0.5

    def second(h):
        f = lambda e: _adaptive_I(gauss_1, e)
        return (-f(eps + 2 * h) + 16 * f(eps + h) - 30 * f(eps) + 16 * f(eps - h)
                - f(eps - 2 * h)) / (12 * h * h)

    oracle_h = second(5e-3) / (24 * math.pi)
    oracle_h2 = second(2.5e-3) / (24 * math.pi)
    assert abs(oracle_h - oracle_h2) < 1e-6
    assert delta1_numeric(gauss_1, eps, unit_scale) == pytest.approx(oracle_h2, abs=1e-6)


# --------------------------------------------------------------------------
# closed-form shifts


def test_pade_examples():
    assert pade_delta(0.0) == 0.0
    # -1/(8 sqrt 12) maps to sqrt(12) - 7/2 = -1/(8 sqrt 3 + 14)
    assert pade_delta(TANH_D1) == pytest.approx(-1.0 / (8 * math.sqrt(3) + 14), rel=1e-14)
    assert pade_delta(TANH_D1) == pytest.approx(math.sqrt(12) - 3.5, rel=1e-13)
    assert pade_delta(-0.0360844) == pytest.approx(-0.0358984, abs=1e-7)
    assert abs(pade_delta(1e-9) - 1e-9) < 1e-17


@pytest.mark.parametrize("t", [100.0, -100.0, 50.0, -1e4])
def test_pade_large_argument_asymptote(t):
    # expansion of 2t / (1 + 4|t| sqrt(1 + 1/16t^2)): sgn/2 - 1/(8t) + O(1/t^2)
    approx = math.copysign(0.5, t) - 1.0 / (8.0 * t)
    assert abs(pade_delta(t) - approx) <= 4.0 / (64.0 * t * t)


@given(st.floats(min_value=-1e-3, max_value=1e-3, allow_nan=False))
def test_pade_small_argument_bound(t):
    assert abs(pade_delta(t) - t) <= 8 * abs(t) ** 3


@given(finite)
def test_pade_sign_and_bound(t):
    d = pade_delta(t)
    assert abs(d) < 0.5
    assert d == 0 or math.copysign(1, d) == math.copysign(1, t)


def test_improved_reduces_to_pade_at_q_one():
    rng = np.random.default_rng(7)
    for d1 in rng.uniform(-1e3, 1e3, 1000):
        assert improved_delta(d1, 1.0) == pytest.approx(pade_delta(d1), rel=1e-15, abs=1e-300)


@given(finite, st.floats(min_value=1e-3, max_value=50, allow_nan=False))
@settings(max_examples=200)
def test_improved_sign_preserved_for_positive_q(d1, q):
    d = improved_delta(d1, q)
    assert d == 0 or math.copysign(1, d) == math.copysign(1, d1)
    assert abs(d) < 0.5 or q < 1


def test_improved_small_delta1():
    assert abs(improved_delta(1e-8, 0.7) - 1e-8) < 1e-15


@pytest.mark.parametrize("phi_U", [0.01, 0.05, 0.2])
def test_improved_large_negative_limit(phi_U):
    d1 = -1e7
    q = compute_q(d1, phi_U)
    d = improved_delta(d1, q)
    # exact limit of the improved form with q = -8 d1 Phi(U)
    exact_limit = -1.0 / (4 * phi_U + 2 * math.sqrt(1 + 4 * phi_U ** 2))
    assert d == pytest.approx(exact_limit, abs=1e-6)
    # -1/2 + Phi(U) holds to first order in Phi(U)
    assert abs(d - (-0.5 + phi_U)) <= 2.5 * phi_U ** 2
    assert d > -0.5


def test_improved_zero_denominator_is_reported():
    # only reachable through cancellation for huge negative q
    with pytest.raises(NumericError):
        improved_delta(1.0, -1e20)


def test_compute_q_forms():
    U = 12.0
    d1, phi = -1 / (8 * math.sqrt(U)), math.sqrt(U)
    assert compute_q(d1, phi) == pytest.approx(1.0, rel=1e-15)
    assert compute_q(0.0, phi) == 0.0
    assert compute_q(d1, phi, "quotient") == pytest.approx(64 * U, rel=1e-14)
    with pytest.raises(NumericError):
        compute_q(0.0, phi, "quotient")
    with pytest.raises(ConfigError):
        compute_q(d1, phi, "ratio")


def test_simplified_delta1():
    assert simplified_delta1(math.sqrt(12)) == pytest.approx(-1 / (8 * math.sqrt(12)), rel=1e-15)
    assert simplified_delta1(0.125) == -1.0
    with pytest.raises(NumericError):
        simplified_delta1(0.0)


def test_apply_scheme():
    inp = DeltaInputs(delta1=-0.03, phi_at_U=2.0, q=0.5)
    assert apply_scheme(CorrectionScheme.PLAIN, inp) == 0.0
    assert apply_scheme(CorrectionScheme.FIRST_ORDER, inp) == -0.03
    assert apply_scheme(CorrectionScheme.PADE, inp) == pade_delta(-0.03)
    assert apply_scheme(CorrectionScheme.IMPROVED, inp) == improved_delta(-0.03, 0.5)
    assert apply_scheme(CorrectionScheme.IMPROVED_SIMPLIFIED, inp) == pade_delta(-1 / 16)
    with pytest.raises(InapplicableSchemeError):
        apply_scheme(CorrectionScheme.IMPROVED, DeltaInputs(-0.03))


@pytest.mark.parametrize("text,scheme", [
    ("plain", CorrectionScheme.PLAIN), ("PADE", CorrectionScheme.PADE),
    ("first-order", CorrectionScheme.FIRST_ORDER), ("improved", CorrectionScheme.IMPROVED),
    ("improved-simplified", CorrectionScheme.IMPROVED_SIMPLIFIED),
])
def test_scheme_parse(text, scheme):
    assert CorrectionScheme.parse(text) is scheme


def test_scheme_parse_rejects_unknown():
    with pytest.raises(ConfigError):
        CorrectionScheme.parse("wkb3")


@pytest.mark.parametrize("scheme", ["improved", "improved-simplified"])
def test_improved_needs_asymptote(harmonic, unit_scale, scheme):
    with pytest.raises(InapplicableSchemeError, match="no asymptote"):
        LevelShift(harmonic, CorrectionScheme.parse(scheme), unit_scale)


@pytest.mark.parametrize("U", [1.0, 12.0, 100.0])
def test_shape_class_consistency(U, unit_scale):
    """On the shape class with a common asymptote q = 1, so improved equals pade."""
    well = make_builtin("tanh2", U=U)
    imp = LevelShift(well, CorrectionScheme.IMPROVED, unit_scale)
    assert imp.q == pytest.approx(1.0, abs=1e-6)
    assert abs(imp.mu) < 1e-6
    assert imp.phi_at_U == pytest.approx(math.sqrt(U), rel=1e-12)
    eps = 0.3 * U
    pade = LevelShift(well, CorrectionScheme.PADE, unit_scale)(eps)
    assert imp(eps).delta == pytest.approx(pade.delta, abs=1e-9)
    simp = LevelShift(well, CorrectionScheme.IMPROVED_SIMPLIFIED, unit_scale)
    assert simp.constant and simp.q == 1.0
    assert simp(eps).delta1 == pytest.approx(-1 / (8 * math.sqrt(U)), rel=1e-12)


def test_gauss_q_is_off_class(gauss_1, unit_scale):
    imp = LevelShift(gauss_1, CorrectionScheme.IMPROVED, unit_scale)
    assert imp.eps_ref == 0.5
    assert imp.q == pytest.approx(-8 * delta1_numeric(gauss_1, 0.5, unit_scale)
                                  * phase_integral(gauss_1, 1.0, unit_scale), rel=1e-14)
    assert 0.1 < imp.mu < 0.5


def test_per_level_q_tracks_energy(gauss_1, unit_scale):
    shift = LevelShift(gauss_1, CorrectionScheme.IMPROVED, unit_scale, per_level_q=True)
    a, b = shift(0.3), shift(0.7)
    assert a.q != b.q
    assert a.q == pytest.approx(compute_q(a.delta1, shift.phi_at_U), rel=1e-15)


def test_level_shift_rejects_unknown_q_form(tanh2_12, unit_scale):
    with pytest.raises(ConfigError):
        LevelShift(tanh2_12, CorrectionScheme.IMPROVED, unit_scale, q_form="ratio")
