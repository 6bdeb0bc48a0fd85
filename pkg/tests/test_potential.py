import math

import numpy as np
import pytest

from semiquant import (
    PhysicalScale,
    ShapeClassSpec,
    closed_form_delta1,
    from_shape_class,
    make_builtin,
    make_well,
)
from semiquant.errors import ConfigError, EscapeError

TANH_SPEC = ShapeClassSpec(A=math.sqrt(12.0), B=0.0, C=0.0, a0=1.0, a1=0.0, a2=-1.0)
HARMONIC_SPEC = ShapeClassSpec(A=1.0, B=0.0, C=0.0, a0=1.0, a1=0.0, a2=0.0)


def test_tanh2_catalog(tanh2_12):
    assert tanh2_12.value(0.0) == 0.0
    assert tanh2_12.derivative(0.0) == 0.0
    assert tanh2_12.asymptote == 12.0
    assert tanh2_12.value(40.0) == pytest.approx(12.0, abs=1e-12)
    assert tanh2_12.value(-40.0) == pytest.approx(12.0, abs=1e-12)


def test_harmonic_catalog(harmonic):
    assert harmonic.value(1.0) == 1.0
    assert harmonic.asymptote is None
    assert harmonic.domain_hint is None


def test_gauss_catalog(gauss_1):
    assert gauss_1.value(0.0) == 0.0
    assert gauss_1.asymptote == 1.0
    assert (gauss_1.x_min, gauss_1.v_min) == (0.0, 0.0)


@pytest.mark.parametrize("name,params", [
    ("harmonic", {}), ("quartic", {}), ("tanh2", {"U": 12.0}), ("gauss", {"U": 1.0, "w": 0.7}),
])
def test_minimum_is_global_on_samples(name, params):
    well = make_builtin(name, **params)
    x = np.linspace(-30, 30, 4001)
    assert float(well.value(well.x_min)) == well.v_min
    assert np.all(well.value(x) >= well.v_min)
    if well.asymptote is not None:
        assert np.all(well.value(x) <= well.asymptote)
        # bounded classical region below U
        below = x[well.value(x) < 0.999 * well.asymptote]
        assert below.min() > -30 and below.max() < 30


@pytest.mark.parametrize("name,params", [
    ("tanh2", {"U": 12.0}), ("gauss", {"U": 1.0, "w": 1.3}),
])
def test_depth_gap_matches_subtraction(name, params):
    well = make_builtin(name, **params)
    x = np.linspace(-3, 3, 61)
    assert np.allclose(well.depth_gap(x), well.asymptote - well.value(x), rtol=0, atol=1e-13)


@pytest.mark.parametrize("name,params", [
    ("harmonic", {}), ("quartic", {}), ("tanh2", {"U": 3.0}), ("gauss", {"U": 2.0, "w": 0.5}),
])
def test_catalog_derivative_against_finite_differences(name, params):
    well = make_builtin(name, **params)
    x = np.linspace(-2, 2, 41)
    h = 1e-5
    fd = (well.value(x + h) - well.value(x - h)) / (2 * h)
    assert np.allclose(well.derivative(x), fd, rtol=1e-7, atol=1e-7)


@pytest.mark.parametrize("name,params", [
    ("nope", {}), ("tanh2", {}), ("tanh2", {"U": -1.0}), ("gauss", {"U": 1.0, "w": 0.0}),
    ("harmonic", {"U": 1.0}),
])
def test_make_builtin_rejects_bad_input(name, params):
    with pytest.raises(ConfigError):
        make_builtin(name, **params)


def test_shape_class_reproduces_tanh2():
    well = from_shape_class(TANH_SPEC)
    x = np.linspace(-5, 5, 2001)
    assert np.max(np.abs(well.value(x) - 12.0 * np.tanh(x) ** 2)) < 1e-10
    assert well.asymptote == pytest.approx(12.0, rel=1e-14)
    assert well.x_min == pytest.approx(0.0, abs=1e-8)
    assert well.v_min == pytest.approx(0.0, abs=1e-12)
    assert 13.0 < well.domain_hint < 16.0


def test_shape_class_reproduces_harmonic():
    well = from_shape_class(HARMONIC_SPEC)
    x = np.linspace(-10, 10, 101)
    assert np.allclose(well.value(x), x * x, rtol=1e-12, atol=1e-12)
    assert well.asymptote is None
    with pytest.raises(EscapeError):
        well.value(100.0)


def test_shape_class_escape_is_reported():
    # s = tan(x) blows up at pi/2
    with pytest.raises(EscapeError):
        from_shape_class(ShapeClassSpec(A=1.0, B=0.0, C=0.0, a0=1.0, a1=0.0, a2=1.0))


@pytest.mark.parametrize("spec", [
    TANH_SPEC,
    ShapeClassSpec(A=1.5, B=0.3, C=-0.2, a0=1.0, a1=0.0, a2=-1.0),
    ShapeClassSpec(A=0.7, B=0.0, C=0.0, a0=1.0, a1=0.4, a2=0.0, s0=0.1),
])
def test_chain_rule_identity(spec):
    well = from_shape_class(spec, half_width=8.0)
    x = np.linspace(-3, 3, 100)
    h = 1e-5
    fd = (well.value(x + h) - well.value(x - h)) / (2 * h)
    dv = well.derivative(x)
    assert np.max(np.abs(dv - fd)) < 1e-7 * max(1.0, np.max(np.abs(dv)))


def test_chain_rule_on_closed_form_tanh(tanh2_12):
    x = np.linspace(-4, 4, 100)
    s = np.tanh(x)
    spec = tanh2_12.shape
    dv = tanh2_12.derivative(x)
    assert np.max(np.abs(dv - spec.slope_of(s))) < 1e-9 * np.max(np.abs(dv))


def test_closed_form_delta1_examples():
    assert closed_form_delta1(TANH_SPEC, PhysicalScale(1.0)) == pytest.approx(
        -1 / (8 * math.sqrt(12)), rel=1e-15)
    assert closed_form_delta1(TANH_SPEC, PhysicalScale(1.0)) == pytest.approx(-0.0360844, abs=1e-7)
    assert closed_form_delta1(HARMONIC_SPEC, PhysicalScale(1.0)) == 0.0
    spec = ShapeClassSpec(A=1.0, B=0.0, C=0.0, a0=1.0, a1=0.0, a2=-1.0)
    assert closed_form_delta1(spec, PhysicalScale(2.0)) == -0.25


def test_zero_A_is_rejected():
    with pytest.raises(ConfigError):
        ShapeClassSpec(A=0.0, B=0.0, C=0.0, a0=1.0, a1=0.0, a2=-1.0)


def _shifted(spec: ShapeClassSpec, c: float) -> ShapeClassSpec:
    """Same potential written through s' = s + c."""
    A2 = spec.A ** 2
    return ShapeClassSpec(
        A=spec.A, B=spec.B - 2 * A2 * c, C=A2 * c * c - spec.B * c + spec.C,
        a0=spec.a2 * c * c - spec.a1 * c + spec.a0, a1=spec.a1 - 2 * spec.a2 * c,
        a2=spec.a2, s0=spec.s0 + c,
    )


def test_transformation_invariance():
    scale = PhysicalScale(1.0)
    base = closed_form_delta1(TANH_SPEC, scale)
    moved = _shifted(TANH_SPEC, 0.37)
    offset = ShapeClassSpec(**{**TANH_SPEC.__dict__, "C": 5.0})
    assert closed_form_delta1(moved, scale) == base
    assert closed_form_delta1(offset, scale) == base
    # the shifted representation describes the same well
    w0, w1 = from_shape_class(TANH_SPEC), from_shape_class(moved)
    x = np.linspace(-4, 4, 81)
    assert np.allclose(w0.value(x), w1.value(x), atol=1e-10)


def test_make_well_shape_requires_all_coefficients():
    with pytest.raises(ConfigError):
        make_well("shape", {"A": 1.0})
    well = make_well("shape", {"A": 1.0, "B": 0, "C": 0, "a0": 1, "a1": 0, "a2": 0, "half_width": 10})
    assert well.value(2.0) == pytest.approx(4.0, rel=1e-12)
