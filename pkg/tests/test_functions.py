import math

import numpy as np
import pytest

from gsp_lab import (
    CsvFormatError,
    Custom,
    DomainExceeded,
    NonPositiveInput,
    NonPositiveValue,
    PerturbedPowerLaw,
    PowerLaw,
    Tabulated,
    elasticity,
    eval_derivative,
    evaluate,
    load_tabulated_csv,
    validate,
)
from conftest import make_tabulated_power


def test_power_law_closed_forms():
    spec = PowerLaw(p=2.0, amp=3.0)
    assert evaluate(spec, 2.0) == 12.0
    assert eval_derivative(spec, 2.0) == 12.0
    ev = elasticity(spec, 2.0)
    assert ev.x == 2.0 and ev.value == 2.0


@pytest.mark.parametrize("p", [0.3, 1.0, 2.0, 5.0])
def test_power_law_elasticity_is_constant(p):
    spec = PowerLaw(p=p)
    x = np.geomspace(1e-3, 1e3, 41)
    assert np.allclose(spec.elasticity(x), p, rtol=0, atol=0)


def test_perturbed_matches_hand_formulas():
    p, eps, amp = 1.0, 0.1, 2.0
    spec = PerturbedPowerLaw(p=p, eps=eps, amp=amp)
    x = np.array([0.37, 1.0, 4.5])
    wob = 1.0 + eps * np.sin(np.log(x))
    assert np.allclose(spec.eval(x), amp * x**p * wob, rtol=1e-15)
    want_d = amp * x ** (p - 1.0) * (p * wob + eps * np.cos(np.log(x)))
    assert np.allclose(spec.derivative(x), want_d, rtol=1e-15)
    want_e = p + eps * np.cos(np.log(x)) / wob
    assert np.allclose(spec.elasticity(x), want_e, rtol=1e-15)


def test_scalar_in_scalar_out():
    spec = PowerLaw(p=1.5)
    assert isinstance(spec.eval(2.0), float)
    out = spec.eval(np.array([1.0, 2.0]))
    assert isinstance(out, np.ndarray) and out.shape == (2,)


@pytest.mark.parametrize("bad", [0.0, -1.0, math.inf, math.nan])
def test_non_positive_abscissa_rejected(bad):
    with pytest.raises(NonPositiveInput):
        PowerLaw(p=1.0).eval(bad)


def test_negative_custom_value_rejected():
    spec = Custom(lambda x: x - 0.5, lambda x: 1.0, vectorized=True)
    with pytest.raises(NonPositiveValue):
        spec.eval(0.25)


def test_custom_elasticity_quotient():
    spec = Custom(lambda x: x**2 + x**3, lambda x: 2 * x + 3 * x**2,
                  vectorized=True)
    x = 0.8
    want = x * (2 * x + 3 * x**2) / (x**2 + x**3)
    assert abs(spec.elasticity(x) - want) < 1e-15


def test_custom_scalar_callables_are_wrapped():
    spec = Custom(lambda x: x**2, lambda x: 2 * x)  # not vectorized
    out = spec.eval(np.array([1.0, 3.0]))
    assert np.allclose(out, [1.0, 9.0])


# ------------------------------------------------------------- tabulated

def test_tabulated_reproduces_power_law_between_knots():
    spec = make_tabulated_power(amp=4.0, p=1.5)
    x = np.geomspace(2e-4, 9e1, 57)  # deliberately off-knot
    assert np.allclose(spec.eval(x), 4.0 * x**1.5, rtol=1e-12)
    assert np.allclose(spec.derivative(x), 6.0 * x**0.5, rtol=1e-12)
    assert np.allclose(spec.elasticity(x), 1.5, atol=1e-12)


def test_tabulated_hull_is_hard_boundary():
    spec = make_tabulated_power(lo=0.01, hi=10.0, n=50)
    with pytest.raises(DomainExceeded):
        spec.eval(0.005)
    with pytest.raises(DomainExceeded):
        spec.eval(10.5)
    # endpoints themselves are fair game
    spec.eval(0.01), spec.eval(10.0)


def test_tabulated_structural_checks():
    with pytest.raises(NonPositiveInput):
        Tabulated([1.0, 1.0, 2.0], [1.0, 2.0, 3.0])  # not increasing
    with pytest.raises(NonPositiveValue):
        Tabulated([1.0, 2.0], [1.0, -2.0])
    with pytest.raises(NonPositiveInput):
        Tabulated([1.0], [1.0])


# ------------------------------------------------------------- validation

def test_validate_accepts_gallery_members():
    for spec in (PowerLaw(p=2.0), PerturbedPowerLaw(p=1.0, eps=0.1),
                 make_tabulated_power()):
        report = validate(spec)
        assert report.ok, report


def test_validate_flags_non_decaying_exponent():
    report = validate(PowerLaw(p=-0.5))
    assert not report.ok
    assert report.failed == "f(0+)=0"


def test_validate_flags_oversized_wobble():
    report = validate(PerturbedPowerLaw(p=1.0, eps=1.2))
    assert not report.ok
    assert report.failed == "positivity"


def test_validate_flags_negative_amplitude():
    report = validate(PowerLaw(p=1.0, amp=-3.0))
    assert not report.ok
    assert report.failed == "positivity"


def test_validate_flags_nonzero_limit_at_origin():
    spec = Custom(lambda x: 1.0 + x, lambda x: 1.0, vectorized=False)
    report = validate(spec)
    assert not report.ok
    assert report.failed == "f(0+)=0"


# ------------------------------------------------------------- CSV loader

def test_csv_round_trip(x15_csv):
    spec = load_tabulated_csv(x15_csv)
    assert spec.support == (1e-4, 1e2)
    assert abs(spec.eval(1.0) - 4.0) < 1e-12


def test_csv_reports_offending_line(tmp_path):
    bad = tmp_path / "bad.csv"
    bad.write_text("x,f\n1.0,2.0\n1.5,oops\n")
    with pytest.raises(CsvFormatError) as info:
        load_tabulated_csv(bad)
    assert info.value.line == 3

    bad.write_text("x,f\n1.0,2.0\n0.5,1.0\n")
    with pytest.raises(CsvFormatError) as info:
        load_tabulated_csv(bad)
    assert info.value.line == 3

    bad.write_text("x,f\n1.0,2.0,3.0\n")
    with pytest.raises(CsvFormatError) as info:
        load_tabulated_csv(bad)
    assert info.value.line == 2

    bad.write_text("1.0,2.0\n2.0,3.0\n")
    with pytest.raises(CsvFormatError) as info:
        load_tabulated_csv(bad)
    assert info.value.line == 1
