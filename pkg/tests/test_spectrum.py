import math

import pytest
from hypothesis import given, strategies as st

from lipwidth.errors import BadParams, BadWeight, NonMonotone, OutOfRange
from lipwidth.spectrum import (
    Algebraic,
    AtLeast,
    DoubleExponential,
    Explicit,
    Exponential,
    L2Verdict,
    effective_dimension,
    make_spectrum,
    spectrum_from_dict,
    validate_assumption,
    weighted_eigenvalue,
)


def test_algebraic_values():
    s = make_spectrum(Algebraic(2), "ones", 10)
    assert weighted_eigenvalue(s, 3) == pytest.approx(1 / 9, rel=1e-15)
    assert s.inverse_weighted(3) == 9.0


def test_exponential_and_double_exponential():
    assert weighted_eigenvalue(make_spectrum(Exponential(1, 1)), 2) == pytest.approx(math.exp(-2), rel=1e-15)
    assert weighted_eigenvalue(make_spectrum(DoubleExponential(1)), 1) == pytest.approx(math.exp(-math.e), rel=1e-15)


def test_double_exponential_underflow_is_safe():
    s = make_spectrum(DoubleExponential(1))
    assert s.weighted(8) == 0.0
    assert s.inverse_weighted(8) == math.inf
    assert s.log_weighted(8) == pytest.approx(-math.exp(8))


def test_sqrt_lambda_gives_constant():
    s = make_spectrum(Algebraic(1), "sqrt-lambda")
    assert weighted_eigenvalue(s, 5) == 1.0
    assert s.weighted_is_constant


def test_explicit_constant_valid_and_increasing_rejected():
    make_spectrum(Explicit((1, 1, 1)), "ones", 3)
    with pytest.raises(NonMonotone):
        make_spectrum(Explicit((1, 2)), "ones", 2)


def test_bad_inputs():
    with pytest.raises(BadParams):
        make_spectrum(Algebraic(0))
    with pytest.raises(BadParams):
        make_spectrum(Explicit((1, -1)), "ones", 2)
    with pytest.raises(BadWeight):
        make_spectrum(Algebraic(2), (1.0, 1.5), 2)
    with pytest.raises(BadParams):
        make_spectrum(Algebraic(2), "ones", 0)


def test_explicit_out_of_range():
    s = make_spectrum(Explicit((1, 0.5)), "ones", 2)
    with pytest.raises(OutOfRange):
        weighted_eigenvalue(s, 3)


def test_explicit_b_changes_weighted_values():
    s = make_spectrum(Algebraic(2), (1.0, 0.5), 2)
    assert s.weighted(2) == pytest.approx(1.0)
    assert s.max_index == 2


def test_validation_verdicts():
    s = make_spectrum(Algebraic(2))
    r = validate_assumption(s)
    assert r.ok and r.b_l2_ok is L2Verdict.HOLDS_VACUOUSLY
    assert validate_assumption(s, codomain_infinite=True).b_l2_ok is L2Verdict.FAILS
    s2 = make_spectrum(Algebraic(2), "sqrt-lambda")
    assert validate_assumption(s2, codomain_infinite=True).b_l2_ok is L2Verdict.HOLDS
    s3 = make_spectrum(Algebraic(1), "sqrt-lambda")
    assert validate_assumption(s3, codomain_infinite=True).b_l2_ok is L2Verdict.FAILS
    s4 = make_spectrum(Explicit((1, 0.5)), "sqrt-lambda", 2)
    assert validate_assumption(s4, codomain_infinite=True).b_l2_ok is L2Verdict.UNKNOWN


def test_validation_never_raises_on_unchecked_spectrum():
    bad = spectrum_from_dict({"family": "explicit", "params": {"values": [1, 2]}}, check=False)
    r = validate_assumption(bad)
    assert not r.ok and not r.nonincreasing_ok and r.messages


def test_effective_dimension_examples():
    assert effective_dimension(make_spectrum(Algebraic(2)), 0.4) == 2
    assert effective_dimension(make_spectrum(Algebraic(1), "sqrt-lambda"), 0.5) == math.inf
    d = effective_dimension(make_spectrum(Explicit((1, 1, 1)), "ones", 3), 0.5)
    assert isinstance(d, AtLeast) and int(d) == 3
    # any coordinate-1 value: lam_b_2 < eps^2 gives d = 1
    assert effective_dimension(make_spectrum(Exponential(1, 1)), 2.0) == 1


@given(st.floats(0.05, 0.99))
def test_effective_dimension_algebraic_floor(eps):
    alpha = 2.0
    x = eps ** (-2 / alpha)
    if abs(x - round(x)) > 1e-9:
        assert effective_dimension(make_spectrum(Algebraic(alpha)), eps) == math.floor(x)


@given(st.floats(0.05, 1.0), st.floats(0.05, 1.0))
def test_effective_dimension_monotone_in_eps(e1, e2):
    s = make_spectrum(Exponential(1, 1))
    lo, hi = sorted((e1, e2))
    assert effective_dimension(s, lo) >= effective_dimension(s, hi)


def test_weighted_nonincreasing_within_cap():
    for fam in (Algebraic(1.5), Exponential(0.5, 2), DoubleExponential(0.3)):
        s = make_spectrum(fam, "ones", 50)
        t = s.weighted_table()
        assert all(a >= b for a, b in zip(t, t[1:]))


def test_dict_round_trip():
    for s in (make_spectrum(Exponential(1, 2), "sqrt-lambda", 4), make_spectrum(Explicit((1, 0.5, 0.2)), (1, 1, 0.9), 3)):
        assert spectrum_from_dict(s.to_dict()) == s
