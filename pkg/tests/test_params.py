import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from cknlab.errors import AdmissibilityError, DomainError
from cknlab.params import (GeneralizedPolynomial, OneMinusPower, PowerMinusLinear,
                           classify_regime, derive_parameters, eval_nonlinearity, hat_f,
                           nonlinearity_from_dict, phi_monotonicity)


def test_unweighted_parameters():
    p = derive_parameters(3, 0.0, 0.0)
    assert (p.a_c, p.q, p.n, p.alpha, p.alpha_fs, p.lambda_ef) == (0.5, 6.0, 3.0, 1.0, 1.0, 0.25)


def test_hand_derived_parameters():
    p = derive_parameters(3, 0.25, 0.3)
    assert p.q == pytest.approx(60 / 11, abs=1e-12)
    assert p.n == pytest.approx(60 / 19, abs=1e-12)
    assert p.alpha == pytest.approx(19 / 44, abs=1e-12)
    assert p.alpha_fs == pytest.approx(0.962719, abs=1e-6)
    assert p.lambda_ef == pytest.approx(0.0625, abs=1e-15)
    assert p.sqrt_lambda == pytest.approx(0.25, abs=1e-15)


@pytest.mark.parametrize("a,b,clause", [(0.6, 0.7, "a < a_c"), (0.3, 0.2, "a <= b"),
                                        (0.0, 1.0, "b < a+1")])
def test_inadmissible_reports_clause(a, b, clause):
    with pytest.raises(AdmissibilityError) as info:
        derive_parameters(3, a, b)
    assert info.value.clause == clause


def test_dimension_two_rejected():
    with pytest.raises(AdmissibilityError):
        derive_parameters(2, 0.0, 0.0)


def test_regime_examples():
    r = classify_regime(derive_parameters(3, 0.0, 0.0))
    assert r.fs_symmetric and not r.strong
    r = classify_regime(derive_parameters(3, 0.25, 0.3))
    assert r.strong_threshold == pytest.approx(math.sqrt(1 / (60 / 19 - 2)), abs=1e-12)
    assert r.strong and r.fs_symmetric
    p = derive_parameters(3, -10.0, -10.0)
    assert p.alpha == pytest.approx(21.0)
    r = classify_regime(p)
    assert not r.strong and not r.fs_symmetric


def test_eval_nonlinearity_examples():
    p = derive_parameters(3, 0.0, 0.0)
    vals = eval_nonlinearity(OneMinusPower(5.0), p, 1.0)
    assert vals.f == 0.0 and vals.phi == 0.0
    assert vals.phi_prime == pytest.approx(-5.0)
    spec = GeneralizedPolynomial(((2.0, 0.0), (-0.5, 1.7)))
    assert eval_nonlinearity(spec, p, 1.0).phi == pytest.approx(spec.f(1.0))
    crit = PowerMinusLinear(p.critical_exponent, 0.0)
    t = np.geomspace(0.1, 10, 7)
    vals = eval_nonlinearity(crit, p, t)
    np.testing.assert_allclose(vals.phi, 1.0)
    np.testing.assert_allclose(vals.phi_prime, 0.0, atol=1e-15)
    with pytest.raises(DomainError):
        eval_nonlinearity(crit, p, 0.0)


def test_phi_monotonicity_examples():
    p = derive_parameters(3, 0.0, 0.0)
    assert phi_monotonicity(OneMinusPower(5.0), p, (0.1, 10)).label() == "NonIncreasing"
    rep = phi_monotonicity(PowerMinusLinear(5.0, 1.0), p, (0.1, 10))
    assert rep.label() == "Violated" and 0.1 <= rep.violated_at <= 10
    assert phi_monotonicity(PowerMinusLinear(5.0, 0.0), p, (0.1, 10)).non_increasing
    with pytest.raises(DomainError):
        phi_monotonicity(OneMinusPower(5.0), p, (1.0, 0.5))


def test_hat_f_examples():
    p3 = derive_parameters(3, 0.0, 0.0)
    assert hat_f(GeneralizedPolynomial(((1.0, 0.0),)), p3, 4.0) == pytest.approx(16.0)
    p4 = derive_parameters(4, 0.0, 0.0)
    assert np.all(hat_f(GeneralizedPolynomial(((0.0, 0.0),)), p4, np.array([0.5, 2.0])) == 0)
    assert hat_f(OneMinusPower(5.0), p3, 1.0) == 0.0
    with pytest.raises(DomainError):
        hat_f(OneMinusPower(5.0), p3, -1.0)


def test_nonlinearity_roundtrip():
    for spec in (OneMinusPower(5.0), PowerMinusLinear(5.0, 2.0),
                 GeneralizedPolynomial(((-1.0, 0.0), (-1.0, 1.0)))):
        assert nonlinearity_from_dict(spec.as_dict()) == spec
    with pytest.raises(ValueError):
        nonlinearity_from_dict({"kind": "exp"})


@st.composite
def admissible(draw):
    d = draw(st.integers(3, 8))
    a_c = d / 2 - 1
    a = draw(st.floats(-5.0, a_c - 1e-3))
    b = draw(st.floats(a, a + 1 - 1e-6))
    return d, a, b


@given(admissible())
def test_parameter_invariants(dab):
    p = derive_parameters(*dab)
    r = classify_regime(p)
    assert p.n >= p.d * (1 - 1e-12)
    assert p.alpha > 0
    assert p.strong_threshold <= p.alpha_fs * (1 + 1e-12)
    assert not r.strong or r.fs_symmetric


@given(st.integers(3, 8), st.floats(-3.0, 0.49))
def test_equal_weights_keep_dimension(d, a):
    p = derive_parameters(d, a, a)
    assert p.n == d
    a_c = d / 2 - 1
    assert p.alpha == pytest.approx((a_c - a) / a_c, rel=1e-14)


def test_unweighted_alpha_exactly_one():
    for d in range(3, 9):
        assert derive_parameters(d, 0.0, 0.0).alpha == 1.0


@given(st.floats(1.1, 7.0), st.floats(-3.0, 3.0), st.floats(0.2, 5.0), admissible())
def test_phi_prime_matches_central_difference(pw, mu, t, dab):
    p = derive_parameters(*dab)
    spec = PowerMinusLinear(pw, mu)
    h = 1e-5
    vals = eval_nonlinearity(spec, p, t)
    fd = (eval_nonlinearity(spec, p, t + h).phi - eval_nonlinearity(spec, p, t - h).phi) / (2 * h)
    scale = max(abs(vals.phi_prime), abs(vals.phi) / t, 1e-300)
    assert abs(fd - vals.phi_prime) <= 1e-6 * scale


@given(st.floats(1.1, 7.0), st.floats(-3.0, 3.0), st.floats(0.2, 5.0))
def test_f_prime_second_order(pw, mu, t):
    spec = PowerMinusLinear(pw, mu)
    errs = []
    for h in (1e-2, 5e-3):
        fd = (spec.f(t + h) - spec.f(t - h)) / (2 * h)
        errs.append(abs(fd - spec.f_prime(t)))
    if errs[0] > 1e-9 * max(1.0, abs(spec.f_prime(t))):
        assert errs[0] / errs[1] == pytest.approx(4.0, rel=0.1)
