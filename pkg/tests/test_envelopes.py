import math
from fractions import Fraction as F

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from osserman_lab.envelopes import (
    Nonlinearity,
    NumericProfile,
    ProblemSpec,
    SymbolicProfile,
    TableProfile,
    ZeroProfile,
    f_sigma,
    g_theta,
    q_sigma,
    symbolic_envelopes,
)
from osserman_lab.errors import ProfileDomainError, UnsupportedProfile
from osserman_lab.powerlog import PowerLogTerm

from conftest import make_spec


def brute_inf(func, lo, hi, n=10_000):
    xs = np.geomspace(lo, hi, n)
    return min(float(func(x)) for x in xs)


def brute_sup(func, lo, hi, n=10_000):
    xs = np.geomspace(lo, hi, n)
    return max(abs(float(func(x))) for x in xs)


def numeric(func, **kw):
    return NumericProfile(func, **kw)


# --- examples -----------------------------------------------------------------


@pytest.mark.parametrize("sigma", [1.5, 2.0, 7.0])
def test_constant_profiles_give_one(sigma):
    spec = make_spec(k=None, l=0, sigma=sigma)
    for r in (2.0, 30.0, 1e4):
        assert f_sigma(spec, r) == 1.0
        assert q_sigma(spec, r) == 1.0


def test_q_constant_five():
    spec = make_spec(q=SymbolicProfile.power_log(5.0, 0))
    assert q_sigma(spec, 12.0) == pytest.approx(5.0, rel=1e-14)


@pytest.mark.parametrize("r", [1.5, 10.0, 250.0])
def test_inverse_square_inf_at_outer_edge(r):
    q = numeric(lambda x: x**-2)
    spec = make_spec(k=None, q=q, sigma=2.0)
    oracle = brute_inf(q.func, r / 2, 2 * r)
    assert f_sigma(spec, r) == pytest.approx(r**-2 / 4, rel=1e-10)
    assert f_sigma(spec, r) == pytest.approx(oracle, rel=1e-10)
    # the symbolic path evaluates the same endpoint
    assert f_sigma(make_spec(k=None, l=-2), r) == pytest.approx(r**-2 / 4, rel=1e-14)


@pytest.mark.parametrize("l", [F(1, 2), 1, 3])
def test_positive_power_inf_at_inner_edge(l):
    q = numeric(lambda x: x ** float(l))
    spec = make_spec(k=None, q=q)
    for r in (3.0, 40.0):
        want = (r / 2) ** float(l)
        assert q_sigma(spec, r) == pytest.approx(want, rel=1e-10)
        assert q_sigma(spec, r) == pytest.approx(brute_inf(q.func, r / 2, 2 * r), rel=1e-10)
        assert q_sigma(make_spec(k=None, l=l), r) == pytest.approx(want, rel=1e-14)


def test_inverse_power_sigma_three():
    q = numeric(lambda x: 1 / x)
    spec = make_spec(k=None, q=q, sigma=3.0)
    r = 5.0
    assert q_sigma(spec, r) == pytest.approx(1 / (3 * r), rel=1e-10)
    assert q_sigma(spec, r) == pytest.approx(brute_inf(q.func, r / 3, 3 * r), rel=1e-10)


def test_g_theta_monotone_power():
    spec = make_spec(lam=F(5, 2))
    for t in (0.1, 1.0, 17.0):
        assert g_theta(spec, t) == pytest.approx((t / 2) ** 2.5, rel=1e-14)


def test_g_theta_constant():
    assert g_theta(make_spec(lam=0), 3.0) == 1.0


def test_g_theta_powerlog_brute():
    spec = make_spec(g=Nonlinearity.power_log(2, 1))
    t = 4.0
    want = brute_inf(lambda x: x**2 * math.log1p(x), t / 2, 2 * t)
    assert want == pytest.approx(4 * math.log(3), rel=1e-12)
    assert g_theta(spec, t) == pytest.approx(4 * math.log(3), rel=1e-12)
    # a numeric copy goes through the sampled minimiser
    num = make_spec(g=Nonlinearity.numeric(lambda x: x**2 * math.log1p(x)))
    assert g_theta(num, t) == pytest.approx(4 * math.log(3), rel=1e-10)


def test_g_theta_non_monotone_numeric():
    # minimum of (t - 3)^2 + 1 on (1, 4) is 1 at t = 3
    spec = make_spec(g=Nonlinearity.numeric(lambda x: (x - 3) ** 2 + 1))
    assert g_theta(spec, 2.0) == pytest.approx(1.0, abs=1e-9)
    with pytest.raises(ValueError):
        g_theta(spec, 0.0)


def test_drift_denominator_against_brute_force():
    b = numeric(lambda x: 2 + math.sin(x))
    q = numeric(lambda x: 1 + 1 / x)
    spec = make_spec(b=b, q=q, sigma=2.0)
    r = 9.0
    want = brute_inf(q.func, r / 2, 2 * r) / (1 + r * brute_sup(b.func, r / 2, 2 * r))
    assert f_sigma(spec, r) == pytest.approx(want, rel=1e-6)


def test_log_profile_domain_error():
    spec = make_spec(k=-1, m=1)
    with pytest.raises(ProfileDomainError):
        f_sigma(spec, 1.5)
    assert f_sigma(spec, 3.0) > 0


def test_numeric_domain_error():
    spec = make_spec(q=numeric(lambda x: x, r_min=4.0))
    with pytest.raises(ProfileDomainError):
        q_sigma(spec, 5.0)
    assert q_sigma(spec, 8.0) == pytest.approx(4.0)


def test_table_profile_interpolates(tmp_path):
    path = tmp_path / "q.csv"
    path.write_text("r,q\n1,1\n10,0.1\n100,0.01\n")
    prof = TableProfile.from_csv(path)
    assert prof(10.0) == pytest.approx(0.1)
    assert prof(math.sqrt(10)) == pytest.approx(0.55)
    with pytest.raises(ValueError):
        TableProfile([1.0], [2.0])


# --- symbolic envelopes -----------------------------------------------------------


def test_symbolic_shape_bounded_growing_drift():
    env = symbolic_envelopes(make_spec(k=0, l=0))
    assert env.f.exponents == (-1, 0, 0)
    assert env.drift == "growing"


def test_symbolic_shape_decaying_drift():
    env = symbolic_envelopes(make_spec(k=-2, l=F(1, 3)))
    assert env.f.exponents == (F(1, 3), 0, 0)
    assert env.drift == "bounded"


def test_symbolic_shape_log_drift():
    env = symbolic_envelopes(make_spec(k=-1, m=2, l=-2))
    assert env.f.exponents == (-2, -2, 0)


def test_symbolic_power_b_reduction():
    # f ~ r^(l-k-1) for q ~ r^l and b ~ r^k with k > -1
    env = symbolic_envelopes(make_spec(k=F(1, 2), l=-1))
    assert env.f.exponents == (F(-5, 2), 0, 0)


def test_symbolic_needs_symbolic_profiles():
    with pytest.raises(UnsupportedProfile):
        symbolic_envelopes(make_spec(q=numeric(lambda x: 1.0)))


spec_params = st.tuples(
    st.fractions(-3, 2, max_denominator=4),
    st.fractions(-3, 2, max_denominator=4),
    st.sampled_from([0, 1, -1, 2]),
    st.sampled_from([1.5, 2.0, 3.0]),
)


@settings(max_examples=40, deadline=None)
@given(spec_params, st.floats(0, 6))
def test_sandwich_holds(params, logr_offset):
    k, l, m, sigma = params
    spec = make_spec(k=k, l=l, m=m, sigma=sigma)
    env = symbolic_envelopes(spec)
    r = env.valid_from * math.exp(logr_offset)
    f = f_sigma(spec, r)
    shape = env.f(r)
    assert env.f_lo * shape <= f * (1 + 1e-12)
    assert f <= env.f_hi * shape * (1 + 1e-12)
    qs = q_sigma(spec, r)
    assert env.q_lo * env.q(r) <= qs * (1 + 1e-12) <= env.q_hi * env.q(r) * (1 + 1e-12) ** 2


# --- invariants ---------------------------------------------------------------


@settings(max_examples=40, deadline=None)
@given(spec_params, st.floats(1, 8))
def test_f_below_q(params, logr):
    k, l, m, sigma = params
    spec = make_spec(k=k, l=l, m=m, sigma=sigma)
    r = 3 * math.exp(logr)
    assert f_sigma(spec, r) <= q_sigma(spec, r)


@settings(max_examples=40, deadline=None)
@given(spec_params, st.floats(1, 8), st.floats(1.01, 3))
def test_sigma_monotone(params, logr, factor):
    k, l, m, sigma = params
    r = 9 * math.exp(logr)
    small = make_spec(k=k, l=l, m=m, sigma=sigma)
    large = small.with_(sigma=sigma * factor)
    assert f_sigma(large, r) <= f_sigma(small, r) * (1 + 1e-12)


@settings(max_examples=30, deadline=None)
@given(st.fractions(0, 4, max_denominator=4), st.fractions(-2, 2, max_denominator=4), st.floats(0.01, 1e4))
def test_g_theta_below_g(lam, s, t):
    if lam + s < 0:
        return
    spec = make_spec(g=Nonlinearity.power_log(lam, s))
    assert g_theta(spec, t) <= spec.g(t) * (1 + 1e-12)


def test_sigma_monotone_numeric():
    b = numeric(lambda x: 1 + 0.5 * math.cos(x))
    q = numeric(lambda x: 2 + math.sin(3 * x))
    base = make_spec(b=b, q=q)
    for r in (3.0, 11.0, 40.0):
        vals = [f_sigma(base.with_(sigma=s), r) for s in (1.2, 1.5, 2.0, 3.0)]
        assert all(a >= c * (1 - 1e-9) for a, c in zip(vals, vals[1:]))


def test_spec_validation():
    with pytest.raises(ValueError):
        make_spec(p=1)
    with pytest.raises(ValueError):
        make_spec(sigma=1.0)
    with pytest.raises(ValueError):
        make_spec(n=1)
    with pytest.raises(ValueError):
        Nonlinearity.power(-1)
    assert ZeroProfile().annulus_sup_abs(3.0, 2.0) == 0.0
    assert isinstance(PowerLogTerm(), PowerLogTerm)
    with pytest.raises(ValueError):
        ProblemSpec(F(2), 3, ZeroProfile(), SymbolicProfile.power_log(1, 0, sign=-1), Nonlinearity.power(2))
