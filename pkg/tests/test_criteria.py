from fractions import Fraction as F

import pytest
from hypothesis import given, settings, strategies as st

from osserman_lab.criteria import (
    THEOREM_TAGS,
    Outcome,
    corollary_route,
    evaluate,
    sharpness_witness,
    symbolic_integrands,
    witness_status,
)
from osserman_lab.envelopes import Nonlinearity, NumericProfile
from osserman_lab.errors import UnsupportedProfile
from osserman_lab.quadrature import Verdict as IV

from conftest import make_spec


# --- dispatch examples ---------------------------------------------------------


def test_zero_drift_constant_q_is_trivial():
    v = evaluate(make_spec(k=None, l=0, lam=2))
    assert v.outcome is Outcome.TRIVIAL
    assert v.applied == "Corollary 2.1"
    assert v.route == "power-b"
    assert v.premise("T2.1.1").classification.convergent
    assert v.premise("C2.1.1").classification.divergent


def test_subcritical_q_gives_upper():
    v = evaluate(make_spec(lam=2, k=0, l=-2))
    assert v.outcome is Outcome.UPPER
    assert v.applied == "Corollary 2.9"


def test_sublinear_g_gives_lower():
    v = evaluate(make_spec(lam=F(1, 2), k=0, l=0))
    assert v.outcome is Outcome.LOWER
    assert v.applied == "Corollary 2.7"
    assert v.also == ["Corollary 2.8"]
    assert v.notes and "min integrand" in v.notes[0]


def test_general_route_tags():
    b = NumericProfile(lambda r: 1.0)
    v = evaluate(make_spec(b=b, lam=2, l=0))
    assert v.mode == "numeric"
    assert v.route == "general"
    assert v.outcome is Outcome.TRIVIAL
    assert v.applied == "Theorem 2.1"


def test_powerlog_route_tags():
    v = evaluate(make_spec(k=-1, m=1, l=0, lam=2))
    assert v.route == "powerlog-b"
    assert v.outcome is Outcome.TRIVIAL
    assert v.applied == "Corollary 2.6"


def test_inconclusive_names_premise():
    # divergent KO integral with a finite potential integral: no result applies
    v = evaluate(make_spec(lam=F(1, 2), k=0, l=-3))
    assert v.outcome is Outcome.INCONCLUSIVE
    assert v.notes


def test_verdict_serialises():
    d = evaluate(make_spec()).to_dict()
    assert d["outcome"] == "Trivial"
    assert {p["id"] for p in d["premises"]} >= {"T2.1.1", "C2.5.1"}
    with pytest.raises(KeyError):
        evaluate(make_spec()).premise("nope")


def test_unknown_mode():
    with pytest.raises(ValueError):
        evaluate(make_spec(), mode="guess")
    with pytest.raises(UnsupportedProfile):
        evaluate(make_spec(q=NumericProfile(lambda r: 1.0)), mode="symbolic")


# --- routes --------------------------------------------------------------------


def test_route_k_minus_one():
    r = corollary_route(make_spec(k=-1, m=0))
    assert (r.route, r.family) == ("power-b", "k<=-1")
    assert r.reduction == "f_sigma >= gamma q_sigma"


def test_route_k_zero_rewrites_integrand():
    r = corollary_route(make_spec(k=0, l=F(-1, 2), p=3))
    assert (r.route, r.family) == ("power-b", "k>-1")
    # (r^-k q)^(1/(p-1)) with k = 0
    assert r.integrand.exponents == (F(-1, 4), 0, 0)


def test_route_log_drift():
    assert corollary_route(make_spec(k=-1, m=1)).route == "powerlog-b"
    assert corollary_route(make_spec(k=-1, m=-1)).route == "power-b"


def test_route_needs_symbolic_b():
    with pytest.raises(UnsupportedProfile):
        corollary_route(make_spec(b=NumericProfile(lambda r: 1.0)))


# --- witnesses -------------------------------------------------------------------


def test_power_witness_exponent():
    w = sharpness_witness(make_spec(lam=2, k=0, l=-2))
    assert (w.family, w.shape, w.exponent) == ("E2.1", "power", 1)


def test_log_witness_exponent():
    w = sharpness_witness(make_spec(lam=2, k=0, l=-1, mu=-2))
    assert (w.family, w.shape, w.exponent) == ("E2.2", "logpower", 1)


def test_exp_witness_exponent():
    w = sharpness_witness(make_spec(g=Nonlinearity.critical_log(3, 2), k=0, l=-2))
    assert (w.family, w.shape, w.exponent) == ("E2.3", "exppower", F(1, 2))


def test_log_drift_witness_exponent():
    w = sharpness_witness(make_spec(lam=2, k=-1, m=2, l=-2))
    assert (w.family, w.exponent) == ("E2.4", 1)


@pytest.mark.parametrize("kw", [
    dict(lam=2, k=0, l=-1),
    dict(lam=2, k=0, l=0),
    dict(lam=2, k=0, l=-1, mu=-1),
    dict(lam=2, k=-1, m=1, l=-2),
])
def test_no_witness_in_trivial_regime(kw):
    w, why = witness_status(make_spec(**kw))
    assert w is None and "trivial" in why


def test_no_witness_without_formula():
    w, why = witness_status(make_spec(lam=F(1, 2), k=0, l=-2))
    assert w is None and "no closed form" in why


# --- invariants ------------------------------------------------------------------

exps = st.fractions(-4, 2, max_denominator=4)


@settings(max_examples=150, deadline=None)
@given(
    st.sampled_from([F(3, 2), F(2), F(3)]),
    st.fractions(0, 5, max_denominator=4),
    st.fractions(-1, 1, max_denominator=4),
    exps,
    st.sampled_from([0, 1, 2, -1, -2, -3]),
    st.sampled_from([0, 1, 2, 3]),
    st.booleans(),
)
def test_sharpness_coherence(p, lam, k, l, mu, m, critlog):
    # on every family the witness rules out triviality
    if critlog:
        g = Nonlinearity.critical_log(lam + p, p)
        spec = make_spec(p=p, g=g, k=k, l=l)
    else:
        crit = k - p + 1
        spec = make_spec(p=p, lam=lam, k=k, l=crit if mu else l, mu=mu, m=0)
        if m:
            spec = make_spec(p=p, lam=lam, k=-1, m=m, l=-p)
    w = sharpness_witness(spec)
    v = evaluate(spec)
    if w is not None:
        assert v.outcome is not Outcome.TRIVIAL
    if v.outcome is Outcome.TRIVIAL:
        assert w is None


@settings(max_examples=100, deadline=None)
@given(st.sampled_from([F(3, 2), F(2), F(3)]), st.fractions(0, 5, max_denominator=6), exps, exps,
       st.sampled_from([0, 1, -1]), st.sampled_from([0, 1, 2, -2]))
def test_dispatch_soundness(p, lam, k, l, m, mu):
    v = evaluate(make_spec(p=p, lam=lam, k=k, l=l, m=m, mu=mu))
    assert v.applied in THEOREM_TAGS
    assert all(t in THEOREM_TAGS for t in v.also)
    if v.outcome is Outcome.TRIVIAL:
        ko = v.premises[0].classification
        pot = v.premises[1].classification
        assert ko.verdict is IV.CONVERGENT and pot.verdict is IV.DIVERGENT


@pytest.mark.parametrize("kw", [
    dict(lam=2, k=0, l=0),
    dict(lam=2, k=0, l=-3),
    dict(lam=F(1, 2), k=0, l=0),
    dict(lam=2, k=-2, l=0),
    dict(lam=3, k=None, l=-3),
    dict(lam=2, k=0, l=-1, mu=1),
    dict(lam=F(1, 3), k=F(-1, 2), l=1, p=3),
    dict(lam=4, k=1, l=F(-5, 2), p=3),
])
def test_numeric_route_agrees_with_corollaries(kw):
    # the corollary is a specialisation of the general theorem
    spec = make_spec(**kw)
    sym = evaluate(spec)
    num = evaluate(spec, mode="numeric")
    assert num.route == "general"
    assert num.outcome is sym.outcome


@pytest.mark.parametrize("kw", [
    dict(lam=2, k=-1, m=3, l=-2),
    dict(g=Nonlinearity.critical_log(4, 2), k=0, l=0),
])
def test_numeric_route_never_contradicts(kw):
    # near-critical cases may stay Inconclusive numerically, never disagree
    spec = make_spec(**kw)
    sym = evaluate(spec)
    num = evaluate(spec, mode="numeric")
    assert num.outcome in (sym.outcome, Outcome.INCONCLUSIVE)


def test_symbolic_integrands_shapes():
    ints = symbolic_integrands(make_spec(lam=2, k=0, l=0))
    assert ints.ko.exponents == (F(-3, 2), 0, 0)
    assert ints.potential.exponents == (0, 0, 0)
    assert ints.q_root.exponents == (0, 0, 0)
