"""Acceptance criteria, one test each; every test records a PASS/FAIL line."""

import math
import random
import time
from fractions import Fraction as F
from pathlib import Path

import numpy as np
import pytest

import osserman_lab
from osserman_lab.config import load_scenario
from osserman_lab.criteria import Outcome, evaluate, sharpness_witness
from osserman_lab.envelopes import Nonlinearity, ZeroProfile
from osserman_lab.estimates import growth_bound, invert_growth_log, symbolic_rate_info
from osserman_lab.powerlog import PowerLogTerm, tail_converges
from osserman_lab.quadrature import Verdict, classify_tail
from osserman_lab.radial import Status, shoot, verify_witness

from conftest import make_spec

FIXTURES = Path(osserman_lab.__file__).parent / "fixtures"
BAND = F(1, 20)


@pytest.fixture
def record(request):
    lines = request.config.stash.setdefault(ACCEPTANCE_KEY, [])

    def emit(number, ok, detail, seconds):
        line = f"{'PASS' if ok else 'FAIL'} criterion {number}: {detail} ({seconds:.2f}s)"
        lines.append(line)
        print(line)
        return ok

    return emit


ACCEPTANCE_KEY = pytest.StashKey[list]()


def test_criterion_1_sharp_boundary(record):
    t = time.perf_counter()
    ls = [F(-3), F(-2), F(-3, 2), F(-1), F(-1, 2), F(0), F(1)]
    got = {l: evaluate(make_spec(p=2, n=3, lam=2, k=0, l=l)).outcome for l in ls}
    wrong = [l for l, o in got.items() if (o is Outcome.TRIVIAL) != (l >= -1)]
    dt = time.perf_counter() - t
    ok = record(1, not wrong and dt < 5, f"Trivial exactly for l >= -1, mismatches {wrong}", dt)
    assert ok


def test_criterion_2_log_critical_boundaries(record):
    t = time.perf_counter()
    wrong = []
    for p in (F(3, 2), F(2), F(3)):
        k = F(0)
        for mu in (-3, -2, F(-3, 2), -1, F(-1, 2), 0, 1, 2):
            o = evaluate(make_spec(p=p, lam=p + 1, k=k, l=k - p + 1, mu=mu)).outcome
            if (o is Outcome.TRIVIAL) != (mu >= 1 - p):
                wrong.append(("mu", p, mu))
        for m in (-1, 0, 1, F(3, 2), 2, 3, 4):
            o = evaluate(make_spec(p=p, lam=p + 1, k=-1, m=m, l=-p)).outcome
            if (o is Outcome.TRIVIAL) != (m <= p - 1):
                wrong.append(("m", p, m))
    dt = time.perf_counter() - t
    ok = record(2, not wrong and dt < 1, f"mu >= 1-p and m <= p-1 boundaries, mismatches {wrong}", dt)
    assert ok


def _hand_rate(family, p, lam, k, l, mu, s):
    """Exponents (pow, logpow, loglogpow) of the rate read off the example formulas."""
    d = p - 1 - lam
    if family in ("lower", "lower-s", "upper"):
        return ((l - k + p - 1) / d, s / d, 0)
    return (0, (mu + p - 1) / d, 0)


def _draw_rate_case(rng):
    def fr(lo, hi, den=6):
        return F(rng.randint(math.ceil(lo * den), math.floor(hi * den)), den)

    family = rng.choice(["lower", "lower-log", "lower-s", "upper", "upper-log"])
    p = rng.choice([F(3, 2), F(2), F(3)])
    k = fr(-5 / 6, 2)
    crit = k - p + 1
    lam = fr(0, float(p - 1) - 1 / 6) if family.startswith("lower") else p - 1 + fr(1 / 6, 3)
    l, mu, s, g = crit, F(0), F(0), None
    if family in ("lower", "lower-s"):
        l = crit + fr(1 / 6, 3)
    elif family == "upper":
        l = crit - fr(1 / 6, 3)
    elif family == "lower-log":
        mu = 1 - p + fr(1 / 6, 3)
    else:
        mu = 1 - p - fr(1 / 6, 3)
    if family == "lower-s":
        s = max(fr(-1, 2), -lam)
        g = Nonlinearity.power_log(lam, s)
    spec = make_spec(p=p, lam=lam, k=k, l=l, mu=mu, g=g)
    return spec, _hand_rate(family, p, lam, k, l, mu, s)


def test_criterion_3_rate_formulas(record):
    t = time.perf_counter()
    rng = random.Random(20240)
    wrong = []
    for _ in range(20):
        spec, want = _draw_rate_case(rng)
        info = symbolic_rate_info(spec)
        if info.of_log or info.term.exponents != want:
            wrong.append((info.term.exponents, want))
    dt = time.perf_counter() - t
    ok = record(3, not wrong, f"20 random tuples against the formula table, mismatches {len(wrong)}", dt)
    assert ok


def test_criterion_4_exponential_rates(record):
    t = time.perf_counter()
    wrong, sides = [], set()
    for p in (F(3, 2), F(2), F(3)):
        for k in (F(-1, 2), F(0), F(1, 3), F(1)):
            for dl in (F(-1, 3), F(0), F(1, 4), F(1)):
                l = p * k + dl
                if l <= k - p + 1:
                    continue
                info = symbolic_rate_info(make_spec(p=p, lam=p - 1, k=k, l=l))
                want = (l - k + p - 1) / (p - 1) if l <= p * k else (l + p) / p
                sides.add(l <= p * k)
                if not (info.of_log and info.term.exponents == (want, 0, 0)):
                    wrong.append((p, k, l))
    dt = time.perf_counter() - t
    ok = record(4, not wrong and sides == {True, False}, f"log M rate on both sides of l = pk, mismatches {wrong}", dt)
    assert ok


AGREEMENT_SPECS = [
    dict(p=2, lam=0, k=0, l=1),
    dict(p=3, lam=1, k=0, l=1),
    dict(p=2, lam=F(1, 4), k=F(-1, 2), l=0),
    dict(p=2, lam=F(1, 2), k=-2, l=0),
    dict(p=2, lam=3, k=0, l=-2),
    dict(p=2, lam=2, k=0, l=-3),
    dict(p=3, lam=4, k=1, l=-2),
    dict(p=2, lam=1, k=0, l=0),
    dict(p=2, lam=1, k=0, l=1),
    dict(p=3, lam=2, k=0, l=1),
]


def test_criterion_5_numeric_symbolic_agreement(record):
    t = time.perf_counter()
    rs = np.geomspace(1e3, 1e6, 7)
    errs = []
    for kw in AGREEMENT_SPECS:
        spec = make_spec(**kw)
        info = symbolic_rate_info(spec)
        bound = growth_bound(spec, kind=info.kind)
        s = np.array([invert_growth_log(bound, r) for r in rs])
        # exponential rates are compared on log M
        y = np.log(s) if info.of_log else s
        slope = np.polyfit(np.log(rs), y, 1)[0]
        errs.append(abs(slope / float(info.term.pow) - 1))
    dt = time.perf_counter() - t
    worst = max(errs)
    ok = record(5, worst < 0.03 and dt < 30, f"10 specs, worst relative slope error {worst:.2e}", dt)
    assert ok


def test_criterion_6_witness_fixtures(record):
    t = time.perf_counter()
    results = {}
    for name in ("e2_1", "e2_2", "e2_3", "e2_4"):
        sc = load_scenario(FIXTURES / f"{name}.toml")
        w = sharpness_witness(sc.spec)
        ws, fx = sc.section("witness"), sc.section("fixture")
        good = verify_witness(w, sc.spec, ws["r_lo"], ws["r_hi"], samples=10_000)
        over = sc.spec.with_(q=sc.spec.q.scaled(10 * fx["alpha_max"] / fx["alpha"]))
        bad = verify_witness(w, over, ws["r_lo"], ws["r_hi"], samples=10_000)
        results[name] = good.passed and good.min_residual >= 0 and not bad.passed
    dt = time.perf_counter() - t
    ok = record(6, all(results.values()), f"fixtures pass and 10x alpha_max fails: {results}", dt)
    assert ok


def test_criterion_7_triviality_probe(record):
    t = time.perf_counter()
    spec = make_spec(p=2, n=3, lam=2, k=None, l=0)
    assert isinstance(spec.b, ZeroProfile)
    runs = [shoot(spec, u0, 1.0, 1e6) for u0 in (1e3, 1.0, 1e-3)]
    radii = [s.radius for s in runs]
    blowup = all(s.status is Status.BLOWUP and math.isfinite(s.radius) for s in runs)
    increasing = radii[0] < radii[1] < radii[2]

    sc = load_scenario(FIXTURES / "e2_1.toml")
    w = sharpness_witness(sc.spec)
    r0 = sc.spec.r0
    start = 2 * r0
    below = shoot(sc.spec, 0.5 * w.u(start), start, 1e6 * r0)
    global_ok = below.status is Status.GLOBAL and below.r[-1] == pytest.approx(1e6 * r0)
    dt = time.perf_counter() - t
    detail = f"blow-up radii {[round(r, 4) for r in radii]}, witness regime {below.status.value}"
    ok = record(7, blowup and increasing and global_ok and dt < 60, detail, dt)
    assert ok


def test_criterion_8_quadrature_oracle(record):
    t = time.perf_counter()
    rng = random.Random(8)
    wrong, undecided, n = [], [], 0
    while n < 50:
        pw = F(rng.randint(-36, 0), 12)
        if abs(pw + 1) < BAND:
            continue
        term = PowerLogTerm(1.0, pw, F(rng.randint(-12, 12), 4), F(rng.choice([0, 0, 0, -1, 1, 2, -2])))
        a = 16.0 if term.loglogpow else 3.0
        c = classify_tail(term, a)
        n += 1
        if c.verdict is Verdict.UNDECIDED:
            undecided.append(term.exponents)
        elif (c.verdict is Verdict.CONVERGENT) != tail_converges(term):
            wrong.append(term.exponents)
    dt = time.perf_counter() - t
    ok = record(8, not wrong and not undecided,
                f"50 terms outside the band, {len(wrong)} wrong, {len(undecided)} undecided", dt)
    assert ok


def test_criterion_9_inversion_consistency(record):
    t = time.perf_counter()
    rng = random.Random(9)
    bounds, worst, n = {}, 0.0, 0
    while n < 100:
        key = (rng.choice([F(3, 2), F(2), F(3)]), F(rng.randint(0, 24), 6),
               F(rng.randint(-6, 6), 6), F(rng.randint(-24, 12), 6))
        if key not in bounds:
            p, lam, k, l = key
            spec = make_spec(p=p, lam=lam, k=k, l=l)
            v = evaluate(spec)
            if v.outcome not in (Outcome.LOWER, Outcome.MIN, Outcome.UPPER):
                continue
            bounds[key] = growth_bound(spec, verdict=v, C=rng.choice([0.5, 1.0, 3.0]))
        b = bounds[key]
        r = math.exp(rng.uniform(math.log(10 * b.R_star), math.log(1e6)))
        s = invert_growth_log(b, r)
        if not math.isfinite(s):
            worst = math.inf
        else:
            worst = max(worst, abs(b.lhs_log(s) / b.target(r) - 1))
        n += 1
    dt = time.perf_counter() - t
    ok = record(9, worst <= 1e-8, f"100 draws, worst relative error {worst:.2e}", dt)
    assert ok
