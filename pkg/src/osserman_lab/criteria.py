"""Dispatch of the triviality and growth-estimate criteria.

Three improper integrals drive every decision:

* the Keller-Osserman integral of ``(g_theta(t) t)^(-1/p)`` over ``[1, inf)``;
* the potential integral of ``(r f_sigma(r))^(1/(p-1))`` over ``[r0, inf)``;
* the min integral of ``min{(r f_sigma)^(1/(p-1)), q_sigma^(1/p)}``.

On symbolic specs they are decided exactly from power-log exponents; otherwise
they are classified numerically and may come back Undecided.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import Optional

from .envelopes import (
    ProblemSpec,
    SymbolicProfile,
    ZeroProfile,
    f_sigma,
    q_sigma,
    symbolic_envelopes,
)
from .errors import UnsupportedProfile
from .powerlog import (
    PowerLogTerm,
    compare,
    format_term,
    min_asym,
    mul,
    power,
    tail_converges,
)
from .quadrature import (
    DEFAULT_GUARD,
    DEFAULT_MAX_WINDOWS,
    DEFAULT_TOL,
    IntegralClassification,
    Verdict as IntegralVerdict,
    classify_growth_integral,
    classify_tail,
)
from .radial import ClosedFormSolution

R_TERM = PowerLogTerm(1.0, 1)


class Outcome(str, Enum):
    TRIVIAL = "Trivial"
    LOWER = "LowerEstimate"
    MIN = "MinEstimate"
    UPPER = "UpperEstimate"
    INCONCLUSIVE = "Inconclusive"


# applied tag per (route, drift family) and outcome
_TAGS = {
    ("general", None): ("Theorem 2.1", "Theorem 2.2", "Theorem 2.3", "Theorem 2.4"),
    ("power-b", "k<=-1"): ("Corollary 2.1", "Corollary 2.2", "Corollary 2.3", "Corollary 2.4"),
    ("power-b", "k>-1"): ("Corollary 2.5", "Corollary 2.7", "Corollary 2.8", "Corollary 2.9"),
    ("powerlog-b", None): ("Corollary 2.6", "Theorem 2.2", "Theorem 2.3", "Theorem 2.4"),
}
_OUTCOME_INDEX = {Outcome.TRIVIAL: 0, Outcome.LOWER: 1, Outcome.MIN: 2, Outcome.UPPER: 3}

# condition ids for the potential and min integrals per route
_POTENTIAL_ID = {
    ("general", None): ("T2.1.2", "T2.3.1"),
    ("power-b", "k<=-1"): ("C2.1.1", "C2.3.1"),
    ("power-b", "k>-1"): ("C2.5.1", "C2.8.1"),
    ("powerlog-b", None): ("C2.6.1", "T2.3.1"),
}

THEOREM_TAGS = frozenset(t for tags in _TAGS.values() for t in tags)


@dataclass(frozen=True)
class Route:
    """Which family of results applies, and how ``f_sigma`` is reduced.

    ``integrand`` is the rewritten potential integrand (a power-log term in
    ``r``) when ``q`` is symbolic, else ``None``.
    """

    route: str
    family: Optional[str]
    reduction: str
    integrand: Optional[PowerLogTerm] = None

    @property
    def key(self):
        return (self.route, self.family)

    @property
    def condition(self) -> str:
        return _POTENTIAL_ID[self.key][0]

    def tag(self, outcome: Outcome) -> str:
        return _TAGS[self.key][_OUTCOME_INDEX[outcome]]


GENERAL = Route("general", None, "f_sigma used directly")


def corollary_route(spec: ProblemSpec) -> Route:
    """Select the reduction of ``f_sigma`` dictated by the growth of ``b``.

    ``|b| <~ r^-1`` gives ``f >= c q_sigma``; ``|b| ~ r^k`` with ``k > -1``
    gives ``f >= c r^(-k-1) q_sigma``; ``|b| ~ r^k log^m r`` with ``k > -1``,
    or ``k = -1, m > 0``, gives ``f >= c r^(-k-1) log^(-m) r q_sigma``.
    """
    b = spec.b
    if not b.symbolic:
        raise UnsupportedProfile("corollary routes need a symbolic b profile")
    qterm = spec.q.term if isinstance(spec.q, SymbolicProfile) else None
    p1 = 1 / (spec.p - 1)

    def rewritten(extra: PowerLogTerm) -> Optional[PowerLogTerm]:
        if qterm is None:
            return None
        return power(mul(extra, qterm), p1)

    if isinstance(b, ZeroProfile) or compare(b.term.with_coeff(1.0), PowerLogTerm(1.0, -1)) <= 0:
        return Route("power-b", "k<=-1", "f_sigma >= gamma q_sigma", rewritten(R_TERM))
    k, m, d = b.term.exponents
    if d != 0:
        return GENERAL
    if m == 0 and k > -1:
        return Route("power-b", "k>-1", "f_sigma >= gamma r^(-k-1) q_sigma", rewritten(PowerLogTerm(1.0, -k)))
    if k > -1 or (k == -1 and m > 0):
        return Route(
            "powerlog-b", None, "f_sigma >= gamma r^(-k-1) log^(-m) r q_sigma",
            rewritten(PowerLogTerm(1.0, -k, -m)),
        )
    return GENERAL


@dataclass
class Premise:
    id: str
    description: str
    classification: IntegralClassification

    def to_dict(self) -> dict:
        return {"id": self.id, "description": self.description, **self.classification.to_dict()}


@dataclass
class Verdict:
    """Result of theorem dispatch for one problem."""

    outcome: Outcome
    applied: str
    premises: list
    route: str
    also: list = field(default_factory=list)
    notes: list = field(default_factory=list)
    mode: str = "symbolic"

    def premise(self, pid: str) -> Premise:
        for pr in self.premises:
            if pr.id == pid:
                return pr
        raise KeyError(pid)

    def to_dict(self) -> dict:
        return {
            "outcome": self.outcome.value,
            "applied": self.applied,
            "also": list(self.also),
            "route": self.route,
            "mode": self.mode,
            "premises": [p.to_dict() for p in self.premises],
            "notes": list(self.notes),
        }


# ---------------------------------------------------------------------------
# integrands


def ko_term(spec: ProblemSpec) -> PowerLogTerm:
    """Power-log shape of ``(g_theta(t) t)^(-1/p)`` as ``t -> inf``."""
    g = spec.g.asymptotic_term()
    g = g.with_coeff(spec.theta ** -float(spec.g.lam))
    return power(mul(g, R_TERM), -1 / spec.p)


@dataclass(frozen=True)
class SymbolicIntegrands:
    ko: PowerLogTerm
    potential: PowerLogTerm
    q_root: PowerLogTerm
    min: PowerLogTerm
    valid_from: float


def symbolic_integrands(spec: ProblemSpec) -> SymbolicIntegrands:
    """Exact shapes of the three integrands (lower sandwich constants folded in)."""
    if not spec.symbolic:
        raise UnsupportedProfile("symbolic integrands need symbolic b, q and g")
    env = symbolic_envelopes(spec)
    f_low = env.f.with_coeff(env.f.coeff * env.f_lo)
    pot = power(mul(R_TERM, f_low), 1 / (spec.p - 1))
    qr = power(env.q.with_coeff(env.q.coeff * env.q_lo), 1 / spec.p)
    return SymbolicIntegrands(ko_term(spec), pot, qr, min_asym(pot, qr), env.valid_from)


def potential_start(spec: ProblemSpec) -> float:
    lo = spec.r0
    for prof in (spec.b, spec.q):
        lo = max(lo, getattr(prof, "r_min", 0.0) * spec.sigma)
    return lo * (1 + 1e-9)


def potential_integrand(spec: ProblemSpec):
    inv = 1.0 / float(spec.p - 1)

    def h(r):
        return (r * f_sigma(spec, r)) ** inv

    return h


def min_integrand(spec: ProblemSpec):
    inv = 1.0 / float(spec.p - 1)
    inv_p = 1.0 / float(spec.p)

    def h(r):
        return min((r * f_sigma(spec, r)) ** inv, q_sigma(spec, r) ** inv_p)

    return h


def _symbolic_class(term: PowerLogTerm) -> IntegralClassification:
    v = IntegralVerdict.CONVERGENT if tail_converges(term) else IntegralVerdict.DIVERGENT
    return IntegralClassification(v, rate=term, source="symbolic", note=f"integrand ~ {format_term(term)}")


# ---------------------------------------------------------------------------
# dispatch


def evaluate(
    spec: ProblemSpec,
    mode: str = "auto",
    tol: float = DEFAULT_TOL,
    max_windows: int = DEFAULT_MAX_WINDOWS,
    guard: float = DEFAULT_GUARD,
) -> Verdict:
    """Decide which result applies to ``spec``.

    ``mode`` is ``"symbolic"``, ``"numeric"`` or ``"auto"`` (symbolic when
    every profile allows it).  The numeric mode always runs on the general
    route, i.e. with ``f_sigma`` itself.
    """
    if mode == "auto":
        mode = "symbolic" if spec.symbolic else "numeric"
    if mode == "symbolic":
        if not spec.symbolic:
            raise UnsupportedProfile("symbolic evaluation needs symbolic b, q and g")
        route = corollary_route(spec)
        ints = symbolic_integrands(spec)
        ko = _symbolic_class(ints.ko)
        pot = _symbolic_class(ints.potential)
        mn = _symbolic_class(ints.min)
        notes = []
        if ko.divergent and pot.divergent and mn.divergent:
            which = "q_sigma^(1/p)" if compare(ints.q_root, ints.potential) < 0 else "(r f_sigma)^(1/(p-1))"
            notes.append(f"min integrand is eventually {which}")
    elif mode == "numeric":
        route = GENERAL
        opts = dict(tol=tol, max_windows=max_windows, guard=guard)
        ko = classify_growth_integral(spec, "KO", **opts)
        a = potential_start(spec)
        pot = classify_tail(potential_integrand(spec), a, **opts)
        mn = classify_tail(min_integrand(spec), a, **opts) if not ko.convergent else None
        notes = []
    else:
        raise ValueError(f"unknown mode {mode!r}")
    return _decide(route, ko, pot, mn, notes, mode)


def _decide(route: Route, ko, pot, mn, notes, mode) -> Verdict:
    pot_id, min_id = _POTENTIAL_ID[route.key]
    ko_id = "T2.2.1" if ko.divergent else "T2.1.1"
    ko_p = Premise(ko_id, "integral of (g_theta(t) t)^(-1/p) over [1, inf)", ko)
    pot_p = Premise(pot_id, "integral of (r f_sigma(r))^(1/(p-1)) over [r0, inf)", pot)
    premises = [ko_p, pot_p]
    min_p = None
    if mn is not None:
        min_p = Premise(min_id, "integral of min{(r f_sigma)^(1/(p-1)), q_sigma^(1/p)} over [r0, inf)", mn)
        premises.append(min_p)

    def verdict(outcome, applied=None, also=(), extra=()):
        tag = applied or route.tag(outcome)
        return Verdict(outcome, tag, premises, route.route, list(also), notes + list(extra), mode)

    if ko.undecided:
        return verdict(Outcome.INCONCLUSIVE, route.tag(Outcome.TRIVIAL),
                       extra=[f"premise {ko_id} could not be classified: {ko.note}"])
    if ko.convergent:
        if pot.divergent:
            return verdict(Outcome.TRIVIAL)
        if pot.convergent:
            return verdict(Outcome.UPPER)
        return verdict(Outcome.INCONCLUSIVE, route.tag(Outcome.TRIVIAL),
                       extra=[f"premise {pot_id} could not be classified: {pot.note}"])
    # Keller-Osserman integral diverges
    if pot.divergent:
        also = [route.tag(Outcome.MIN)] if mn is not None and mn.divergent else []
        return verdict(Outcome.LOWER, also=also)
    if mn is not None and mn.divergent:
        return verdict(Outcome.MIN, extra=[f"premise {pot_id} undecided; min form applies"])
    if pot.convergent:
        return verdict(Outcome.INCONCLUSIVE, route.tag(Outcome.LOWER),
                       extra=["no result covers a divergent Keller-Osserman integral "
                              "with a finite potential integral"])
    return verdict(Outcome.INCONCLUSIVE, route.tag(Outcome.LOWER),
                   extra=[f"premise {pot_id} could not be classified: {pot.note}"])


# ---------------------------------------------------------------------------
# sharpness witnesses


def _pure_power(prof) -> Optional[Fraction]:
    if isinstance(prof, SymbolicProfile) and prof.term.logpow == 0 and prof.term.loglogpow == 0:
        return prof.term.pow
    return None


def witness_status(spec: ProblemSpec) -> tuple[Optional[ClosedFormSolution], str]:
    """Closed-form positive solution for the sharpness families, with an explanation."""
    p, g, b, q = spec.p, spec.g, spec.b, spec.q
    if not (isinstance(b, SymbolicProfile) and isinstance(q, SymbolicProfile) and g.symbolic):
        return None, "witnesses need symbolic b, q and a built-in nonlinearity"
    if b.sign < 0:
        return None, "witness families use a non-negative b"
    k, m, d = b.term.exponents
    qa, qb, qd = q.term.exponents
    if d != 0 or qd != 0:
        return None, "no witness family with loglog factors"
    crit = k - p + 1
    power_g = g.kind == "power" or (g.kind == "powerlog" and g.s == 0)
    lam = g.lam

    if power_g and m == 0 and k > -1 and qb == 0:
        l = qa
        if not lam > p - 1:
            return None, "lambda <= p - 1: positive solutions exist but no closed form is given"
        if l >= crit:
            return None, "trivial regime (lambda > p - 1, l >= k - p + 1)"
        return ClosedFormSolution("power", (crit - l) / (lam - p + 1), spec.r0, "E2.1"), ""
    if power_g and m == 0 and k > -1 and qa == crit and qb != 0:
        mu = qb
        if not lam > p - 1:
            return None, "lambda <= p - 1: positive solutions exist but no closed form is given"
        if mu >= 1 - p:
            return None, "trivial regime (lambda > p - 1, mu >= 1 - p)"
        return ClosedFormSolution("logpower", (1 - p - mu) / (lam - p + 1), spec.r0, "E2.2"), ""
    if g.kind == "powerlog" and g.lam == p - 1 and g.s != 0 and m == 0 and k > -1 and qb == 0:
        lam = g.s
        l = qa
        if not lam > p:
            return None, "lambda <= p: positive solutions exist but no closed form is given"
        if l >= crit:
            return None, "trivial regime (lambda > p, l >= k - p + 1)"
        return ClosedFormSolution("exppower", (crit - l) / (lam - p + 1), spec.r0, "E2.3"), ""
    if power_g and m != 0 and (k > -1 or (k == -1 and m > 0)) and qa == crit and qb == 0:
        if not lam > p - 1:
            return None, "lambda <= p - 1: positive solutions exist but no closed form is given"
        if m <= p - 1:
            return None, "trivial regime (lambda > p - 1, m <= p - 1)"
        return ClosedFormSolution("logpower", (m - p + 1) / (lam - p + 1), spec.r0, "E2.4"), ""
    return None, "spec does not match a witness family"


def sharpness_witness(spec: ProblemSpec) -> Optional[ClosedFormSolution]:
    return witness_status(spec)[0]
