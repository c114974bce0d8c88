"""Growth bounds on ``M(r)`` as invertible integral functions and as symbolic rates.

All integrals run in logarithmic variables: ``s = log M`` for the growth side
and ``u = log r`` for the radius side.  The growth-side densities for the
built-in nonlinearities are evaluated in log space, so ``M`` far beyond the
float range (exponential rates) stays representable through ``log M``.

The constant ``C`` in every estimate is not determined by the theory beyond
its dependence on the structural data; it defaults to 1 and only rates are
meaningful.
"""

from __future__ import annotations

import bisect
import csv
import math
import threading
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import Callable, Optional, Sequence

import numpy as np

from .criteria import Outcome, evaluate, potential_start, symbolic_integrands
from .envelopes import ProblemSpec, SymbolicProfile, f_sigma, g_theta, q_sigma
from .errors import BracketFailure, IntegrandError, UnrepresentableIntegral
from .powerlog import (
    PowerLogTerm,
    antiderivative_asym,
    format_term,
    max_asym,
    mul,
    power,
    tail_converges,
)
from .quadrature import _fit, integrate_finite

CONSTANT_NOTE = (
    "the constant C is not computable from the structural data; C defaults to 1 "
    "and only rates (exponents) are meaningful"
)

_RTOL = 1e-13
_EXP_SAFE = 700.0


class BoundKind(str, Enum):
    LOWER = "Lower"
    MIN = "Min"
    UPPER = "Upper"


# ---------------------------------------------------------------------------
# tabulated integrals in a log variable


class LogIntegral:
    """Integral of a positive density ``F(u)`` tabulated on lazily added panels.

    ``head(u)`` is the integral over ``[u0, u]`` and ``tail(u)`` the integral
    over ``[u, inf)``.  Panels widen geometrically away from ``u0`` so very
    large ``u`` costs only logarithmically many panels.  ``far_safe`` says
    that ``F`` can be evaluated for any ``u`` (log-space density); otherwise
    the table stops at ``u = 700`` and the tail beyond is extrapolated from a
    power-log fit.
    """

    def __init__(self, F: Callable, u0: float, far_safe: bool = False, width: float = 0.25,
                 u_max: Optional[float] = None, rtol: float = _RTOL):
        self.F = F
        self.u0 = float(u0)
        self.far_safe = far_safe
        self.width = width
        self.rtol = rtol
        self.u_max = float(u_max) if u_max is not None else (1e15 if far_safe else _EXP_SAFE)
        self._edges = [self.u0]
        self._cum = [0.0]
        self._lock = threading.Lock()
        self._suffix = None  # (edges, suffix sums, rest at the last edge)

    def _quad(self, a: float, b: float) -> float:
        if b <= a:
            return 0.0
        return integrate_finite(self.F, a, b, tol=self.rtol, max_subdivisions=500, relative=True).value

    def _add_panel(self):
        a = self._edges[-1]
        w = max(self.width, (a - self.u0) / 8.0)
        for _ in range(40):
            try:
                v = self._quad(a, a + w)
                break
            except IntegrandError:
                w *= 0.5
        else:
            raise IntegrandError(f"density overflows just beyond u = {a!r}")
        self._edges.append(a + w)
        self._cum.append(self._cum[-1] + v)

    def _extend(self, u: float):
        if self._edges[-1] >= u:
            return
        with self._lock:
            while self._edges[-1] < u:
                self._add_panel()

    def head(self, u: float) -> float:
        u = float(u)
        if u <= self.u0:
            return 0.0
        self._extend(u)
        j = bisect.bisect_right(self._edges, u) - 1
        return self._cum[j] + self._quad(self._edges[j], u)

    # -- tails --

    def _build_tail(self):
        with self._lock:
            if self._suffix is not None:
                return self._suffix
        limit = 200.0 if self.far_safe else _EXP_SAFE
        limit = min(limit, self.u_max)
        while True:
            last = self._cum[-1] - self._cum[-2] if len(self._cum) > 1 else math.inf
            if len(self._cum) > 8 and last <= 1e-18 * self._cum[-1]:
                break
            if self._edges[-1] >= limit:
                break
            self._extend(self._edges[-1] + 1e-12)
        edges = list(self._edges)
        rest = self._rest(edges[-1])
        cum = self._cum
        suffix = [0.0] * len(edges)
        suffix[-1] = rest
        for i in range(len(edges) - 2, -1, -1):
            suffix[i] = suffix[i + 1] + (cum[i + 1] - cum[i])
        with self._lock:
            self._suffix = (edges, suffix, rest)
        return self._suffix

    def _rest(self, U: float) -> float:
        """Integral of ``F`` over ``[U, inf)``."""
        if self.far_safe:
            def h(tau):
                tau = np.asarray(tau, dtype=float)
                with np.errstate(all="ignore"):
                    v = np.asarray(self.F(U / tau), dtype=float) * U / tau ** 2
                return np.where(np.isfinite(v), v, 0.0)

            if U <= 0:
                raise ValueError("far-field tail needs U > 0")
            return integrate_finite(h, 0.0, 1.0, tol=1e-12, max_subdivisions=4000).value
        # power-log model of F in the shifted variable x = u - u0 + 1
        w = max(self.width, (U - self.u0) / 8.0)
        us = U - w * np.linspace(4.0, 0.0, 9)
        us = us[us > self.u0]
        vals = np.array([float(np.asarray(self.F(np.array([x])))[0]) for x in us])
        if np.any(vals <= 0):
            return 0.0
        x = us - self.u0 + 1.0
        c, e, beta, _ = _fit(x, np.log(vals))
        if e > 1e-9 or (abs(e) <= 1e-9 and beta >= -1):
            raise IntegrandError("tail density does not decay integrably")
        X = U - self.u0 + 1.0

        def model(tau):
            tau = np.asarray(tau, dtype=float)
            xx = X / tau
            with np.errstate(all="ignore"):
                v = np.exp(c + e * xx + beta * np.log(xx)) * X / tau ** 2
            return np.where(np.isfinite(v), v, 0.0)

        return integrate_finite(model, 0.0, 1.0, tol=1e-12, max_subdivisions=4000).value

    def tail(self, u: float) -> float:
        u = float(u)
        edges, suffix, rest = self._build_tail()
        if u < self.u0:
            return suffix[0] + self._quad(u, self.u0)
        if u >= edges[-1]:
            return self._rest(u) if u > edges[-1] else rest
        j = bisect.bisect_right(edges, u) - 1
        return self._quad(u, edges[j + 1]) + suffix[j + 1]

    def total(self) -> float:
        return self._build_tail()[1][0]


# ---------------------------------------------------------------------------
# densities


def _log_g_theta(spec: ProblemSpec):
    """Split ``log g_theta(e^s)`` as ``slope*s + offset + rest(s)``.

    ``slope`` is an exact Fraction so that the linear parts of the densities
    below cancel exactly in critical cases; ``rest`` is ``None`` when zero.
    Returns ``(slope, offset, rest, far_safe)``.
    """
    g = spec.g
    lt = math.log(spec.theta)
    if g.symbolic:
        s_exp = float(g.s) if g.kind == "powerlog" else 0.0
        if g.kind == "power" or g.s == 0:
            return g.lam, -float(g.lam) * lt, None, True
        if g.s > 0:
            return g.lam, -float(g.lam) * lt, (
                lambda s: s_exp * np.log(np.logaddexp(0.0, np.asarray(s, dtype=float) - lt))
            ), True
        if g.lam == 0:
            # log(1+t)^s with s < 0 is decreasing; the infimum sits at theta*t
            return g.lam, 0.0, (
                lambda s: s_exp * np.log(np.logaddexp(0.0, np.asarray(s, dtype=float) + lt))
            ), True

    def lg_num(s):
        s = np.atleast_1d(np.asarray(s, dtype=float))
        out = np.empty_like(s)
        for i, si in enumerate(s):
            if si > _EXP_SAFE:
                out[i] = np.nan
                continue
            v = g_theta(spec, math.exp(si))
            out[i] = math.log(v) if v > 0 else -np.inf
        return out

    return Fraction(0), 0.0, lg_num, False


def growth_densities(spec: ProblemSpec):
    """Densities in ``s = log t`` of the ``G`` and ``H`` integrals, plus far-field safety."""
    slope, offset, rest, safe = _log_g_theta(spec)
    p = spec.p

    def density(lin, scale):
        a = float(lin)
        c = -offset * scale

        def F(s):
            s = np.asarray(s, dtype=float)
            x = a * s + c
            if rest is not None:
                x = x - scale * rest(s)
            return np.exp(x)

        return F

    # G: (g_theta(t) t)^(-1/p) dt = exp((1 - (1+slope)/p) s - log-rest/p) ds
    dG = density(1 - (1 + slope) / p, 1.0 / float(p))
    dH = density(1 - slope / (p - 1), 1.0 / float(p - 1))
    return dG, dH, safe


def phi_start(spec: ProblemSpec) -> float:
    """Lower radius for the potential integrals.

    This is ``r0``, pushed out when a profile is only defined further out or
    carries log factors (which need ``r/sigma > e``).
    """
    start = potential_start(spec)
    for prof in (spec.b, spec.q):
        if isinstance(prof, SymbolicProfile):
            if prof.term.loglogpow:
                start = max(start, spec.sigma * math.exp(math.e) * (1 + 1e-9))
            elif prof.term.logpow:
                start = max(start, spec.sigma * math.e * (1 + 1e-9))
    return start


def _radial_density(h):
    """Turn an integrand in ``r`` into a density in ``u = log r``."""
    def F(u):
        u = np.atleast_1d(np.asarray(u, dtype=float))
        out = np.empty_like(u)
        for i, ui in enumerate(u):
            r = math.exp(ui)
            out[i] = h(r) * r
        return out

    return F


def potential_density(spec: ProblemSpec):
    inv = 1.0 / float(spec.p - 1)
    return _radial_density(lambda r: (r * f_sigma(spec, r)) ** inv)


def min_density(spec: ProblemSpec):
    inv = 1.0 / float(spec.p - 1)
    inv_p = 1.0 / float(spec.p)
    return _radial_density(lambda r: min((r * f_sigma(spec, r)) ** inv, q_sigma(spec, r) ** inv_p))


def phi_lower(spec: ProblemSpec, r: float) -> float:
    """``(int_{r0}^r (xi f_sigma(xi))^(1/(p-1)) dxi)^((p-1)/p)``."""
    a = phi_start(spec)
    if r <= a:
        return 0.0
    I = LogIntegral(potential_density(spec), math.log(a)).head(math.log(r))
    return I ** (float(spec.p - 1) / float(spec.p))


def phi_min(spec: ProblemSpec, r: float) -> float:
    """``int_{r0}^r min{(xi f_sigma)^(1/(p-1)), q_sigma^(1/p)} dxi``."""
    a = phi_start(spec)
    if r <= a:
        return 0.0
    return LogIntegral(min_density(spec), math.log(a)).head(math.log(r))


def phi_upper(spec: ProblemSpec, r: float) -> float:
    """``(int_r^inf (xi f_sigma(xi))^(1/(p-1)) dxi)^((p-1)/p)``."""
    a = phi_start(spec)
    I = LogIntegral(potential_density(spec), math.log(max(a, r)))
    return I.tail(math.log(max(a, r))) ** (float(spec.p - 1) / float(spec.p))


def phi_terms(spec: ProblemSpec) -> dict:
    """Leading power-log shapes of the three right-hand sides (symbolic specs)."""
    ints = symbolic_integrands(spec)
    e = (spec.p - 1) / spec.p
    out = {}
    pot = antiderivative_asym(ints.potential)
    out[BoundKind.UPPER if tail_converges(ints.potential) else BoundKind.LOWER] = power(pot, e)
    if not tail_converges(ints.min):
        out[BoundKind.MIN] = antiderivative_asym(ints.min)
    return out


# ---------------------------------------------------------------------------
# symbolic rates


@dataclass(frozen=True)
class RateInfo:
    """Symbolic rate of a bound: ``M(r) ~ term(r)``, or ``log M(r) ~ term(r)`` if ``of_log``."""

    term: PowerLogTerm
    of_log: bool
    kind: BoundKind
    tag: str
    alternatives: tuple = ()
    note: str = ""

    def describe(self) -> str:
        lhs = "log M(r)" if self.of_log else "M(r)"
        rel = "<=" if self.kind is BoundKind.UPPER else ">="
        return f"{lhs} {rel} ~ {format_term(self.term)}"

    def to_dict(self) -> dict:
        return {
            "kind": self.kind.value,
            "tag": self.tag,
            "of_log": self.of_log,
            "rate": format_term(self.term),
            "statement": self.describe(),
            "alternatives": [
                {"kind": k.value, "of_log": ol, "rate": format_term(t)} for k, t, ol in self.alternatives
            ],
            "note": self.note,
        }


def _log_of(X: PowerLogTerm) -> PowerLogTerm:
    """Leading term of ``|log X(r)|``."""
    if X.pow != 0:
        return PowerLogTerm(abs(float(X.pow)), 0, 1)
    if X.logpow != 0:
        return PowerLogTerm(abs(float(X.logpow)), 0, 0, 1)
    raise UnrepresentableIntegral(f"log of {format_term(X)} needs a triple logarithm")


def _loglog_of(X: PowerLogTerm) -> PowerLogTerm:
    if X.pow != 0:
        return PowerLogTerm(1.0, 0, 0, 1)
    raise UnrepresentableIntegral(f"loglog of {format_term(X)} needs a triple logarithm")


def _solve(e, f, h, c: float, X: PowerLogTerm) -> PowerLogTerm:
    """Leading term of ``y`` solving ``c y^e log(y)^f loglog(y)^h = X``."""
    y = power(X / c, 1 / e)
    if f:
        L = _log_of(X)
        y = mul(y, power(L / abs(float(e)), -f / e))
    if h:
        y = mul(y, power(_loglog_of(X), -h / e))
    return y


def invert_term(G: PowerLogTerm, X: PowerLogTerm) -> tuple[PowerLogTerm, bool]:
    """Rate of ``M`` solving ``G(M) = X(r)``; the flag is set when the rate is that of ``log M``."""
    a, b, d = G.exponents
    if a != 0:
        return _solve(a, b, d, G.coeff, X), False
    if b != 0:
        return _solve(b, d, 0, G.coeff, X), True
    raise UnrepresentableIntegral(f"cannot invert {format_term(G)}")


def _h_term(spec: ProblemSpec) -> PowerLogTerm:
    g = spec.g.asymptotic_term().with_coeff(spec.theta ** -float(spec.g.lam))
    return power(g, -1 / (spec.p - 1))


def _rate_key(item):
    """Exponent-level strength of a lower-bound rate; ties prefer the lower form."""
    kind, term, of_log = item
    return (of_log, term.exponents, kind is BoundKind.LOWER)


def symbolic_rate_info(spec: ProblemSpec, C: float = 1.0) -> RateInfo:
    """Symbolic growth rate for the estimate that applies to ``spec``.

    When both the lower and the min-form estimates apply, the stronger of the
    two lower bounds is returned and the other is kept as an alternative.
    """
    verdict = evaluate(spec, "symbolic")
    ints = symbolic_integrands(spec)
    e = (spec.p - 1) / spec.p
    ko_anti = antiderivative_asym(ints.ko)
    tags = {BoundKind.LOWER: None, BoundKind.MIN: None}
    if verdict.outcome is Outcome.UPPER:
        X = power(antiderivative_asym(ints.potential), e) * C
        term, of_log = invert_term(ko_anti, X)
        return RateInfo(term, of_log, BoundKind.UPPER, verdict.applied)
    if verdict.outcome not in (Outcome.LOWER, Outcome.MIN):
        raise ValueError(f"no growth estimate for outcome {verdict.outcome.value}")
    cands = []
    if verdict.outcome is Outcome.LOWER:
        X = power(antiderivative_asym(ints.potential), e) * C
        cands.append((BoundKind.LOWER, *invert_term(ko_anti, X)))
        tags[BoundKind.LOWER] = verdict.applied
    min_tag = verdict.applied if verdict.outcome is Outcome.MIN else (verdict.also[0] if verdict.also else None)
    if min_tag is not None:
        Gt = ko_anti
        H = _h_term(spec)
        if not tail_converges(H):
            Gt = max_asym(Gt, antiderivative_asym(H))
        X = antiderivative_asym(ints.min) * C
        cands.append((BoundKind.MIN, *invert_term(Gt, X)))
        tags[BoundKind.MIN] = min_tag
    best = max(cands, key=_rate_key)
    others = tuple(c for c in cands if c is not best)
    note = ""
    if others:
        other = others[0]
        if _rate_key(other)[:2] == _rate_key(best)[:2]:
            note = "lower and min forms give the same exponents"
        else:
            note = f"the {best[0].value.lower()} form gives the stronger rate"
    return RateInfo(best[1], best[2], best[0], tags[best[0]], others, note)


def symbolic_rate(spec: ProblemSpec, C: float = 1.0) -> PowerLogTerm:
    """Rate term for the bound on ``M(r)`` (or on ``log M(r)`` for exponential rates)."""
    return symbolic_rate_info(spec, C).term


# ---------------------------------------------------------------------------
# numeric bounds


@dataclass(frozen=True)
class GrowthBound:
    """A computable bound ``G(M(r)) >= C Phi(r)`` (or the upper analogue).

    ``G`` and ``H`` are :class:`LogIntegral` tables over ``s = log t``;
    ``Phi`` maps a radius to the right-hand side.  For ``Upper`` the left side
    is the tail of ``G``.
    """

    kind: BoundKind
    G: LogIntegral
    Phi: Callable[[float], float]
    H: Optional[LogIntegral] = None
    C: float = 1.0
    rate: Optional[RateInfo] = None
    R_star: float = 1.0
    applied: str = ""
    notes: tuple = field(default_factory=tuple)

    def __post_init__(self):
        if not (self.C > 0 and math.isfinite(self.C)):
            raise ValueError("C must be positive and finite")
        if self.H is not None and self.kind is not BoundKind.MIN:
            raise ValueError("H only enters the min-form bound")

    def lhs_log(self, s: float) -> float:
        """Left side at ``M = e^s``."""
        if self.kind is BoundKind.UPPER:
            return self.G.tail(s)
        v = self.G.head(s)
        if self.H is not None:
            v += self.H.head(s)
        return v

    def lhs(self, M: float) -> float:
        if not M > 0:
            raise ValueError("M must be positive")
        return self.lhs_log(math.log(M))

    def target(self, r: float) -> float:
        return self.C * self.Phi(r)


def _bisect(fn, lo, hi, f_lo, f_hi, target, increasing):
    """Shrink ``[lo, hi]`` around ``fn = target`` to float resolution."""
    for _ in range(400):
        mid = 0.5 * (lo + hi)
        if not lo < mid < hi:
            break
        v = fn(mid)
        if v == target:
            return mid, mid
        if (v < target) == increasing:
            lo, f_lo = mid, v
        else:
            hi, f_hi = mid, v
        if abs(hi - lo) <= 1e-15 * max(1.0, abs(mid)) and abs(f_hi - f_lo) <= 1e-13 * abs(target):
            break
    return lo, hi


def _check_order(a, b, fa, fb, increasing):
    slack = 1e-11 * max(abs(fa), abs(fb))
    if (increasing and fb < fa - slack) or (not increasing and fb > fa + slack):
        raise BracketFailure(
            f"left side is not monotone: value {fa!r} at s={a!r}, {fb!r} at s={b!r}"
        )


def invert_growth_log(bound: GrowthBound, r: float) -> float:
    """``log`` of the bound on ``M(r)``; ``+inf`` and ``-inf`` are the blow-up and zero markers.

    Lower/Min: the smallest ``s >= 0`` with ``G(e^s) >= C Phi(r)``, or
    ``+inf`` when ``G`` saturates below the target.  Upper: the largest
    ``s >= 0`` with ``G~(e^s) >= C Phi~(r)``; ``-inf`` when even ``M = 1``
    violates it, ``+inf`` when ``Phi~(r) = 0``.
    """
    target = bound.target(r)
    if not (target >= 0 and math.isfinite(target)):
        raise BracketFailure(f"right-hand side is {target!r} at r={r!r}")
    fn = bound.lhs_log

    if bound.kind is not BoundKind.UPPER:
        if target == 0:
            return 0.0
        lo, f_lo = 0.0, 0.0
        hi = 1.0
        cap = bound.G.u_max
        while True:
            try:
                f_hi = fn(hi)
            except IntegrandError:
                f_hi = math.inf
            _check_order(lo, hi, f_lo, f_hi, True)
            if f_hi >= target:
                break
            if hi >= cap:
                return math.inf
            lo, f_lo = hi, f_hi
            hi = min(2.0 * hi, cap)

        def safe(s):
            try:
                return fn(s)
            except IntegrandError:
                return math.inf

        lo, hi = _bisect(safe, lo, hi, f_lo, f_hi, target, True)
        return hi

    if target == 0:
        return math.inf
    f0 = fn(0.0)
    if f0 < target:
        return -math.inf
    lo, f_lo = 0.0, f0
    hi = 1.0
    while True:
        f_hi = fn(hi)
        _check_order(lo, hi, f_lo, f_hi, False)
        if f_hi < target:
            break
        if hi >= bound.G.u_max:
            return math.inf
        lo, f_lo = hi, f_hi
        hi = 2.0 * hi
    lo, hi = _bisect(fn, lo, hi, f_lo, f_hi, target, False)
    return lo


def invert_growth(bound: GrowthBound, r: float) -> float:
    """The bound on ``M(r)``.

    Returns ``inf`` as the blow-up marker (Lower/Min) or when no upper
    constraint is left (Upper), and ``0.0`` when the upper bound falls below
    1.  Raises ``OverflowError`` when a finite bound exceeds the float range;
    use :func:`invert_growth_log` there.
    """
    s = invert_growth_log(bound, r)
    if s == math.inf:
        return math.inf
    if s == -math.inf:
        return 0.0
    if s > 709.0:
        raise OverflowError(f"bound e^{s:.6g} exceeds the float range; use invert_growth_log")
    return math.exp(s)


def _default_kind(verdict) -> BoundKind:
    if verdict.outcome is Outcome.LOWER:
        return BoundKind.LOWER
    if verdict.outcome is Outcome.MIN:
        return BoundKind.MIN
    if verdict.outcome is Outcome.UPPER:
        return BoundKind.UPPER
    raise ValueError(f"no growth estimate for outcome {verdict.outcome.value}")


def _stable_radius(verdict, start: float) -> float:
    """Start of the last window block used by the numeric classifications."""
    R = start
    for pr in verdict.premises:
        cl = pr.classification
        if cl.source == "numeric" and cl.windows:
            R = max(R, start * 2.0 ** min(4, len(cl.windows) // 4))
    return R


def growth_bound(spec: ProblemSpec, kind: Optional[BoundKind] = None, C: float = 1.0,
                 mode: str = "auto", verdict=None) -> GrowthBound:
    """Build the bound dictated by the classification of ``spec`` (or the requested ``kind``)."""
    if verdict is None:
        verdict = evaluate(spec, mode)
    if kind is None:
        kind = _default_kind(verdict)
    kind = BoundKind(kind)
    dG, dH, safe = growth_densities(spec)
    G = LogIntegral(dG, 0.0, far_safe=safe)
    H = LogIntegral(dH, 0.0, far_safe=safe) if kind is BoundKind.MIN else None
    a = phi_start(spec)
    ua = math.log(a)
    e = float(spec.p - 1) / float(spec.p)
    if kind is BoundKind.MIN:
        table = LogIntegral(min_density(spec), ua)

        def Phi(r):
            return table.head(math.log(r)) if r > a else 0.0
    else:
        table = LogIntegral(potential_density(spec), ua)
        if kind is BoundKind.LOWER:
            def Phi(r):
                return table.head(math.log(r)) ** e if r > a else 0.0
        else:
            def Phi(r):
                return table.tail(math.log(max(r, a))) ** e

    rate = None
    R = max(10.0 * spec.r0, a)
    if spec.symbolic:
        try:
            info = symbolic_rate_info(spec, C)
            if info.kind is kind:
                rate = info
            else:
                rate = next(
                    (RateInfo(t, ol, k, "", (), "") for k, t, ol in info.alternatives if k is kind), None
                )
        except (UnrepresentableIntegral, ValueError):
            rate = None
        R = max(R, symbolic_integrands(spec).valid_from)
    else:
        R = max(R, _stable_radius(verdict, a))
    applied = verdict.applied if _safe_kind(verdict) is kind else (verdict.also[0] if verdict.also else "")
    return GrowthBound(kind, G, Phi, H, C, rate, R, applied, (CONSTANT_NOTE,))


def _safe_kind(verdict):
    try:
        return _default_kind(verdict)
    except ValueError:
        return None


# ---------------------------------------------------------------------------
# export


def rate_prediction(rate: Optional[RateInfo], r: float) -> tuple[float, float]:
    """``(M, log M)`` predicted by the symbolic rate at ``r``."""
    if rate is None:
        return math.nan, math.nan
    v = rate.term(r)
    if rate.of_log:
        return (math.exp(v) if v < 709 else math.inf), v
    return v, math.log(v)


def bounds_table(bounds: Sequence[GrowthBound], radii: Sequence[float]) -> list[dict]:
    """Rows ``r, M_lower, M_upper, rate_prediction`` (plus log columns) over ``radii``."""
    lower = next((b for b in bounds if b.kind is not BoundKind.UPPER), None)
    upper = next((b for b in bounds if b.kind is BoundKind.UPPER), None)
    main = lower or upper
    rows = []
    for r in radii:
        row = {"r": float(r)}
        for name, b in (("lower", lower), ("upper", upper)):
            if b is None:
                row[f"M_{name}"], row[f"log_M_{name}"] = math.nan, math.nan
                continue
            s = invert_growth_log(b, r)
            row[f"log_M_{name}"] = s
            row[f"M_{name}"] = math.exp(s) if s < 709 else math.inf
        m, lm = rate_prediction(main.rate if main else None, r)
        row["rate_prediction"] = m
        row["log_rate_prediction"] = lm
        rows.append(row)
    return rows


BOUNDS_COLUMNS = ("r", "M_lower", "M_upper", "rate_prediction", "log_M_lower", "log_M_upper",
                  "log_rate_prediction")


def write_bounds_csv(path, rows: list[dict]) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=BOUNDS_COLUMNS)
        w.writeheader()
        for row in rows:
            w.writerow({k: repr(float(row[k])) for k in BOUNDS_COLUMNS})
