"""Coefficient profiles, nonlinearities and their annulus envelopes.

For a radius ``r`` the envelopes are

* ``q_sigma(r)``: infimum of ``q`` over the annulus ``(r/sigma, sigma r)``;
* ``f_sigma(r)``: ``q_sigma(r) / (1 + r * sup |b|)`` over the same annulus;
* ``g_theta(t)``: infimum of ``g`` over ``(t/theta, theta t)``.

Numeric profiles approximate the essential extrema by geometric sampling plus
a bounded refinement around the best sample.  Symbolic profiles evaluate the
monotone term at the annulus endpoints.
"""

from __future__ import annotations

import csv
import logging
import math
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Callable, Optional

import numpy as np
from scipy.optimize import minimize_scalar

from .errors import ProfileDomainError, UnsupportedProfile
from .powerlog import (
    PowerLogTerm,
    Rational,
    as_rational,
    compare,
    monotone_from,
    mul,
    parse_term,
    power,
)

log = logging.getLogger(__name__)

DEFAULT_SAMPLES = 256


# ---------------------------------------------------------------------------
# sampled extrema


def _sampled_extremum(func, lo: float, hi: float, n: int, find_max: bool, log_scale: bool = True) -> float:
    """Extremum of ``func`` on ``[lo, hi]``: ``n`` samples, then a bounded refinement."""
    if log_scale:
        xs = np.geomspace(lo, hi, n)
    else:
        xs = np.linspace(lo, hi, n)
    ys = np.array([float(func(x)) for x in xs])
    sgn = -1.0 if find_max else 1.0
    i = int(np.argmin(sgn * ys))
    best = ys[i]
    left, right = xs[max(i - 1, 0)], xs[min(i + 1, n - 1)]
    if right > left:
        res = minimize_scalar(
            lambda x: sgn * float(func(x)), bounds=(left, right), method="bounded",
            options={"xatol": 1e-12 * right},
        )
        if res.success and res.fun < sgn * best:
            best = float(res.fun) * sgn
    return float(best)


# ---------------------------------------------------------------------------
# coefficient profiles


class CoefficientProfile:
    """Common interface of the profiles for ``b`` and ``q``."""

    symbolic = False

    def __call__(self, r):
        raise NotImplementedError

    def annulus_inf(self, r: float, sigma: float, samples: int = DEFAULT_SAMPLES) -> float:
        raise NotImplementedError

    def annulus_sup_abs(self, r: float, sigma: float, samples: int = DEFAULT_SAMPLES) -> float:
        raise NotImplementedError

    def scaled(self, c: float) -> "CoefficientProfile":
        raise NotImplementedError


@dataclass(frozen=True)
class ZeroProfile(CoefficientProfile):
    """The identically zero coefficient (typically ``b = 0``)."""

    symbolic = True

    def __call__(self, r):
        return np.zeros_like(np.asarray(r, dtype=float)) if np.ndim(r) else 0.0

    def annulus_inf(self, r, sigma, samples=DEFAULT_SAMPLES):
        return 0.0

    def annulus_sup_abs(self, r, sigma, samples=DEFAULT_SAMPLES):
        return 0.0

    def scaled(self, c):
        return self

    def describe(self) -> str:
        return "0"


@dataclass(frozen=True)
class SymbolicProfile(CoefficientProfile):
    """A coefficient sandwiched as ``alpha1*T(|x|) <= |coef(x)| <= alpha2*T(|x|)``.

    Pointwise evaluation returns ``sign * alpha2 * T(r)``, the largest
    admissible magnitude.  Envelopes use ``alpha1`` for infima and ``alpha2``
    for suprema.
    """

    term: PowerLogTerm
    alpha1: float = 1.0
    alpha2: Optional[float] = None
    sign: int = 1

    symbolic = True

    def __post_init__(self):
        if isinstance(self.term, str):
            object.__setattr__(self, "term", parse_term(self.term))
        a2 = self.alpha1 if self.alpha2 is None else self.alpha2
        object.__setattr__(self, "alpha2", float(a2))
        object.__setattr__(self, "alpha1", float(self.alpha1))
        if not (0 < self.alpha1 <= self.alpha2):
            raise ValueError(f"need 0 < alpha1 <= alpha2, got {self.alpha1}, {self.alpha2}")
        if self.sign not in (1, -1):
            raise ValueError("sign must be +1 or -1")

    @classmethod
    def power_log(cls, coeff=1.0, k: Rational = 0, m: Rational = 0, alpha1=1.0, alpha2=None, sign=1):
        return cls(PowerLogTerm(coeff, k, m), alpha1, alpha2, sign)

    def lower(self, r):
        return self.alpha1 * self.term(r)

    def upper(self, r):
        return self.alpha2 * self.term(r)

    def __call__(self, r):
        return self.sign * self.upper(r)

    @property
    def r_min(self) -> float:
        # log r and log log r must be positive for the term to make sense
        if self.term.loglogpow:
            return math.e
        return 1.0 if self.term.logpow else 0.0

    def _check(self, lo: float):
        if lo <= self.r_min:
            raise ProfileDomainError(f"profile {self.describe()} needs r > {self.r_min:g}, asked at {lo:g}")

    def annulus_inf(self, r, sigma, samples=DEFAULT_SAMPLES):
        self._check(r / sigma)
        return self.alpha1 * min(self.term(r / sigma), self.term(r * sigma))

    def annulus_sup_abs(self, r, sigma, samples=DEFAULT_SAMPLES):
        self._check(r / sigma)
        return self.alpha2 * max(self.term(r / sigma), self.term(r * sigma))

    def scaled(self, c):
        return replace(self, alpha1=self.alpha1 * c, alpha2=self.alpha2 * c)

    def describe(self) -> str:
        from .powerlog import format_term

        if self.alpha1 == self.alpha2 == 1.0:
            return format_term(self.term)
        return f"[{self.alpha1!r}, {self.alpha2!r}] x {format_term(self.term)}"


@dataclass(frozen=True)
class NumericProfile(CoefficientProfile):
    """A coefficient given by a callable valid for ``r >= r_min``."""

    func: Callable[[float], float]
    r_min: float = 0.0
    nonnegative: bool = False
    label: str = "numeric"

    def _check(self, lo: float):
        if lo < self.r_min * (1 - 1e-12):
            raise ProfileDomainError(
                f"profile {self.label!r} is valid for r >= {self.r_min}, asked at {lo}"
            )

    def __call__(self, r):
        if np.ndim(r):
            self._check(float(np.min(r)))
            return np.array([float(self.func(float(x))) for x in np.ravel(r)]).reshape(np.shape(r))
        self._check(float(r))
        return float(self.func(float(r)))

    def annulus_inf(self, r, sigma, samples=DEFAULT_SAMPLES):
        lo, hi = r / sigma, r * sigma
        self._check(lo)
        val = _sampled_extremum(self.func, lo, hi, samples, find_max=False)
        if self.nonnegative and val < 0:
            raise ValueError(f"profile {self.label!r} is negative near r={r}")
        return val

    def annulus_sup_abs(self, r, sigma, samples=DEFAULT_SAMPLES):
        lo, hi = r / sigma, r * sigma
        self._check(lo)
        return _sampled_extremum(lambda x: abs(self.func(x)), lo, hi, samples, find_max=True)

    def scaled(self, c):
        f = self.func
        return replace(self, func=lambda r: c * f(r), label=f"{c}*{self.label}")

    def describe(self) -> str:
        return self.label


class TableProfile(NumericProfile):
    """Numeric profile interpolated log-linearly from ``(r, value)`` rows."""

    def __init__(self, radii, values, nonnegative: bool = False, label: str = "table"):
        radii = np.asarray(radii, dtype=float)
        values = np.asarray(values, dtype=float)
        order = np.argsort(radii)
        radii, values = radii[order], values[order]
        if radii.size < 2 or np.any(radii <= 0) or np.any(np.diff(radii) <= 0):
            raise ValueError("table needs at least two distinct positive radii")
        logr = np.log(radii)
        warned = {"done": False}

        def func(r: float) -> float:
            if (r < radii[0] or r > radii[-1]) and not warned["done"]:
                warned["done"] = True
                log.warning("profile %r extrapolated as a constant outside [%g, %g]", label, radii[0], radii[-1])
            return float(np.interp(math.log(r), logr, values))

        super().__init__(func=func, r_min=0.0, nonnegative=nonnegative, label=label)
        object.__setattr__(self, "radii", radii)
        object.__setattr__(self, "values", values)

    @classmethod
    def from_csv(cls, path, nonnegative: bool = False) -> "TableProfile":
        radii, values = [], []
        with open(path, newline="") as fh:
            for row in csv.reader(fh):
                if not row or row[0].strip().startswith("#"):
                    continue
                try:
                    radii.append(float(row[0]))
                    values.append(float(row[1]))
                except (ValueError, IndexError):
                    if radii:
                        raise ValueError(f"{path}: bad row {row!r}") from None
                    # header row
        return cls(radii, values, nonnegative=nonnegative, label=str(path))


# ---------------------------------------------------------------------------
# nonlinearities


@dataclass(frozen=True)
class Nonlinearity:
    """``g`` in ``q(x) g(u)``.

    ``kind`` is one of ``power`` (``t^lam``), ``powerlog``
    (``t^lam * log(1+t)^s``) or ``numeric``.  The critical-log family
    ``t^(p-1) log(1+t)^lam`` is a ``powerlog`` built by :meth:`critical_log`.
    """

    kind: str
    lam: Fraction = Fraction(0)
    s: Fraction = Fraction(0)
    func: Optional[Callable[[float], float]] = field(default=None, compare=False)
    label: str = ""

    def __post_init__(self):
        if self.kind not in ("power", "powerlog", "numeric"):
            raise ValueError(f"unknown nonlinearity kind {self.kind!r}")
        if self.kind == "numeric":
            if self.func is None:
                raise ValueError("numeric nonlinearity needs func")
            return
        object.__setattr__(self, "lam", as_rational(self.lam))
        object.__setattr__(self, "s", as_rational(self.s))
        if self.lam < 0:
            raise ValueError("g must be continuous at 0, so the power exponent must be >= 0")
        if self.kind == "powerlog" and self.lam + self.s < 0:
            # t^lam log(1+t)^s ~ t^(lam+s) near 0
            raise ValueError("t^lam log(1+t)^s is unbounded at 0 when lam + s < 0")

    @classmethod
    def power(cls, lam: Rational) -> "Nonlinearity":
        return cls("power", lam)

    @classmethod
    def power_log(cls, lam: Rational, s: Rational) -> "Nonlinearity":
        return cls("powerlog", lam, s)

    @classmethod
    def critical_log(cls, lam: Rational, p: Rational) -> "Nonlinearity":
        return cls("powerlog", as_rational(p) - 1, lam, label="critical-log")

    @classmethod
    def numeric(cls, func: Callable[[float], float], label: str = "numeric") -> "Nonlinearity":
        return cls("numeric", func=func, label=label)

    @property
    def symbolic(self) -> bool:
        return self.kind != "numeric"

    def __call__(self, t):
        if self.kind == "numeric":
            if np.ndim(t):
                return np.array([float(self.func(float(x))) for x in np.ravel(t)]).reshape(np.shape(t))
            return float(self.func(float(t)))
        t = np.asarray(t, dtype=float)
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            out = t ** float(self.lam)
            if self.kind == "powerlog" and self.s:
                out = out * np.log1p(t) ** float(self.s)
        if self.kind == "powerlog" and self.lam + self.s == 0:
            out = np.where(t == 0, 1.0, out)
        elif self.lam == 0:
            out = np.where(t == 0, 1.0, out)
        return out if out.ndim else float(out)

    def is_monotone(self) -> bool:
        """True when ``g`` is non-decreasing on ``(0, inf)`` by construction."""
        return self.kind == "power" or (self.kind == "powerlog" and self.s >= 0)

    def asymptotic_term(self) -> PowerLogTerm:
        """Leading power-log shape of ``g(t)`` as ``t -> inf`` (``log(1+t) ~ log t``)."""
        if self.kind == "numeric":
            raise UnsupportedProfile("numeric nonlinearity has no symbolic shape")
        return PowerLogTerm(1.0, self.lam, self.s if self.kind == "powerlog" else 0)

    def describe(self) -> str:
        if self.kind == "power":
            return f"t^{self.lam}"
        if self.kind == "powerlog":
            return f"t^{self.lam} * log(1+t)^{self.s}"
        return self.label


# ---------------------------------------------------------------------------
# problem specification


def _positive_rational(name, x, lower_exclusive):
    v = as_rational(x)
    if not v > lower_exclusive:
        raise ValueError(f"{name} must be > {lower_exclusive}, got {x}")
    return v


@dataclass(frozen=True)
class ProblemSpec:
    """Data of the inequality ``div A(x, Du) + b |Du|^(p-1) >= q g(u)`` on radial annuli."""

    p: Fraction
    n: int
    b: CoefficientProfile
    q: CoefficientProfile
    g: Nonlinearity
    r0: float = 1.0
    sigma: float = 2.0
    theta: float = 2.0
    C1: float = 1.0
    C2: float = 1.0
    samples: int = DEFAULT_SAMPLES

    def __post_init__(self):
        object.__setattr__(self, "p", _positive_rational("p", self.p, 1))
        if int(self.n) != self.n or self.n < 2:
            raise ValueError(f"n must be an integer >= 2, got {self.n}")
        object.__setattr__(self, "n", int(self.n))
        if not self.r0 > 0:
            raise ValueError("r0 must be positive")
        if not self.sigma > 1 or not self.theta > 1:
            raise ValueError("sigma and theta must exceed 1")
        if not (0 < self.C1 <= self.C2):
            raise ValueError("need 0 < C1 <= C2")
        if isinstance(self.q, SymbolicProfile) and self.q.sign < 0:
            raise ValueError("q must be non-negative")

    @property
    def symbolic(self) -> bool:
        return self.b.symbolic and self.q.symbolic and self.g.symbolic

    def with_(self, **changes) -> "ProblemSpec":
        return replace(self, **changes)


# ---------------------------------------------------------------------------
# envelopes


def q_sigma(spec: ProblemSpec, r: float) -> float:
    return spec.q.annulus_inf(float(r), spec.sigma, spec.samples)


def f_sigma(spec: ProblemSpec, r: float) -> float:
    r = float(r)
    qi = spec.q.annulus_inf(r, spec.sigma, spec.samples)
    bs = spec.b.annulus_sup_abs(r, spec.sigma, spec.samples)
    return qi / (1.0 + r * bs)


def g_theta(spec: ProblemSpec, t: float) -> float:
    """Infimum of ``g`` over ``(t/theta, theta*t)``."""
    t = float(t)
    if not t > 0:
        raise ValueError("g_theta needs t > 0")
    g = spec.g
    if g.is_monotone():
        return float(g(t / spec.theta))
    val = _sampled_extremum(g, t / spec.theta, t * spec.theta, spec.samples, find_max=False)
    return max(val, 0.0)


def g_theta_vec(spec: ProblemSpec, t: np.ndarray) -> np.ndarray:
    """Vectorised :func:`g_theta` for the monotone families."""
    t = np.asarray(t, dtype=float)
    if spec.g.is_monotone():
        return np.asarray(spec.g(t / spec.theta), dtype=float)
    return np.array([g_theta(spec, x) for x in t])


# ---------------------------------------------------------------------------
# symbolic envelopes


@dataclass(frozen=True)
class SymbolicEnvelopes:
    """Power-log shapes of the envelopes with sandwich constants.

    For ``r >= valid_from``::

        f_lo * f(r) <= f_sigma(r) <= f_hi * f(r)
        q_lo * q(r) <= q_sigma(r) <= q_hi * q(r)

    and ``g_theta(t) ~ g(t)`` up to the constant ``theta^-lam`` as ``t -> inf``.
    ``drift`` tells whether ``r*|b|`` grows (``"growing"``), stays bounded
    (``"bounded"``) or is absent (``"zero"``).
    """

    f: PowerLogTerm
    f_lo: float
    f_hi: float
    q: PowerLogTerm
    q_lo: float
    q_hi: float
    g: PowerLogTerm
    drift: str
    valid_from: float


def _ratio_range(u: PowerLogTerm, sigma: float, R: float, up: bool) -> tuple[float, float]:
    """Range of ``u(r*sigma^±1)/u(r)`` over ``r >= R``, excluding the constant ``coeff``."""
    ls = math.log(sigma)
    lo = hi = sigma ** (float(u.pow) if up else -float(u.pow))
    if u.logpow:
        v = (1 + ls / math.log(R)) if up else (1 - ls / math.log(R))
        w = v ** float(u.logpow)
        lo, hi = lo * min(1.0, w), hi * max(1.0, w)
    if u.loglogpow:
        LR = math.log(R)
        v = math.log(LR + ls) / math.log(LR) if up else math.log(LR - ls) / math.log(LR)
        w = v ** float(u.loglogpow)
        lo, hi = lo * min(1.0, w), hi * max(1.0, w)
    return lo, hi


def symbolic_envelopes(spec: ProblemSpec, reference_radius: Optional[float] = None) -> SymbolicEnvelopes:
    """Shapes of ``f_sigma``, ``q_sigma``, ``g_theta`` for symbolic profiles.

    The drift ``D(r) = r * T_b(r)`` decides the shape of ``f_sigma``: when it
    grows, ``f ~ T_q / D``; otherwise ``f ~ T_q``.  The sandwich constants
    hold from ``valid_from``, which is at least ``10*r0`` and far enough out
    that every term involved is monotone on the annuli.
    """
    if not (spec.b.symbolic and spec.q.symbolic):
        raise UnsupportedProfile("symbolic envelopes need symbolic b and q profiles")
    if not isinstance(spec.q, SymbolicProfile):
        raise UnsupportedProfile("q must be a non-zero symbolic profile")
    sigma = spec.sigma
    Tq = spec.q.term
    R = max(10.0 * spec.r0, reference_radius or 0.0, sigma * monotone_from(Tq))
    if Tq.logpow or Tq.loglogpow:
        R = max(R, sigma ** 2 * math.e ** 2)
        if Tq.loglogpow:
            R = max(R, math.exp(sigma * math.e ** 2))

    g_term = spec.g.asymptotic_term() if spec.g.symbolic else None

    b = spec.b
    if isinstance(b, ZeroProfile):
        D = None
    else:
        D = mul(PowerLogTerm(1.0, 1), b.term)
        R = max(R, sigma * monotone_from(D), sigma * monotone_from(b.term))
        if b.term.logpow or b.term.loglogpow:
            R = max(R, sigma ** 2 * math.e ** 2)
            if b.term.loglogpow:
                R = max(R, math.exp(sigma * math.e ** 2))

    down = _ratio_range(Tq, sigma, R, up=False)
    upr = _ratio_range(Tq, sigma, R, up=True)
    q_lo = spec.q.alpha1 * min(down[0], upr[0])
    # upper sandwich covers any admissible q, not just the alpha1 representative
    q_hi_any = spec.q.alpha2 * min(down[1], upr[1])

    if D is None:
        return SymbolicEnvelopes(Tq, q_lo, q_hi_any, Tq, q_lo, q_hi_any, g_term, "zero", R)

    bd = _ratio_range(b.term, sigma, R, up=False)
    bu = _ratio_range(b.term, sigma, R, up=True)
    b_lo = max(bd[0], bu[0])
    b_hi = max(bd[1], bu[1])
    DR = D(R)
    if compare(D.with_coeff(1.0), PowerLogTerm()) > 0:
        # growing drift: 1 + a2*bhi*D(r) <= D(r) (1/D(R) + a2*bhi) since D increases past R
        f_term = mul(Tq, power(D, -1))
        f_lo = q_lo / (1.0 / DR + b.alpha2 * b_hi)
        f_hi = q_hi_any / (b.alpha1 * b_lo)
        drift = "growing"
    else:
        # bounded drift: D(r) <= D(R) for r >= R
        f_term = Tq
        f_lo = q_lo / (1.0 + b.alpha2 * b_hi * DR)
        f_hi = q_hi_any
        drift = "bounded"
    return SymbolicEnvelopes(f_term, f_lo, f_hi, Tq, q_lo, q_hi_any, g_term, drift, R)
