"""Exact algebra on single power-log terms ``c * r^a * log(r)^b * loglog(r)^d``.

Exponents are :class:`fractions.Fraction` so that critical equalities such as
``l == k - p + 1`` are decided exactly.  Coefficients are floats; they are
carried along but never decide a comparison unless all exponents tie.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Union

import numpy as np

from .errors import UnrepresentableIntegral

Rational = Union[int, Fraction, str, float]


def as_rational(x: Rational) -> Fraction:
    """Convert ``x`` to an exact Fraction.

    Floats go through their shortest repr, so ``0.1`` becomes ``1/10`` rather
    than the binary expansion.
    """
    if isinstance(x, Fraction):
        return x
    if isinstance(x, bool):
        raise TypeError("booleans are not exponents")
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, float):
        if not math.isfinite(x):
            raise ValueError(f"non-finite exponent {x!r}")
        return Fraction(repr(x))
    if isinstance(x, str):
        return Fraction(x.strip())
    if isinstance(x, np.integer):
        return Fraction(int(x))
    if isinstance(x, np.floating):
        return as_rational(float(x))
    raise TypeError(f"cannot interpret {x!r} as a rational")


@dataclass(frozen=True)
class PowerLogTerm:
    """The eventually-positive function ``coeff * r^pow * log(r)^logpow * loglog(r)^loglogpow``."""

    coeff: float = 1.0
    pow: Fraction = Fraction(0)
    logpow: Fraction = Fraction(0)
    loglogpow: Fraction = Fraction(0)

    def __post_init__(self):
        coeff = float(self.coeff)
        if not (coeff > 0 and math.isfinite(coeff)):
            raise ValueError(f"coefficient must be positive and finite, got {self.coeff!r}")
        object.__setattr__(self, "coeff", coeff)
        object.__setattr__(self, "pow", as_rational(self.pow))
        object.__setattr__(self, "logpow", as_rational(self.logpow))
        object.__setattr__(self, "loglogpow", as_rational(self.loglogpow))

    @property
    def exponents(self) -> tuple[Fraction, Fraction, Fraction]:
        return (self.pow, self.logpow, self.loglogpow)

    def sort_key(self):
        return (self.pow, self.logpow, self.loglogpow, self.coeff)

    def same_shape(self, other: "PowerLogTerm") -> bool:
        return self.exponents == other.exponents

    def with_coeff(self, coeff: float) -> "PowerLogTerm":
        return PowerLogTerm(coeff, self.pow, self.logpow, self.loglogpow)

    def log_value(self, r):
        """Natural log of the term at ``r``; works on scalars and arrays."""
        r = np.asarray(r, dtype=float)
        out = math.log(self.coeff) + float(self.pow) * np.log(r)
        if self.logpow or self.loglogpow:
            L = np.log(r)
            if self.logpow:
                out = out + float(self.logpow) * np.log(L)
            if self.loglogpow:
                out = out + float(self.loglogpow) * np.log(np.log(L))
        return out if out.ndim else float(out)

    def __call__(self, r):
        with np.errstate(over="ignore"):
            v = np.exp(self.log_value(r))
        return v if np.ndim(v) else float(v)

    def __mul__(self, other):
        if isinstance(other, PowerLogTerm):
            return mul(self, other)
        if isinstance(other, (int, float)) and not isinstance(other, bool):
            return self.with_coeff(self.coeff * other)
        return NotImplemented

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, PowerLogTerm):
            return mul(self, power(other, -1))
        if isinstance(other, (int, float)) and not isinstance(other, bool):
            return self.with_coeff(self.coeff / other)
        return NotImplemented

    def __pow__(self, e):
        return power(self, e)

    def __str__(self):
        return format_term(self)


ONE = PowerLogTerm()


def term(coeff=1.0, pow=0, logpow=0, loglogpow=0) -> PowerLogTerm:
    return PowerLogTerm(coeff, pow, logpow, loglogpow)


def mul(u: PowerLogTerm, v: PowerLogTerm) -> PowerLogTerm:
    return PowerLogTerm(
        u.coeff * v.coeff,
        u.pow + v.pow,
        u.logpow + v.logpow,
        u.loglogpow + v.loglogpow,
    )


def power(u: PowerLogTerm, e: Rational) -> PowerLogTerm:
    e = as_rational(e)
    return PowerLogTerm(u.coeff ** float(e), u.pow * e, u.logpow * e, u.loglogpow * e)


def compare(u: PowerLogTerm, v: PowerLogTerm) -> int:
    """-1, 0 or 1 as ``u`` is eventually smaller than, equal to, or larger than ``v``."""
    ku, kv = u.sort_key(), v.sort_key()
    return (ku > kv) - (ku < kv)


def min_asym(u: PowerLogTerm, v: PowerLogTerm) -> PowerLogTerm:
    return u if compare(u, v) <= 0 else v


def max_asym(u: PowerLogTerm, v: PowerLogTerm) -> PowerLogTerm:
    return u if compare(u, v) >= 0 else v


def tail_converges(u: PowerLogTerm) -> bool:
    """Whether the integral of ``u`` over ``[R, inf)`` is finite."""
    if u.pow != -1:
        return u.pow < -1
    if u.logpow != -1:
        return u.logpow < -1
    return u.loglogpow < -1


def antiderivative_asym(u: PowerLogTerm) -> PowerLogTerm:
    """Leading term of the growing antiderivative, or of the tail when it converges.

    Divergent input gives the leading order of the integral from a fixed base
    radius to ``r``; convergent input gives the leading order of the integral
    from ``r`` to infinity.  Either way the result is positive.
    """
    if u.pow != -1:
        s = u.pow + 1
        return PowerLogTerm(u.coeff / abs(float(s)), s, u.logpow, u.loglogpow)
    if u.loglogpow != 0:
        raise UnrepresentableIntegral(
            f"cannot integrate {format_term(u)}: loglog factor on an r^-1 term"
        )
    if u.logpow != -1:
        s = u.logpow + 1
        return PowerLogTerm(u.coeff / abs(float(s)), 0, s, 0)
    return PowerLogTerm(u.coeff, 0, 0, 1)


def monotone_from(u: PowerLogTerm) -> float:
    """A radius beyond which ``u`` is monotone (and its log factors are positive).

    Uses the log-derivative ``a + b/s + d/(s log s)`` with ``s = log r``.
    """
    a, b, d = (abs(float(x)) for x in u.exponents)
    s = math.e if u.loglogpow else 1.0
    if u.pow != 0:
        s = max(s, 2.0 * (b + d) / a)
    elif u.logpow != 0:
        s = max(s, math.exp(min(2.0 * d / b, 700.0)))
    return math.exp(min(s, 700.0)) * 1.0000001


# ---------------------------------------------------------------------------
# textual form

_FACTOR_RE = re.compile(
    r"^(?P<name>r|log\(r\)|loglog\(r\))(?:\^(?P<exp>\(?[-+]?\d+(?:/\d+)?(?:\.\d*)?\)?))?$"
)


def _fmt_rational(x: Fraction) -> str:
    return str(x)


def format_term(u: PowerLogTerm) -> str:
    """Render as ``c * r^a * log(r)^b * loglog(r)^d``, omitting zero log factors."""
    parts = [repr(u.coeff), f"r^{_fmt_rational(u.pow)}"]
    if u.logpow:
        parts.append(f"log(r)^{_fmt_rational(u.logpow)}")
    if u.loglogpow:
        parts.append(f"loglog(r)^{_fmt_rational(u.loglogpow)}")
    return " * ".join(parts)


def parse_term(text: str) -> PowerLogTerm:
    """Parse the textual form produced by :func:`format_term`.

    Factors may appear in any order and each at most once; a bare number is
    the coefficient.  ``r^-1/2`` reads as ``r^(-1/2)``.
    """
    coeff = 1.0
    exps = {"r": Fraction(0), "log(r)": Fraction(0), "loglog(r)": Fraction(0)}
    seen = set()
    if not text or not text.strip():
        raise ValueError("empty power-log term")
    for raw in text.split("*"):
        tok = raw.strip().replace(" ", "")
        if not tok:
            raise ValueError(f"malformed term {text!r}: empty factor")
        m = _FACTOR_RE.match(tok)
        if m is None:
            try:
                value = float(tok)
            except ValueError:
                raise ValueError(f"malformed factor {raw.strip()!r} in {text!r}") from None
            coeff *= value
            continue
        name = m.group("name")
        if name in seen:
            raise ValueError(f"factor {name} repeated in {text!r}")
        seen.add(name)
        exp = m.group("exp")
        exps[name] = as_rational(exp.strip("()")) if exp else Fraction(1)
    return PowerLogTerm(coeff, exps["r"], exps["log(r)"], exps["loglog(r)"])
