"""Adaptive quadrature and convergence classification of improper tails."""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import Callable, NamedTuple, Optional

import numpy as np

from .errors import IntegrandError
from .powerlog import PowerLogTerm

DEFAULT_TOL = 1e-8
DEFAULT_MAX_WINDOWS = 24
DEFAULT_GUARD = 0.05

# Gauss-Kronrod 7/15 nodes and weights (QUADPACK qk15), nodes on [0, 1).
_XGK = np.array([
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
])
_WGK = np.array([
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
])
_WG = np.array([
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
])

_NODES = np.concatenate([-_XGK[:-1], _XGK[::-1]])
_KW = np.concatenate([_WGK[:-1], _WGK[::-1]])
# Gauss points are the odd-indexed Kronrod nodes plus the centre.
_GW = np.zeros(15)
_GW[[1, 3, 5]] = _WG[:3]
_GW[[9, 11, 13]] = _WG[2::-1]
_GW[7] = _WG[3]


class QuadResult(NamedTuple):
    value: float
    error: float
    converged: bool = True


def _make_evaluator(f: Callable) -> Callable[[np.ndarray], np.ndarray]:
    """Wrap ``f`` to accept node arrays whether or not it is vectorised."""
    state = {"vectorised": None}

    def scalar_eval(x):
        return np.array([float(f(float(xi))) for xi in x])

    def ev(x):
        if state["vectorised"] is None:
            try:
                with np.errstate(all="ignore"):
                    y = np.asarray(f(x), dtype=float)
                state["vectorised"] = y.shape == x.shape
            except (TypeError, ValueError):
                state["vectorised"] = False
            if not state["vectorised"]:
                y = scalar_eval(x)
        elif state["vectorised"]:
            with np.errstate(all="ignore"):
                y = np.asarray(f(x), dtype=float)
        else:
            y = scalar_eval(x)
        if not np.all(np.isfinite(y)):
            bad = x[~np.isfinite(y)][0]
            raise IntegrandError(f"integrand is not finite at {bad!r}")
        return y

    return ev


def _gk15(ev, a: float, b: float) -> tuple[float, float]:
    half = 0.5 * (b - a)
    centre = 0.5 * (a + b)
    y = ev(centre + half * _NODES)
    k = half * float(_KW @ y)
    g = half * float(_GW @ y)
    return k, abs(k - g)


def integrate_finite(
    f: Callable,
    a: float,
    b: float,
    tol: float = DEFAULT_TOL,
    max_subdivisions: int = 2000,
    relative: bool = False,
) -> QuadResult:
    """Integrate ``f`` over ``[a, b]`` by globally adaptive Gauss-Kronrod bisection.

    The per-panel error is the raw ``|K15 - G7|`` difference, which
    overestimates the true error for smooth integrands.  The target is
    ``error <= tol * (1 + |value|)``, or ``error <= tol * |value|`` with
    ``relative=True``.  When the panel budget runs out the best estimate is
    returned with ``converged=False``.
    """
    a, b = float(a), float(b)
    if not a < b:
        raise ValueError(f"need a < b, got [{a}, {b}]")
    ev = _make_evaluator(f)
    k, e = _gk15(ev, a, b)
    # heap of (-error, left, right, value); left endpoints break ties deterministically
    heap = [(-e, a, b, k)]
    total, err = k, e
    n = 1
    floor = 0.0 if relative else 1.0
    while err > tol * (floor + abs(total)) and err > 0:
        if n >= max_subdivisions:
            return QuadResult(total, err, False)
        neg_e, lo, hi, val = heapq.heappop(heap)
        mid = 0.5 * (lo + hi)
        if not lo < mid < hi:
            heapq.heappush(heap, (neg_e, lo, hi, val))
            return QuadResult(total, err, False)
        k1, e1 = _gk15(ev, lo, mid)
        k2, e2 = _gk15(ev, mid, hi)
        heapq.heappush(heap, (-e1, lo, mid, k1))
        heapq.heappush(heap, (-e2, mid, hi, k2))
        n += 1
        total += k1 + k2 - val
        err += e1 + e2 + neg_e
        if n % 64 == 0:
            total = math.fsum(item[3] for item in heap)
            err = math.fsum(-item[0] for item in heap)
    total = math.fsum(item[3] for item in heap)
    err = math.fsum(-item[0] for item in heap)
    return QuadResult(total, err, True)


class Verdict(str, Enum):
    CONVERGENT = "convergent"
    DIVERGENT = "divergent"
    UNDECIDED = "undecided"


@dataclass
class IntegralClassification:
    """Outcome of a convergence test on an improper integral.

    ``value``/``error`` are set for numerically convergent integrals; ``rate``
    is a fitted integrand model for divergent ones.  Symbolic classifications
    (``source == "symbolic"``) carry the exact integrand term instead.
    """

    verdict: Verdict
    value: Optional[float] = None
    error: Optional[float] = None
    rate: Optional[PowerLogTerm] = None
    source: str = "numeric"
    note: str = ""
    windows: list = field(default_factory=list, repr=False)

    @property
    def convergent(self) -> bool:
        return self.verdict is Verdict.CONVERGENT

    @property
    def divergent(self) -> bool:
        return self.verdict is Verdict.DIVERGENT

    @property
    def undecided(self) -> bool:
        return self.verdict is Verdict.UNDECIDED

    def to_dict(self) -> dict:
        out = {"verdict": self.verdict.value, "source": self.source}
        if self.value is not None:
            out["value"] = self.value
            out["error"] = self.error
        if self.rate is not None:
            from .powerlog import format_term

            out["rate"] = format_term(self.rate)
        if self.note:
            out["note"] = self.note
        return out


def _fit(x: np.ndarray, y: np.ndarray, fixed_slope: Optional[float] = None):
    """Least squares for ``y = c + e*x + beta*log(x)``; returns (c, e, beta, max_residual)."""
    if fixed_slope is None:
        A = np.column_stack([np.ones_like(x), x, np.log(x)])
        coef, *_ = np.linalg.lstsq(A, y, rcond=None)
        c, e, beta = coef
    else:
        A = np.column_stack([np.ones_like(x), np.log(x)])
        coef, *_ = np.linalg.lstsq(A, y - fixed_slope * x, rcond=None)
        c, beta = coef
        e = fixed_slope
    resid = y - (c + e * x + beta * np.log(x))
    return float(c), float(e), float(beta), float(np.max(np.abs(resid)))


def _tail_sum(c: float, e: float, beta: float, x_next: float, step: float) -> float:
    """Sum of the window model ``exp(c + e*x + beta*log x)`` for windows from ``x_next`` on."""
    if e < 0:
        total = 0.0
        j0 = 0
        chunk = 4096
        while j0 < 2_000_000:
            xs = x_next + step * np.arange(j0, j0 + chunk)
            terms = np.exp(c + e * xs + beta * np.log(xs))
            total += float(terms.sum())
            if terms[-1] <= 1e-17 * max(total, 1e-300):
                break
            j0 += chunk
        return total
    # e == 0, beta < -1: integral approximation of the slowly decaying sum
    x_half = x_next - 0.5 * step
    return math.exp(c) * x_half ** (beta + 1) / (abs(beta + 1) * step)


_CRITICAL_SLOPE = 5e-3


def classify_tail(
    f: Callable,
    a: float,
    tol: float = DEFAULT_TOL,
    max_windows: int = DEFAULT_MAX_WINDOWS,
    guard: float = DEFAULT_GUARD,
    log_guard: float = 0.25,
) -> IntegralClassification:
    """Decide whether the integral of a non-negative ``f`` over ``[a, inf)`` converges.

    Integrates over doubling windows ``[a 2^j, a 2^(j+1)]`` and fits
    ``log W_j ~ c + e*x_j + beta*log(x_j)`` with ``x_j`` the log of the window's
    geometric centre.  ``e`` estimates ``pow + 1`` of a power-log integrand and
    is trusted outside ``|e| < guard``.  Inside that band a fit with the slope
    pinned to zero must agree with it; a near-zero slope defers to the pinned
    log exponent ``beta``, again with a guard.  Anything else is Undecided.
    """
    a = float(a)
    if not a > 0:
        raise ValueError("classify_tail needs a > 0")
    step = math.log(2.0)
    sums, errs = [], []
    for j in range(max_windows):
        lo, hi = a * 2.0**j, a * 2.0 ** (j + 1)
        res = integrate_finite(f, lo, hi, tol=tol)
        sums.append(res.value)
        errs.append(res.error)
    W = np.array(sums)
    quad_err = float(np.sum(errs))
    partial = math.fsum(sums)
    x = np.log(a * np.sqrt(2.0)) + step * np.arange(max_windows)

    if np.any(W < -max(quad_err, 1e-300)):
        return IntegralClassification(Verdict.UNDECIDED, note="integrand takes negative values", windows=sums)
    tail_zero = W[max_windows // 2:] <= 0.0
    if np.all(tail_zero):
        return IntegralClassification(
            Verdict.CONVERGENT, value=partial, error=quad_err + 1e-300, windows=sums,
            note="integrand vanishes on the later windows",
        )
    if np.any(W <= 0.0):
        return IntegralClassification(Verdict.UNDECIDED, note="integrand vanishes on isolated windows", windows=sums)

    skip = min(4, max_windows // 4)
    xs, ys = x[skip:], np.log(W[skip:])
    if np.any(xs <= 1.0):
        # log(x) feature needs x > 1, i.e. windows beyond r = e
        keep = xs > 1.0
        xs, ys = xs[keep], ys[keep]
    if xs.size < 6:
        return IntegralClassification(Verdict.UNDECIDED, note="too few windows beyond r = e", windows=sums)

    c, e, beta, resid = _fit(xs, ys)
    if resid > 0.1:
        return IntegralClassification(
            Verdict.UNDECIDED, note=f"window sums are not power-log like (residual {resid:.3g})", windows=sums
        )
    if abs(e) < guard:
        c0, _, b0, r0 = _fit(xs, ys, fixed_slope=0.0)
        pinned_ok = r0 <= 0.1 and abs(b0 + 1.0) >= log_guard
        if abs(e) <= _CRITICAL_SLOPE:
            if not pinned_ok:
                return IntegralClassification(
                    Verdict.UNDECIDED, windows=sums,
                    note=f"near-critical integrand (slope {e:+.3g}, log exponent {b0:+.3g})",
                )
            c, e, beta, resid = c0, 0.0, b0, r0
        elif pinned_ok and (e > 0) != (b0 > -1.0):
            # over a finite range a small slope and a log factor mimic each other
            return IntegralClassification(
                Verdict.UNDECIDED, windows=sums,
                note=f"near-critical integrand: slope {e:+.3g} and log exponent {b0:+.3g} disagree",
            )
    rate = PowerLogTerm(
        math.exp(c) / step,
        Fraction(e - 1.0).limit_denominator(1000),
        Fraction(beta).limit_denominator(1000),
    ) if math.isfinite(math.exp(c)) and math.exp(c) > 0 else None
    if e > 0 or (e == 0 and beta > -1):
        return IntegralClassification(Verdict.DIVERGENT, rate=rate, windows=sums)
    tail = _tail_sum(c, e, beta, float(x[-1] + step), step)
    return IntegralClassification(
        Verdict.CONVERGENT,
        value=partial + tail,
        error=quad_err + 0.5 * tail + 1e-15 * abs(partial),
        rate=rate,
        windows=sums,
    )


def ko_integrand(spec):
    """``t -> (g_theta(t) t)^(-1/p)``, vectorised for the built-in families."""
    from .envelopes import g_theta_vec

    inv_p = -1.0 / float(spec.p)

    def h(t):
        t = np.asarray(t, dtype=float)
        with np.errstate(divide="ignore", over="ignore"):
            out = (g_theta_vec(spec, t) * t) ** inv_p
        return out if out.ndim else float(out)

    return h


def classify_growth_integral(
    spec,
    which: str = "KO",
    tol: float = DEFAULT_TOL,
    max_windows: int = DEFAULT_MAX_WINDOWS,
    guard: float = DEFAULT_GUARD,
) -> IntegralClassification:
    """Classify the integral of ``(g_theta(t) t)^(-1/p)`` over ``[1, inf)``.

    ``which`` only labels the question: ``"KO"`` asks for convergence,
    ``"KO-complement"`` for divergence; the computation is the same.
    """
    if which not in ("KO", "KO-complement"):
        raise ValueError(f"unknown growth integral {which!r}")
    return classify_tail(ko_integrand(spec), 1.0, tol=tol, max_windows=max_windows, guard=guard)
