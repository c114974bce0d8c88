"""Radial solutions of the p-Laplace inequality with gradient drift.

For a radial ``u`` the inequality reads

    r^(1-n) (r^(n-1) |u'|^(p-2) u')' + b(r) |u'|^(p-1) >= q(r) g(u)

and :func:`residual` returns left side minus right side.  :func:`shoot`
integrates the corresponding equality as an initial value problem in the
state ``(u, r^(n-1) |u'|^(p-2) u')``.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import Callable, Optional

import numpy as np
from scipy.integrate import solve_ivp

from .envelopes import ProblemSpec
from .errors import DerivativeUnavailable, MonotonicityViolation, StiffnessAbort

KINK_GUARD = 1e-6
FD_STEP = 1e-6


# ---------------------------------------------------------------------------
# candidates


class RadialCandidate:
    """A radial function ``u(r)`` valid for ``r >= r_start``."""

    r_start: float = 0.0
    exact_derivatives = False

    def u(self, r):
        raise NotImplementedError

    def du(self, r):
        raise NotImplementedError

    def d2u(self, r):
        raise NotImplementedError

    def __call__(self, r):
        return self.u(r)


@dataclass
class NumericCandidate(RadialCandidate):
    """Candidate given only by values; derivatives by central differences with step ``r*1e-6``."""

    func: Callable[[float], float]
    r_start: float = 0.0
    r_end: float = math.inf

    def u(self, r):
        r = np.asarray(r, dtype=float)
        out = np.vectorize(lambda x: float(self.func(x)), otypes=[float])(r)
        return out if out.ndim else float(out)

    def _check(self, r, reach):
        r = np.asarray(r, dtype=float)
        if np.any(r * (1 - reach) < self.r_start) or np.any(r * (1 + reach) > self.r_end):
            raise DerivativeUnavailable(
                f"central differences leave [{self.r_start}, {self.r_end}] near r={r}"
            )

    def du(self, r):
        self._check(r, FD_STEP)
        r = np.asarray(r, dtype=float)
        h = r * FD_STEP
        return (self.u(r + h) - self.u(r - h)) / (2 * h)


@dataclass
class ClosedFormSolution(RadialCandidate):
    """Explicit radial profiles with exact derivatives.

    ``shape`` is ``power`` (``max(r, r0)^e``), ``logpower``
    (``log(max(r, r0))^e``), ``exppower`` (``exp(max(r, r0)^e)``) or
    ``constant`` (``e``).
    """

    shape: str
    exponent: Fraction
    r0: float = 1.0
    family: str = ""
    exact_derivatives = True

    def __post_init__(self):
        if self.shape not in ("power", "logpower", "exppower", "constant"):
            raise ValueError(f"unknown shape {self.shape!r}")
        self.r_start = self.r0

    def _split(self, r):
        r = np.asarray(r, dtype=float)
        return r, np.maximum(r, self.r0), r > self.r0

    def u(self, r):
        r, x, _ = self._split(r)
        e = float(self.exponent)
        if self.shape == "constant":
            out = np.full_like(r, e)
        elif self.shape == "power":
            out = x**e
        elif self.shape == "logpower":
            out = np.log(x) ** e
        else:
            with np.errstate(over="ignore"):
                out = np.exp(x**e)
        return out if out.ndim else float(out)

    def du(self, r):
        r, x, outside = self._split(r)
        e = float(self.exponent)
        if self.shape == "constant":
            out = np.zeros_like(r)
        elif self.shape == "power":
            out = e * x ** (e - 1)
        elif self.shape == "logpower":
            out = e * np.log(x) ** (e - 1) / x
        else:
            with np.errstate(over="ignore"):
                out = e * x ** (e - 1) * np.exp(x**e)
        out = np.where(outside, out, 0.0)
        return out if out.ndim else float(out)

    def d2u(self, r):
        r, x, outside = self._split(r)
        e = float(self.exponent)
        if self.shape == "constant":
            out = np.zeros_like(r)
        elif self.shape == "power":
            out = e * (e - 1) * x ** (e - 2)
        elif self.shape == "logpower":
            L = np.log(x)
            out = e * L ** (e - 2) * ((e - 1) - L) / x**2
        else:
            with np.errstate(over="ignore"):
                out = (e * (e - 1) * x ** (e - 2) + e**2 * x ** (2 * e - 2)) * np.exp(x**e)
        out = np.where(outside, out, 0.0)
        return out if out.ndim else float(out)

    def describe(self) -> str:
        e = self.exponent
        if self.shape == "constant":
            return f"{e}"
        base = f"max(r, {self.r0:g})"
        return {
            "power": f"{base}^{e}",
            "logpower": f"log({base})^{e}",
            "exppower": f"exp({base}^{e})",
        }[self.shape]


@dataclass
class ManufacturedCandidate(RadialCandidate):
    """Arbitrary closed form with user-supplied derivatives."""

    u_func: Callable
    du_func: Callable
    d2u_func: Callable
    r_start: float = 0.0
    exact_derivatives = True

    def u(self, r):
        return self.u_func(r)

    def du(self, r):
        return self.du_func(r)

    def d2u(self, r):
        return self.d2u_func(r)


# ---------------------------------------------------------------------------
# residual


def _flux(du, p: float):
    """``|u'|^(p-2) u'``."""
    du = np.asarray(du, dtype=float)
    return np.sign(du) * np.abs(du) ** (p - 1)


def _operator_closed(candidate: RadialCandidate, p: float, n: int, r):
    du = np.asarray(candidate.du(r), dtype=float)
    d2u = np.asarray(candidate.d2u(r), dtype=float)
    r = np.asarray(r, dtype=float)
    ad = np.abs(du)
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        lap = ad ** (p - 2) * ((p - 1) * d2u + (n - 1) * du / r)
    # u' = 0: the flux derivative is u'' when p = 2, zero when p > 2
    zero = ad == 0
    if np.any(zero):
        if p == 2:
            at_zero = d2u
        elif p > 2:
            at_zero = np.zeros_like(d2u)
        else:
            with np.errstate(divide="ignore", invalid="ignore"):
                at_zero = np.where(d2u == 0, 0.0, np.sign(d2u) * np.inf)
        lap = np.where(zero, at_zero, lap)
    return lap, du


def _operator_numeric(candidate: NumericCandidate, p: float, n: int, r):
    r = np.asarray(r, dtype=float)
    h = r * FD_STEP
    candidate._check(r, 2.01 * FD_STEP)

    def W(x):
        return x ** (n - 1) * _flux(candidate.du(x), p)

    lap = (W(r + h) - W(r - h)) / (2 * h) / r ** (n - 1)
    return lap, np.asarray(candidate.du(r), dtype=float)


def residual(candidate: RadialCandidate, spec: ProblemSpec, r):
    """``div(|Du|^(p-2) Du) + b|Du|^(p-1) - q g(u)`` at radius ``r`` (array-friendly)."""
    p = float(spec.p)
    if candidate.exact_derivatives:
        lap, du = _operator_closed(candidate, p, spec.n, r)
    else:
        lap, du = _operator_numeric(candidate, p, spec.n, r)
    u = np.asarray(candidate.u(r), dtype=float)
    with np.errstate(over="ignore", invalid="ignore"):
        drift = np.asarray(spec.b(r), dtype=float) * np.abs(du) ** (p - 1)
        source = np.asarray(spec.q(r), dtype=float) * np.asarray(spec.g(u), dtype=float)
        out = lap + drift - source
    return out if np.ndim(out) else float(out)


@dataclass
class WitnessReport:
    passed: bool
    min_residual: float
    min_scaled_residual: float
    argmin_radius: float
    samples: int
    r_lo: float
    r_hi: float
    tol_rel: float

    def to_dict(self) -> dict:
        return {
            "result": "PASS" if self.passed else "FAIL",
            "min_residual": self.min_residual,
            "min_scaled_residual": self.min_scaled_residual,
            "argmin_radius": self.argmin_radius,
            "samples": self.samples,
            "r_lo": self.r_lo,
            "r_hi": self.r_hi,
            "tol_rel": self.tol_rel,
        }


def verify_witness(
    candidate: RadialCandidate,
    spec: ProblemSpec,
    r_lo: float,
    r_hi: float,
    samples: int = 10_000,
    tol_rel: float = 1e-9,
) -> WitnessReport:
    """Check ``residual >= -tol_rel * q g(u)`` at geometrically spaced radii.

    Radii within ``r0 * (1 + 1e-6)`` of a ``max(r, r0)`` kink are skipped.
    """
    lo = float(r_lo)
    kink = getattr(candidate, "r0", None)
    if kink is not None:
        lo = max(lo, kink * (1 + KINK_GUARD))
    if not lo < r_hi:
        raise ValueError(f"empty verification range [{lo}, {r_hi}]")
    radii = np.geomspace(lo, float(r_hi), int(samples))
    res = np.asarray(residual(candidate, spec, radii), dtype=float)
    u = np.asarray(candidate.u(radii), dtype=float)
    with np.errstate(over="ignore", invalid="ignore"):
        scale = np.abs(np.asarray(spec.q(radii), dtype=float) * np.asarray(spec.g(u), dtype=float))
        scaled = np.where(scale > 0, res / np.where(scale > 0, scale, 1.0), np.sign(res) * np.inf)
    bad = ~np.isfinite(res)
    ok = (~bad) & (res >= -tol_rel * scale)
    i = int(np.nanargmin(np.where(bad, -np.inf, res)))
    return WitnessReport(
        passed=bool(np.all(ok)),
        min_residual=float(res[i]),
        min_scaled_residual=float(np.nanmin(np.where(bad, -np.inf, scaled))),
        argmin_radius=float(radii[i]),
        samples=int(samples),
        r_lo=lo,
        r_hi=float(r_hi),
        tol_rel=tol_rel,
    )


# ---------------------------------------------------------------------------
# shooting


class Status(str, Enum):
    GLOBAL = "global"
    BLOWUP = "blowup"
    EXTINCT = "extinct"


@dataclass
class RadialSolution:
    """Grid ``(r_i, u_i, w_i)`` with ``w = |u'|^(p-2) u'`` and the run status."""

    r: np.ndarray
    u: np.ndarray
    w: np.ndarray
    p: float
    status: Status
    radius: Optional[float] = None
    settings: dict = field(default_factory=dict)

    def __post_init__(self):
        if np.any(np.diff(self.r) <= 0):
            raise ValueError("grid radii must be strictly increasing")
        if self.status is Status.BLOWUP and not self.radius > self.r[0]:
            raise ValueError("blow-up radius must exceed the start radius")

    @property
    def du(self) -> np.ndarray:
        return np.sign(self.w) * np.abs(self.w) ** (1.0 / (self.p - 1))

    @classmethod
    def from_candidate(cls, candidate: RadialCandidate, radii, p) -> "RadialSolution":
        radii = np.asarray(radii, dtype=float)
        du = np.asarray(candidate.du(radii), dtype=float) * np.ones_like(radii)
        u = np.asarray(candidate.u(radii), dtype=float) * np.ones_like(radii)
        return cls(radii, u, _flux(du, float(p)), float(p), Status.GLOBAL)

    def to_csv(self, path, spec: Optional[ProblemSpec] = None) -> None:
        du = self.du
        res = None
        if spec is not None:
            res = _grid_residual(self, spec)
        with open(path, "w", newline="") as fh:
            wr = csv.writer(fh)
            wr.writerow(["r", "u", "du", "residual"])
            for i in range(self.r.size):
                wr.writerow([
                    repr(float(self.r[i])), repr(float(self.u[i])), repr(float(du[i])),
                    "" if res is None else repr(float(res[i])),
                ])


def _grid_residual(sol: RadialSolution, spec: ProblemSpec) -> np.ndarray:
    """Residual on a shot grid from the flux derivative by finite differences."""
    p, n = sol.p, spec.n
    if sol.r.size < 3:
        return np.full(sol.r.shape, np.nan)
    W = sol.r ** (n - 1) * sol.w
    dW = np.gradient(W, sol.r)
    with np.errstate(over="ignore", invalid="ignore"):
        lap = dW / sol.r ** (n - 1)
        return lap + np.asarray(spec.b(sol.r)) * np.abs(sol.du) ** (p - 1) - np.asarray(spec.q(sol.r)) * np.asarray(spec.g(sol.u))


def shoot(
    spec: ProblemSpec,
    u0: float,
    r_start: float,
    r_max: float,
    rtol: float = 1e-10,
    blowup_factor: float = 1e12,
    step_floor: float = 1e-12,
    method: str = "LSODA",
) -> RadialSolution:
    """Integrate the radial equality from ``u(r_start) = u0``, ``u'(r_start) = 0``.

    Stops with ``BLOWUP`` once ``u`` exceeds ``blowup_factor * u0`` or the step
    collapses below ``r * step_floor`` while ``u`` is still growing; with
    ``EXTINCT`` if ``u`` reaches zero; otherwise runs to ``r_max``.
    """
    if not u0 > 0:
        raise ValueError("u0 must be positive")
    if not 0 < r_start < r_max:
        raise ValueError("need 0 < r_start < r_max")
    p = float(spec.p)
    n = spec.n
    inv = 1.0 / (p - 1)
    threshold = blowup_factor * u0

    def du_of(r, W):
        x = W / r ** (n - 1)
        return math.copysign(abs(x) ** inv, x)

    def rhs(r, y):
        u, W = y
        du = du_of(r, W)
        ug = max(u, 0.0)
        dW = r ** (n - 1) * (float(spec.q(r)) * float(spec.g(ug)) - float(spec.b(r)) * abs(du) ** (p - 1))
        return [du, dW]

    def ev_blow(r, y):
        return y[0] - threshold

    ev_blow.terminal = True
    ev_blow.direction = 1

    def ev_zero(r, y):
        return y[0]

    ev_zero.terminal = True
    ev_zero.direction = -1

    scale_W = max(u0, 1e-300) ** (p - 1) * r_start ** (n - 2)
    atol = [rtol * 1e-6 * u0, rtol * 1e-6 * scale_W]
    sol = solve_ivp(
        rhs, (r_start, r_max), [u0, 0.0], method=method, rtol=rtol, atol=atol,
        events=[ev_blow, ev_zero],
    )
    r = sol.t
    u = sol.y[0]
    W = sol.y[1]
    keep = np.concatenate([[True], np.diff(r) > 0])
    r, u, W = r[keep], u[keep], W[keep]
    w = W / r ** (n - 1)
    settings = {
        "u0": u0, "r_start": r_start, "r_max": r_max, "rtol": rtol,
        "blowup_factor": blowup_factor, "step_floor": step_floor, "method": method,
    }
    if sol.status == 1 and sol.t_events[0].size:
        rb = float(sol.t_events[0][0])
        return RadialSolution(r, u, w, p, Status.BLOWUP, rb, settings)
    if sol.status == 1 and sol.t_events[1].size:
        return RadialSolution(r, u, w, p, Status.EXTINCT, float(sol.t_events[1][0]), settings)
    if sol.status == 0:
        return RadialSolution(r, u, w, p, Status.GLOBAL, float(r[-1]), settings)
    partial = RadialSolution(r, u, w, p, Status.GLOBAL, float(r[-1]), settings)
    # solver gave up: a collapsing step on a growing profile is the blow-up signature
    last_step = float(r[-1] - r[-2]) if r.size > 1 else math.inf
    if u[-1] > u0 and last_step < r[-1] * step_floor:
        return RadialSolution(r, u, w, p, Status.BLOWUP, float(r[-1]), settings)
    raise StiffnessAbort(f"integrator stopped at r={r[-1]:.6g}: {sol.message}", partial)


# ---------------------------------------------------------------------------
# growth function


@dataclass
class GrowthCurve:
    """``M(r) = u(r)`` for a radial, non-decreasing solution."""

    r: np.ndarray
    u: np.ndarray

    def __call__(self, radius):
        return np.interp(radius, self.r, self.u)

    def loglog_slope(self, r_lo: float, r_hi: float) -> float:
        """Least-squares slope of ``log M`` against ``log r`` on grid points in ``[r_lo, r_hi]``."""
        sel = (self.r >= r_lo) & (self.r <= r_hi)
        if sel.sum() < 2:
            x = np.geomspace(r_lo, r_hi, 32)
            y = self(x)
        else:
            x, y = self.r[sel], self.u[sel]
        return float(np.polyfit(np.log(x), np.log(y), 1)[0])


def max_growth(sol: RadialSolution, tol: float = 1e-9) -> GrowthCurve:
    """``M(r; u)`` for a radial solution, after checking that ``u`` never decreases."""
    if sol.status is not Status.GLOBAL:
        raise ValueError(f"max_growth needs a global solution, got {sol.status.value}")
    drops = np.diff(sol.u)
    limit = tol * max(float(np.max(np.abs(sol.u))), 1e-300)
    if np.any(drops < -limit):
        i = int(np.argmin(drops))
        raise MonotonicityViolation(
            f"u decreases by {-drops[i]:.3g} between r={sol.r[i]:.6g} and r={sol.r[i + 1]:.6g}"
        )
    return GrowthCurve(sol.r.copy(), sol.u.copy())
