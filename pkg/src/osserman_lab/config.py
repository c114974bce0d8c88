"""Scenario configuration: TOML (or JSON) with one section per profile.

Example::

    [problem]
    p = 2
    n = 3
    r0 = 1.0

    [b]
    term = "1.0 * r^0"

    [q]
    l = -2            # same as term = "1.0 * r^-2"

    [g]
    kind = "power"
    lambda = 2

    [[sweep.axis]]
    name = "l"
    start = "-3"
    stop = "1"
    steps = 9

Exponents accept integers, floats or rational strings such as ``"-1/2"``.
"""

from __future__ import annotations

import json
import math
import re
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Any, Optional

from .envelopes import (
    DEFAULT_SAMPLES,
    Nonlinearity,
    ProblemSpec,
    SymbolicProfile,
    TableProfile,
    ZeroProfile,
)
from .errors import ConfigError
from .powerlog import PowerLogTerm, as_rational, parse_term

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

TASKS = ("classify", "estimate", "verify", "shoot", "sweep")
# sweepable parameters and the profile they live in
SWEEP_PARAMS = {"k": "b", "m": "b", "l": "q", "mu": "q", "lambda": "g", "s": "g"}

_PROBLEM_KEYS = {"p", "n", "r0", "sigma", "theta", "C1", "C2", "samples"}
_PROFILE_KEYS = {"term", "coeff", "k", "m", "l", "mu", "alpha1", "alpha2", "sign", "table", "zero"}
_G_KEYS = {"kind", "lambda", "s", "table"}


@dataclass
class SweepAxis:
    name: str
    values: list

    @classmethod
    def build(cls, name: str, start, stop, steps: int) -> "SweepAxis":
        if name not in SWEEP_PARAMS:
            raise ValueError(f"unknown sweep parameter {name!r}; expected one of {sorted(SWEEP_PARAMS)}")
        a, b = as_rational(start), as_rational(stop)
        steps = int(steps)
        if steps < 1:
            raise ValueError("steps must be >= 1")
        if steps == 1:
            return cls(name, [a])
        h = (b - a) / (steps - 1)
        return cls(name, [a + i * h for i in range(steps)])


@dataclass
class Scenario:
    """A parsed configuration: the problem plus optional task sections."""

    spec: ProblemSpec
    params: dict
    raw: dict = field(repr=False)
    source: Optional[Path] = None
    sweep: list = field(default_factory=list)

    def section(self, name: str) -> dict:
        return dict(self.raw.get(name, {}))

    def with_params(self, **changes) -> "Scenario":
        """Scenario with sweep parameters replaced (profiles rebuilt from the raw config)."""
        raw = json.loads(json.dumps(self.raw, default=str))
        for key, val in changes.items():
            sec = SWEEP_PARAMS[key]
            body = raw.setdefault(sec, {})
            body.pop("zero", None)
            if "term" in body:
                t = parse_term(str(body.pop("term")))
                names = ("k", "m") if sec == "b" else ("l", "mu")
                body.update(coeff=t.coeff, **{names[0]: str(t.pow), names[1]: str(t.logpow)})
            body[key] = str(val)
        return build_scenario(raw, self.source)


# ---------------------------------------------------------------------------
# locating fields for diagnostics


def _locate(text: Optional[str], section: str, key: Optional[str]) -> str:
    if not text:
        return ""
    current = None
    sec_re = re.compile(r"^\s*\[+\s*([\w.]+)\s*\]+")
    key_re = re.compile(r"^\s*\"?(\w+)\"?\s*[=:]")
    for i, line in enumerate(text.splitlines(), 1):
        m = sec_re.match(line)
        if m:
            current = m.group(1)
            if key is None and current == section:
                return f" (line {i})"
            continue
        if key is not None and current == section:
            km = key_re.match(line)
            if km and km.group(1) == key:
                return f" (line {i})"
    return ""


class _Ctx:
    def __init__(self, text: Optional[str], source: Optional[Path]):
        self.text = text
        self.source = source

    def fail(self, section: str, key: Optional[str], msg: str):
        where = f"[{section}]" + (f".{key}" if key else "")
        prefix = f"{self.source}: " if self.source else ""
        raise ConfigError(f"{prefix}{where}: {msg}{_locate(self.text, section, key)}")


def _rational(ctx, sec, key, val) -> Fraction:
    try:
        return as_rational(val)
    except (TypeError, ValueError, ZeroDivisionError) as exc:
        ctx.fail(sec, key, f"expected a number or rational string, got {val!r} ({exc})")


def _float(ctx, sec, key, val) -> float:
    try:
        out = float(as_rational(val)) if isinstance(val, str) else float(val)
    except (TypeError, ValueError, ZeroDivisionError):
        ctx.fail(sec, key, f"expected a number, got {val!r}")
    if not math.isfinite(out):
        ctx.fail(sec, key, f"expected a finite number, got {val!r}")
    return out


def _check_keys(ctx, sec, data, allowed):
    if not isinstance(data, dict):
        ctx.fail(sec, None, "expected a table of key/value pairs")
    for key in data:
        if key not in allowed:
            ctx.fail(sec, key, f"unknown field; expected one of {sorted(allowed)}")


# ---------------------------------------------------------------------------
# profiles


def _profile(ctx, sec: str, data: dict, params: dict):
    _check_keys(ctx, sec, data, _PROFILE_KEYS)
    if data.get("zero"):
        if sec == "q":
            ctx.fail(sec, "zero", "q must be a positive profile")
        return ZeroProfile()
    if "table" in data:
        path = Path(str(data["table"]))
        if ctx.source is not None and not path.is_absolute():
            path = ctx.source.parent / path
        try:
            return TableProfile.from_csv(path, nonnegative=(sec == "q"))
        except (OSError, ValueError) as exc:
            ctx.fail(sec, "table", str(exc))
    names = ("k", "m") if sec == "b" else ("l", "mu")
    if "term" in data:
        for nm in names:
            if nm in data:
                ctx.fail(sec, nm, "give either term or exponents, not both")
        try:
            term = parse_term(str(data["term"]))
        except ValueError as exc:
            ctx.fail(sec, "term", str(exc))
    else:
        coeff = _float(ctx, sec, "coeff", data.get("coeff", 1.0))
        pw = _rational(ctx, sec, names[0], data.get(names[0], 0))
        lg = _rational(ctx, sec, names[1], data.get(names[1], 0))
        try:
            term = PowerLogTerm(coeff, pw, lg)
        except ValueError as exc:
            ctx.fail(sec, "coeff", str(exc))
    params[names[0]] = term.pow
    params[names[1]] = term.logpow
    a1 = _float(ctx, sec, "alpha1", data.get("alpha1", 1.0))
    a2 = _float(ctx, sec, "alpha2", data["alpha2"]) if "alpha2" in data else None
    sign = data.get("sign", 1)
    if sign not in (1, -1) or isinstance(sign, bool):
        ctx.fail(sec, "sign", f"expected 1 or -1, got {sign!r}")
    try:
        return SymbolicProfile(term, a1, a2, sign)
    except ValueError as exc:
        ctx.fail(sec, None, str(exc))


def _nonlinearity(ctx, data: dict, p: Fraction, params: dict) -> Nonlinearity:
    _check_keys(ctx, "g", data, _G_KEYS)
    kind = str(data.get("kind", "power"))
    if kind == "table":
        if "table" not in data:
            ctx.fail("g", "table", "kind = 'table' needs a table path")
        path = Path(str(data["table"]))
        if ctx.source is not None and not path.is_absolute():
            path = ctx.source.parent / path
        try:
            prof = TableProfile.from_csv(path, nonnegative=True)
        except (OSError, ValueError) as exc:
            ctx.fail("g", "table", str(exc))
        return Nonlinearity.numeric(prof.func, label=str(path))
    lam = _rational(ctx, "g", "lambda", data.get("lambda", 0))
    s = _rational(ctx, "g", "s", data.get("s", 0))
    params["lambda"], params["s"] = lam, s
    try:
        if kind == "power":
            if s:
                ctx.fail("g", "s", "a power nonlinearity has no log exponent; use kind = 'powerlog'")
            return Nonlinearity.power(lam)
        if kind == "powerlog":
            return Nonlinearity.power_log(lam, s)
        if kind == "critical-log":
            # t^(p-1) log(1+t)^lambda
            params["s"] = lam
            return Nonlinearity.critical_log(lam, p)
    except ValueError as exc:
        ctx.fail("g", None, str(exc))
    ctx.fail("g", "kind", f"unknown kind {kind!r}; expected power, powerlog, critical-log or table")


# ---------------------------------------------------------------------------
# entry points


def build_scenario(raw: dict, source: Optional[Path] = None, text: Optional[str] = None) -> Scenario:
    ctx = _Ctx(text, source)
    if not isinstance(raw, dict):
        raise ConfigError("configuration must be a table")
    for sec in ("problem", "q", "g"):
        if sec not in raw:
            ctx.fail(sec, None, "missing section")
    prob = raw["problem"]
    _check_keys(ctx, "problem", prob, _PROBLEM_KEYS)
    if "p" not in prob:
        ctx.fail("problem", "p", "missing field")
    if "n" not in prob:
        ctx.fail("problem", "n", "missing field")
    p = _rational(ctx, "problem", "p", prob["p"])
    params: dict[str, Any] = {}
    b = _profile(ctx, "b", raw["b"], params) if "b" in raw else ZeroProfile()
    if isinstance(b, ZeroProfile):
        params.setdefault("k", None)
    q = _profile(ctx, "q", raw["q"], params)
    g = _nonlinearity(ctx, raw["g"], p, params)
    kw = {}
    for key in ("r0", "sigma", "theta", "C1", "C2"):
        if key in prob:
            kw[key] = _float(ctx, "problem", key, prob[key])
    samples = int(prob.get("samples", DEFAULT_SAMPLES))
    n = prob["n"]
    if isinstance(n, bool) or not isinstance(n, int):
        ctx.fail("problem", "n", f"expected an integer dimension, got {n!r}")
    try:
        spec = ProblemSpec(p, n, b, q, g, samples=samples, **kw)
    except ValueError as exc:
        ctx.fail("problem", None, str(exc))

    axes = []
    sweep = raw.get("sweep", {})
    for i, ax in enumerate(sweep.get("axis", [])):
        missing = [k for k in ("name", "start", "stop", "steps") if k not in ax]
        if missing:
            ctx.fail("sweep.axis", missing[0], f"axis {i} is missing {missing}")
        try:
            axes.append(SweepAxis.build(str(ax["name"]), ax["start"], ax["stop"], ax["steps"]))
        except (ValueError, ZeroDivisionError) as exc:
            ctx.fail("sweep.axis", "name", f"axis {i}: {exc}")
        sec = SWEEP_PARAMS[axes[-1].name]
        if sec in ("b", "q") and not isinstance(b if sec == "b" else q, SymbolicProfile) and not (
            sec == "b" and isinstance(b, ZeroProfile)
        ):
            ctx.fail("sweep.axis", "name", f"axis {axes[-1].name!r} needs a symbolic [{sec}] profile")
        if sec == "g" and not g.symbolic:
            ctx.fail("sweep.axis", "name", f"axis {axes[-1].name!r} needs a built-in nonlinearity")
    if len(axes) > 2:
        ctx.fail("sweep", None, "at most two sweep axes are supported")
    return Scenario(spec, params, raw, source, axes)


def load_scenario(path) -> Scenario:
    """Read a TOML or JSON configuration file."""
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"{path}: {exc}") from None
    if path.suffix.lower() == ".json":
        try:
            raw = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
    else:
        try:
            raw = tomllib.loads(text)
        except tomllib.TOMLDecodeError as exc:
            raise ConfigError(f"{path}: {exc}") from None
    return build_scenario(raw, path, text)


def dump_toml(raw: dict) -> str:
    """Serialise the flat two-level tables used by scenario files."""
    lines = []

    def fmt(v):
        if isinstance(v, bool):
            return "true" if v else "false"
        if isinstance(v, (int, float)):
            return repr(v)
        if isinstance(v, Fraction):
            return json.dumps(str(v))
        if isinstance(v, list):
            return "[" + ", ".join(fmt(x) for x in v) + "]"
        return json.dumps(str(v))

    for sec, body in raw.items():
        if sec == "sweep":
            for ax in body.get("axis", []):
                lines.append("[[sweep.axis]]")
                lines.extend(f"{k} = {fmt(v)}" for k, v in ax.items())
                lines.append("")
            continue
        lines.append(f"[{sec}]")
        lines.extend(f"{k} = {fmt(v)}" for k, v in body.items())
        lines.append("")
    return "\n".join(lines)
