"""Command-line scenario runner.

``osserman-lab <task> --config FILE [--out DIR]`` with task one of
``classify``, ``estimate``, ``verify``, ``shoot``, ``sweep``.  Every run
writes ``report.json``; tasks add ``bounds.csv``, ``solutions/*.csv`` or
``phase.csv`` plus a gnuplot script.

Exit status: 0 on success, 2 when ``--strict`` and some verdict is
Inconclusive, 1 on errors.
"""

from __future__ import annotations

import argparse
import csv
import datetime as _dt
import itertools
import json
import logging
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from fractions import Fraction
from pathlib import Path
from typing import Optional

import numpy as np

from . import __version__
from .config import TASKS, Scenario, load_scenario
from .criteria import THEOREM_TAGS, Outcome, evaluate, witness_status
from .errors import OssermanLabError, StiffnessAbort
from .estimates import (
    CONSTANT_NOTE,
    BoundKind,
    bounds_table,
    growth_bound,
    invert_growth_log,
    write_bounds_csv,
)
from .powerlog import as_rational
from .radial import ClosedFormSolution, RadialSolution, shoot, verify_witness

log = logging.getLogger("osserman_lab")

OUTCOME_CODES = {
    Outcome.TRIVIAL.value: 0,
    Outcome.LOWER.value: 1,
    Outcome.MIN.value: 2,
    Outcome.UPPER.value: 3,
    Outcome.INCONCLUSIVE.value: 4,
    "Error": -1,
}


# ---------------------------------------------------------------------------
# report helpers


def _clean(obj):
    """JSON-safe copy: Fractions as strings, non-finite floats as strings."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, Fraction):
        return str(obj)
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if math.isfinite(v) else ("inf" if v > 0 else "-inf" if v < 0 else "nan")
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def write_report(path: Path, report: dict, timestamp: Optional[str] = None) -> None:
    """Write ``report`` with the timestamp isolated on the second line."""
    if not report:
        raise ValueError("empty report")
    body = json.dumps(_clean(report), indent=2, sort_keys=True)
    ts = timestamp or _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds")
    path.write_text("{\n" + f'  "timestamp": {json.dumps(ts)},\n' + body[2:] + "\n")


def describe_spec(spec) -> dict:
    return {
        "p": str(spec.p),
        "n": spec.n,
        "b": spec.b.describe(),
        "q": spec.q.describe(),
        "g": spec.g.describe(),
        "r0": spec.r0,
        "sigma": spec.sigma,
        "theta": spec.theta,
        "C1": spec.C1,
        "C2": spec.C2,
    }


def _verdict_dict(verdict) -> dict:
    d = verdict.to_dict()
    for tag in [d["applied"], *d["also"]]:
        if tag not in THEOREM_TAGS:
            raise OssermanLabError(f"internal error: unknown result tag {tag!r}")
    return d


# ---------------------------------------------------------------------------
# tasks


def task_classify(sc: Scenario, out: Path, opts) -> dict:
    verdict = evaluate(sc.spec, tol=opts.tol)
    wit, why = witness_status(sc.spec) if sc.spec.symbolic else (None, "numeric profiles")
    return {
        "verdict": _verdict_dict(verdict),
        "witness": wit.describe() if wit is not None else None,
        "witness_note": why,
        "_inconclusive": verdict.outcome is Outcome.INCONCLUSIVE,
    }


def _radii(section: dict, R_star: float) -> list:
    if "radii" in section:
        return [float(r) for r in section["radii"]]
    lo = float(section.get("r_min", max(R_star, 1e2)))
    hi = float(section.get("r_max", max(1e6, 10 * lo)))
    pts = int(section.get("points", 9))
    return [float(x) for x in np.geomspace(lo, hi, pts)]


def task_estimate(sc: Scenario, out: Path, opts) -> dict:
    spec = sc.spec
    verdict = evaluate(spec, tol=opts.tol)
    rep = {"verdict": _verdict_dict(verdict), "constant_note": CONSTANT_NOTE,
           "_inconclusive": verdict.outcome is Outcome.INCONCLUSIVE}
    if verdict.outcome in (Outcome.TRIVIAL, Outcome.INCONCLUSIVE):
        rep["bounds"] = []
        rep["note"] = f"no growth estimate for outcome {verdict.outcome.value}"
        return rep
    C = opts.constant_C
    bounds = [growth_bound(spec, C=C, verdict=verdict)]
    if verdict.outcome is Outcome.LOWER and verdict.also:
        bounds.append(growth_bound(spec, BoundKind.MIN, C=C, verdict=verdict))
    section = sc.section("estimate")
    radii = _radii(section, max(b.R_star for b in bounds))
    entries = []
    for b in bounds:
        entries.append({
            "kind": b.kind.value,
            "applied": b.applied,
            "C": b.C,
            "R_star": b.R_star,
            "rate": b.rate.to_dict() if b.rate is not None else None,
            "log_M": [{"r": r, "log_M": invert_growth_log(b, r)} for r in radii],
        })
    rep["bounds"] = entries
    strongest = [e for e in entries if e["rate"] is not None]
    if len(strongest) == 2:
        rep["form_comparison"] = _compare_forms(spec)
    write_bounds_csv(out / "bounds.csv", bounds_table(bounds, radii))
    rep["files"] = ["bounds.csv"]
    return rep


def _compare_forms(spec) -> str:
    from .estimates import symbolic_rate_info

    return symbolic_rate_info(spec).note


def _witness_from(sc: Scenario):
    section = sc.section("witness") or sc.section("verify")
    if "shape" in section:
        return ClosedFormSolution(
            str(section["shape"]), as_rational(section["exponent"]),
            float(section.get("r0", sc.spec.r0)), str(section.get("family", "")),
        )
    wit, why = witness_status(sc.spec)
    if wit is None:
        raise OssermanLabError(f"no witness for this problem: {why}")
    return wit


def task_verify(sc: Scenario, out: Path, opts) -> dict:
    wit = _witness_from(sc)
    section = {**sc.section("witness"), **sc.section("verify")}
    r_lo = float(section.get("r_lo", wit.r0))
    r_hi = float(section.get("r_hi", 1e6 * wit.r0))
    samples = int(section.get("samples", 10_000))
    tol_rel = float(section.get("tol_rel", 1e-9))
    rep = verify_witness(wit, sc.spec, r_lo, r_hi, samples, tol_rel)
    sol_dir = out / "solutions"
    sol_dir.mkdir(exist_ok=True)
    lo = wit.r0 * (1 + 1e-6)
    grid = np.geomspace(max(r_lo, lo), r_hi, 200)
    RadialSolution.from_candidate(wit, grid, sc.spec.p).to_csv(sol_dir / "witness.csv", sc.spec)
    return {"witness": wit.describe(), "family": wit.family, **rep.to_dict(),
            "files": ["solutions/witness.csv"]}


def task_shoot(sc: Scenario, out: Path, opts) -> dict:
    section = sc.section("shoot")
    u0s = section.get("u0", [1.0])
    if not isinstance(u0s, list):
        u0s = [u0s]
    r_start = float(section.get("r_start", sc.spec.r0))
    r_max = float(section.get("r_max", 1e6 * sc.spec.r0))
    kw = {k: float(section[k]) for k in ("rtol", "blowup_factor", "step_floor") if k in section}
    sol_dir = out / "solutions"
    sol_dir.mkdir(exist_ok=True)
    runs = []
    for i, u0 in enumerate(u0s):
        name = f"solutions/shoot_{i}.csv"
        try:
            sol = shoot(sc.spec, float(u0), r_start, r_max, **kw)
            status, radius = sol.status.value, sol.radius
        except StiffnessAbort as exc:
            sol, status, radius = exc.partial, "aborted", None
            log.warning("shot %d aborted: %s", i, exc)
        if sol is not None:
            sol.to_csv(out / name, sc.spec)
        runs.append({
            "u0": float(u0),
            "status": status,
            "radius": radius,
            "u_end": float(sol.u[-1]) if sol is not None else None,
            "settings": sol.settings if sol is not None else {},
            "file": name if sol is not None else None,
        })
    return {"runs": runs, "r_start": r_start, "r_max": r_max}


def _sweep_cell(sc: Scenario, names, values, tol):
    try:
        cell = sc.with_params(**dict(zip(names, values)))
        v = evaluate(cell.spec, tol=tol)
        return {"outcome": v.outcome.value, "applied": v.applied}
    except (OssermanLabError, ValueError) as exc:
        return {"outcome": "Error", "applied": "", "error": str(exc)}


def _threads() -> int:
    env = os.environ.get("OSSERMAN_LAB_THREADS")
    cap = os.cpu_count() or 1
    if env:
        try:
            cap = max(1, int(env))
        except ValueError:
            raise OssermanLabError(f"OSSERMAN_LAB_THREADS must be an integer, got {env!r}") from None
    return cap


def emit_phase_map(out: Path, names: list, cells: list) -> list:
    """Write ``phase.csv`` and a gnuplot companion script; returns file names."""
    with open(out / "phase.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow([*names, *(f"{n}_float" for n in names), "code", "outcome", "applied"])
        prev = None
        for c in cells:
            if len(names) == 2 and prev is not None and c["values"][0] != prev:
                w.writerow([])  # gnuplot scan separator
            prev = c["values"][0]
            w.writerow([*(str(v) for v in c["values"]), *(repr(float(v)) for v in c["values"]),
                        OUTCOME_CODES[c["outcome"]], c["outcome"], c["applied"]])
    k = len(names)
    lines = [
        "# companion script for phase.csv",
        'set datafile separator ","',
        "set key off",
        'set cbrange [-1:4]',
        'set cbtics ("Error" -1, "Trivial" 0, "Lower" 1, "Min" 2, "Upper" 3, "Inconclusive" 4)',
        f'set xlabel "{names[0]}"',
    ]
    if k == 2:
        lines += [
            f'set ylabel "{names[1]}"',
            "set palette maxcolors 6",
            f"plot 'phase.csv' every ::1 using {k + 1}:{k + 2}:{2 * k + 1} with points pt 5 ps 2 palette",
        ]
    else:
        lines += [
            'set ylabel "outcome code"',
            f"plot 'phase.csv' every ::1 using {k + 1}:{2 * k + 1} with linespoints pt 7",
        ]
    (out / "phase.gp").write_text("\n".join(lines) + "\n")
    return ["phase.csv", "phase.gp"]


def task_sweep(sc: Scenario, out: Path, opts) -> dict:
    if not sc.sweep:
        raise OssermanLabError("sweep task needs at least one [[sweep.axis]]")
    names = [a.name for a in sc.sweep]
    grid = list(itertools.product(*(a.values for a in sc.sweep)))
    workers = min(_threads(), len(grid))
    with ThreadPoolExecutor(max_workers=workers) as pool:
        results = list(pool.map(lambda vals: _sweep_cell(sc, names, vals, opts.tol), grid))
    cells = [{"values": list(vals), **res} for vals, res in zip(grid, results)]
    files = emit_phase_map(out, names, cells)
    transitions = []
    for i, name in enumerate(names):
        for a, b in zip(cells, cells[1:]):
            same_rest = all(a["values"][j] == b["values"][j] for j in range(len(names)) if j != i)
            if same_rest and a["values"][i] != b["values"][i] and a["outcome"] != b["outcome"]:
                transitions.append({"axis": name, "from": a["values"], "to": b["values"],
                                    "outcomes": [a["outcome"], b["outcome"]]})
    return {
        "axes": {a.name: [str(v) for v in a.values] for a in sc.sweep},
        "cells": [{**c, "values": [str(v) for v in c["values"]]} for c in cells],
        "transitions": [{**t, "from": [str(v) for v in t["from"]], "to": [str(v) for v in t["to"]]}
                        for t in transitions],
        "files": files,
        "_inconclusive": any(c["outcome"] == Outcome.INCONCLUSIVE.value for c in cells),
    }


_RUNNERS = {
    "classify": task_classify,
    "estimate": task_estimate,
    "verify": task_verify,
    "shoot": task_shoot,
    "sweep": task_sweep,
}


# ---------------------------------------------------------------------------
# entry point


def _parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="osserman-lab", description=__doc__.split("\n")[0])
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = ap.add_subparsers(dest="task", required=True)
    for task in TASKS:
        sp = sub.add_parser(task, help=f"run the {task} task")
        sp.add_argument("--config", required=True, type=Path, help="TOML or JSON scenario file")
        sp.add_argument("--out", type=Path, default=Path("out"), help="output directory (default: out)")
        sp.add_argument("--tol", type=float, default=1e-8, help="quadrature tolerance")
        sp.add_argument("--constant-C", type=float, default=1.0, dest="constant_C",
                        help="the undetermined constant C in the estimates (default 1)")
        sp.add_argument("--sigma", type=float, help="override the annulus ratio sigma")
        sp.add_argument("--theta", type=float, help="override the nonlinearity window theta")
        sp.add_argument("--strict", action="store_true", help="exit 2 on any Inconclusive verdict")
    return ap


def run(scenario: Scenario, task: str, out: Path, opts, timestamp: Optional[str] = None) -> int:
    out.mkdir(parents=True, exist_ok=True)
    body = _RUNNERS[task](scenario, out, opts)
    inconclusive = body.pop("_inconclusive", False)
    report = {
        "tool": "osserman-lab",
        "version": __version__,
        "task": task,
        "config": str(scenario.source) if scenario.source else None,
        "problem": describe_spec(scenario.spec),
        task: body,
    }
    write_report(out / "report.json", report, timestamp)
    return 2 if (inconclusive and opts.strict) else 0


def main(argv=None) -> int:
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s: %(message)s")
    opts = _parser().parse_args(argv)
    try:
        sc = load_scenario(opts.config)
        changes = {k: getattr(opts, k) for k in ("sigma", "theta") if getattr(opts, k) is not None}
        if changes:
            sc.spec = sc.spec.with_(**changes)
            for k, v in changes.items():
                sc.raw["problem"][k] = v
        if not (opts.constant_C > 0 and math.isfinite(opts.constant_C)):
            raise OssermanLabError("--constant-C must be positive")
        return run(sc, opts.task, opts.out, opts)
    except (OssermanLabError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
