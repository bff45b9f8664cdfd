"""Trace, result and field files, plus the multi-run comparison table.

Floats are written in shortest round-trip form (``repr``) so stored values
reload exactly, and JSON keys are sorted so identical runs give identical
bytes.
"""

from __future__ import annotations

import csv
import json
import os
from typing import Iterable, Sequence

import numpy as np

from .errors import ConfigurationError
from .particle_grid import RunTrace
from .quadrature import SampledFunction

__all__ = [
    "SCHEMA_VERSION",
    "TRACE_COLUMNS",
    "emit_trace",
    "read_trace",
    "write_field",
    "result_record",
    "write_result",
    "load_result",
    "dumps_result",
    "compare_runs",
    "format_table",
    "pivot",
]

SCHEMA_VERSION = 1
TRACE_COLUMNS = ("iteration", "best_cost", "best_l2_error")


def _f(x) -> str:
    return repr(float(x))


def emit_trace(trace: RunTrace, path) -> None:
    """One CSV row per iteration with columns ``iteration,best_cost,best_l2_error``."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(TRACE_COLUMNS)
        for r in trace.records:
            w.writerow([r.iteration, _f(r.best_cost), _f(r.best_l2_error)])


def read_trace(path) -> dict[str, np.ndarray]:
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows or tuple(rows[0]) != TRACE_COLUMNS:
        raise ConfigurationError(f"{path} is not a trace file")
    data = np.array(rows[1:], dtype=float).reshape(-1, len(TRACE_COLUMNS))
    return {c: data[:, i] for i, c in enumerate(TRACE_COLUMNS)}


def write_field(f: SampledFunction, path) -> None:
    """Node coordinates and values, one node per row in grid order."""
    nodes = f.grid.nodes
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow([f"x{k + 1}" for k in range(nodes.shape[1])] + ["value"])
        for x, v in zip(nodes, f.values):
            w.writerow([_f(c) for c in x] + [_f(v)])


def _plain(obj):
    """Numpy scalars and arrays to JSON-ready Python objects."""
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _plain(obj.tolist())
    if isinstance(obj, (np.floating, float)):
        return float(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def result_record(trace: RunTrace, *, problem: str, params: dict, config: dict,
                  wall_time: float, version: str, evaluations: int | None = None) -> dict:
    """Result of one fit: errors, iteration count, full parameter set and config echo."""
    e = trace.expansion
    cost = trace.solution.residual_cost if trace.solution is not None else trace.best_cost
    return _plain({
        "schema": SCHEMA_VERSION,
        "version": version,
        "problem": problem,
        "params": params,
        "iterations": trace.iterations,
        "stop_reason": trace.stop_reason,
        "cost": cost,
        "l2_error": float(np.sqrt(max(cost, 0.0))),
        "best_cost_trace": trace.best_cost,
        "p_app": trace.p_app,
        "alpha": e.alpha if e is not None else [],
        "directions": trace.directions if trace.directions is not None else [],
        "offsets": trace.offsets if trace.offsets is not None else [],
        "coefficients": e.ridge_coeffs if e is not None else [],
        "rank_deficient": bool(trace.solution.rank_deficient) if trace.solution is not None else False,
        "evaluations": evaluations if evaluations is not None else trace.total_evaluations,
        "wall_time": wall_time,
        "config": config,
    })


def dumps_result(record: dict) -> str:
    return json.dumps(_plain(record), indent=1, sort_keys=True) + "\n"


def write_result(record: dict, path) -> None:
    with open(path, "w") as fh:
        fh.write(dumps_result(record))


def load_result(path) -> dict:
    if os.path.isdir(path):
        path = os.path.join(path, "result.json")
    with open(path) as fh:
        rec = json.load(fh)
    if rec.get("schema") != SCHEMA_VERSION:
        raise ConfigurationError(f"{path}: result schema {rec.get('schema')!r}, expected {SCHEMA_VERSION}")
    return rec


def _param_key(params: dict):
    out = []
    for k in sorted(params):
        v = params[k]
        out.append((k, tuple(v) if isinstance(v, list) else (v,)))
    return tuple(out)


def compare_runs(paths: Iterable) -> list[dict]:
    """Rows ``(problem, params, iterations, l2_error)`` sorted by problem, then parameters."""
    rows = []
    for p in paths:
        rec = load_result(p)
        rows.append({
            "problem": rec["problem"],
            "params": rec.get("params", {}),
            "iterations": rec["iterations"],
            "l2_error": rec["l2_error"],
        })
    if not rows:
        raise ConfigurationError("nothing to compare")
    rows.sort(key=lambda r: (r["problem"], _param_key(r["params"])))
    return rows


def _fmt_params(params: dict) -> str:
    return " ".join(f"{k}={params[k]}" for k in sorted(params))


def format_table(rows: Sequence[dict], fmt: str = "text") -> str:
    """Aligned text or CSV table of compared runs."""
    head = ["problem", "params", "iterations", "l2_error"]
    body = [[r["problem"], _fmt_params(r["params"]), str(r["iterations"]), f"{r['l2_error']:.4e}"]
            for r in rows]
    if fmt == "csv":
        lines = [",".join(head)] + [",".join(f'"{c}"' if " " in c else c for c in b) for b in body]
        return "\n".join(lines) + "\n"
    widths = [max(len(x) for x in col) for col in zip(head, *body)]
    lines = ["  ".join(c.ljust(w) for c, w in zip(line, widths)).rstrip() for line in [head] + body]
    return "\n".join(lines) + "\n"


def pivot(rows: Sequence[dict], row_key: str, col_key: str) -> str:
    """L2 errors as a matrix indexed by two parameters (e.g. N down, M across)."""
    table: dict = {}
    for r in rows:
        p = r["params"]
        if row_key not in p or col_key not in p:
            raise ConfigurationError(f"run lacks parameters {row_key!r}/{col_key!r}")
        table[(p[row_key], p[col_key])] = r["l2_error"]
    rk = sorted({k[0] for k in table})
    ck = sorted({k[1] for k in table})
    head = [f"{row_key}\\{col_key}"] + [str(c) for c in ck]
    body = [[str(r)] + [f"{table[(r, c)]:.4e}" if (r, c) in table else "-" for c in ck] for r in rk]
    widths = [max(len(x) for x in col) for col in zip(head, *body)]
    return "\n".join("  ".join(c.rjust(w) for c, w in zip(line, widths)) for line in [head] + body) + "\n"
