"""Result JSON / trace CSV emission and parsing."""

from __future__ import annotations

import csv
import io
import json
import os
import tempfile

import numpy as np

from .solver import DirectionKind, IterationRecord, Status, TurningPointResult

TRACE_COLUMNS = ["k", "lambda", "eps_k", "active_count", "dir_value", "tau", "direction_kind", "step_norm"]

RESULT_KEYS = [
    "problem", "n", "params", "algorithm", "eps", "delta", "u0_spec", "lambda_star",
    "u_star", "psi_star", "status", "iterations", "residual_max", "dir_value_final", "elapsed_ms",
]


class ResultFormatError(ValueError):
    """A result document is malformed or incomplete."""


def result_document(result: TurningPointResult, *, problem, n, params, algorithm, eps, delta,
                    u0_spec, elapsed_ms=0.0):
    return {
        "problem": problem,
        "n": int(n),
        "params": dict(params),
        "algorithm": algorithm,
        "eps": float(eps),
        "delta": float(delta),
        "u0_spec": u0_spec,
        "lambda_star": float(result.lambda_star),
        "u_star": [float(x) for x in result.u_star],
        "psi_star": [float(x) for x in result.psi_star],
        "status": result.status.value,
        "iterations": int(result.iterations),
        "residual_max": float(result.residual_max),
        "dir_value_final": float(result.dir_value_final),
        "elapsed_ms": float(elapsed_ms),
    }


def dumps_result(doc) -> str:
    return json.dumps(doc, indent=2, allow_nan=True) + "\n"


def loads_result(text: str):
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ResultFormatError(f"invalid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise ResultFormatError("result document must be a JSON object")
    missing = [k for k in RESULT_KEYS if k not in doc]
    if missing:
        raise ResultFormatError(f"missing fields: {', '.join(missing)}")
    if len(doc["u_star"]) != doc["n"] or len(doc["psi_star"]) != doc["n"]:
        raise ResultFormatError("u_star / psi_star length does not match n")
    try:
        Status(doc["status"])
    except ValueError as exc:
        raise ResultFormatError(f"unknown status {doc['status']!r}") from exc
    return doc


def trace_rows(trace):
    for rec in trace:
        yield [rec.k, repr(rec.lam), repr(rec.eps_k), rec.active_count, repr(rec.dir_value),
               repr(rec.tau), rec.direction_kind.value, repr(rec.step_norm)]


def trace_csv(trace) -> str:
    return table_csv(TRACE_COLUMNS, trace_rows(trace))


def parse_trace_csv(text: str):
    reader = csv.DictReader(io.StringIO(text))
    return [
        IterationRecord(
            k=int(r["k"]), lam=float(r["lambda"]), eps_k=float(r["eps_k"]),
            active_count=int(r["active_count"]), dir_value=float(r["dir_value"]),
            tau=float(r["tau"]), direction_kind=DirectionKind(r["direction_kind"]),
            step_norm=float(r["step_norm"]),
        )
        for r in reader
    ]


def table_csv(header, rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow(row)
    return buf.getvalue()


def write_atomic(path, text: str):
    """Write via a temporary file in the target directory, then rename."""
    path = os.fspath(path)
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(prefix=".tmp-", dir=directory)
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def load_vector(path, n=None):
    """One decimal per line; blank lines ignored."""
    with open(path, encoding="utf-8") as fh:
        values = [float(line) for line in fh if line.strip()]
    vec = np.array(values, dtype=float)
    if n is not None and vec.size != n:
        raise ValueError(f"{path}: expected {n} values, found {vec.size}")
    return vec
