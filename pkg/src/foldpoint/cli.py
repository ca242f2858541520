"""Command-line front end: ``foldpoint solve | sweep-delta | verify | compare-init``.

Exit codes: 0 success, 2 run ended without convergence, 3 configuration or
input error, 4 verification failure.
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import FoldpointError, InvalidParams
from .problems import ConvexConcaveParams, make_bratu, make_convex_concave, make_linear_perron
from .results import (
    ResultFormatError, dumps_result, load_vector, loads_result, result_document, table_csv,
    trace_csv, write_atomic,
)
from .solver import Algorithm, SolverConfig, Status, delta_sweep, sweep_threads, solve
from .verification import verify

log = logging.getLogger("foldpoint")

EXIT_OK = 0
EXIT_NOT_CONVERGED = 2
EXIT_CONFIG = 3
EXIT_VERIFY_FAILED = 4

PROBLEMS = ("bratu", "convex-concave", "perron-file")


class ConfigError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


@dataclass
class RunSpec:
    problem: str
    n: Optional[int]
    q: Optional[float]
    gamma: Optional[float]
    matrix: Optional[str]
    algorithm: str
    eps: float
    delta: float
    u0_spec: str
    max_iter: int


def parse_u0(spec: str, n: int):
    kind, _, value = spec.partition(":")
    if kind == "const":
        try:
            c = float(value)
        except ValueError:
            raise ConfigError(f"bad u0 constant {value!r}") from None
        if not c > 0:
            raise ConfigError(f"u0 const:{value} must be positive (S is the open positive orthant)")
        return np.full(n, c)
    if kind == "file":
        try:
            return load_vector(value, n)
        except (OSError, ValueError) as exc:
            raise ConfigError(str(exc)) from None
    raise ConfigError(f"u0 must be const:<c> or file:<path>, got {spec!r}")


def build_problem(spec: RunSpec):
    try:
        if spec.problem == "bratu":
            return make_bratu(_require_n(spec.n)), {}
        if spec.problem == "convex-concave":
            if spec.q is None or spec.gamma is None:
                raise ConfigError("convex-concave needs --q and --gamma")
            params = ConvexConcaveParams(spec.q, spec.gamma)
            return make_convex_concave(_require_n(spec.n), params), {"q": spec.q, "gamma": spec.gamma}
        if spec.problem == "perron-file":
            if not spec.matrix:
                raise ConfigError("perron-file needs --matrix")
            try:
                A = np.loadtxt(spec.matrix, ndmin=2)
            except (OSError, ValueError) as exc:
                raise ConfigError(f"cannot read matrix: {exc}") from None
            if spec.n is not None and A.shape[0] != spec.n:
                raise ConfigError(f"matrix is {A.shape[0]}x{A.shape[1]} but --n {spec.n}")
            return make_linear_perron(A), {"matrix": spec.matrix}
    except InvalidParams as exc:
        raise ConfigError(str(exc)) from None
    raise ConfigError(f"unknown problem {spec.problem!r}")


def _require_n(n):
    if n is None or n < 2:
        raise ConfigError("--n must be an integer >= 2")
    return n


def _spec_from_args(args) -> RunSpec:
    if not args.eps > 0:
        raise ConfigError("--eps must be positive")
    if not args.delta > 0:
        raise ConfigError("--delta must be positive")
    return RunSpec(
        problem=args.problem, n=args.n, q=args.q, gamma=args.gamma, matrix=args.matrix,
        algorithm=args.algorithm, eps=args.eps, delta=args.delta, u0_spec=args.u0,
        max_iter=args.max_iter,
    )


def _config(spec: RunSpec, u0, delta=None):
    return SolverConfig(
        u0=u0, algorithm=Algorithm(spec.algorithm), eps=spec.eps,
        dir_tol=spec.delta if delta is None else delta, max_outer_iters=spec.max_iter,
    )


def _run_one(problem, params, spec: RunSpec, u0_spec, delta=None):
    u0 = parse_u0(u0_spec, problem.n)
    if not problem.feasible(u0):
        raise ConfigError("u0 is outside the feasible set")
    t0 = time.perf_counter()
    result = solve(problem, _config(spec, u0, delta))
    elapsed = 1e3 * (time.perf_counter() - t0)
    doc = result_document(
        result, problem=spec.problem, n=problem.n, params=params, algorithm=spec.algorithm,
        eps=spec.eps, delta=spec.delta if delta is None else delta, u0_spec=u0_spec,
        elapsed_ms=elapsed,
    )
    return result, doc


def cmd_solve(args) -> int:
    spec = _spec_from_args(args)
    problem, params = build_problem(spec)
    result, doc = _run_one(problem, params, spec, spec.u0_spec)
    text = dumps_result(doc)
    if args.output:
        write_atomic(args.output, text)
    else:
        sys.stdout.write(text)
    if args.trace:
        write_atomic(args.trace, trace_csv(result.trace))
    for event in result.events:
        log.info(event)
    if result.status is Status.CONVERGED:
        return EXIT_OK
    print(f"run ended with status {result.status.value}", file=sys.stderr)
    return EXIT_NOT_CONVERGED


def _parse_floats(text, what):
    try:
        values = [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise ConfigError(f"bad {what} list {text!r}") from None
    if not values:
        raise ConfigError(f"empty {what} list")
    return values


def cmd_sweep_delta(args) -> int:
    spec = _spec_from_args(args)
    deltas = _parse_floats(args.deltas, "delta")
    if any(d <= 0 for d in deltas):
        raise ConfigError("deltas must be positive")
    problem, _ = build_problem(spec)
    u0 = parse_u0(spec.u0_spec, problem.n)
    runs = delta_sweep(problem, _config(spec, u0), deltas)
    ref = min(runs, key=lambda pair: pair[0])[1].u_star
    rows = []
    for delta, res in runs:
        diff = res.u_star - ref
        rows.append([repr(delta), res.iterations, repr(res.lambda_star),
                     repr(float(np.linalg.norm(diff))), repr(float(np.max(np.abs(diff)))),
                     res.status.value])
    text = table_csv(["delta", "iters", "lambda", "u_diff_2", "u_diff_inf", "status"], rows)
    _emit(args.output, text)
    return EXIT_OK


def cmd_compare_init(args) -> int:
    spec = _spec_from_args(args)
    starts = [s.strip() for s in args.starts.split(",") if s.strip()]
    if not starts:
        raise ConfigError("empty --starts list")
    problem, params = build_problem(spec)

    def one(u0_spec):
        try:
            res, _ = _run_one(problem, params, spec, u0_spec)
        except ConfigError:
            return [u0_spec, "", "", "ConfigError"]
        return [u0_spec, res.iterations, repr(res.lambda_star), res.status.value]

    threads = sweep_threads()
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            rows = list(pool.map(one, starts))
    else:
        rows = [one(s) for s in starts]
    _emit(args.output, table_csv(["u0", "iters", "lambda", "status"], rows))
    return EXIT_OK


def _emit(path, text):
    if path:
        write_atomic(path, text)
    else:
        sys.stdout.write(text)


def problem_from_document(doc, matrix=None):
    params = doc.get("params") or {}
    spec = RunSpec(
        problem=doc["problem"], n=doc["n"], q=params.get("q"), gamma=params.get("gamma"),
        matrix=matrix or params.get("matrix"), algorithm=doc["algorithm"], eps=doc["eps"],
        delta=doc["delta"], u0_spec=doc["u0_spec"], max_iter=1,
    )
    problem, _ = build_problem(spec)
    return problem


def cmd_verify(args) -> int:
    try:
        with open(args.result, encoding="utf-8") as fh:
            doc = loads_result(fh.read())
    except OSError as exc:
        raise ConfigError(f"cannot read result: {exc}") from None
    except ResultFormatError as exc:
        raise ConfigError(f"parse error: {exc}") from None
    problem = problem_from_document(doc, args.matrix)
    u = np.array(doc["u_star"], dtype=float)
    psi = np.array(doc["psi_star"], dtype=float)
    if not problem.feasible(u):
        print("verification failed: u_star is outside the feasible set", file=sys.stderr)
        return EXIT_VERIFY_FAILED
    report = verify(problem, u, psi, doc["lambda_star"], refine=args.refine)
    tol_res = args.tol_residual
    if tol_res is None:
        tol_res = doc["eps"] * float(np.max(problem.G(u)))
    tol_ker = args.tol_kernel if args.tol_kernel is not None else math.sqrt(doc["delta"])
    out = report.to_dict()
    out["tol_residual"] = tol_res
    out["tol_kernel"] = tol_ker
    failures = []
    if not report.residual_F <= tol_res:
        failures.append("residual_F")
    if not report.kernel_residual <= tol_ker:
        failures.append("kernel_residual")
    if not report.transversality > 0:
        failures.append("transversality")
    out["failed"] = failures
    _emit(args.output, json.dumps(out, indent=2) + "\n")
    if failures:
        print(f"verification failed: {', '.join(failures)}", file=sys.stderr)
        return EXIT_VERIFY_FAILED
    return EXIT_OK


def _add_run_args(p):
    p.add_argument("--problem", choices=PROBLEMS, required=True)
    p.add_argument("--n", type=int)
    p.add_argument("--q", type=float)
    p.add_argument("--gamma", type=float)
    p.add_argument("--matrix", help="whitespace-separated matrix file for perron-file")
    p.add_argument("--algorithm", choices=[a.value for a in Algorithm], default="maqdsa")
    p.add_argument("--eps", type=float, default=1e-6)
    p.add_argument("--delta", type=float, default=1e-11)
    p.add_argument("--u0", default="const:1.0", help="const:<c> or file:<path>")
    p.add_argument("--max-iter", type=int, default=10_000)


def build_parser():
    parser = _Parser(prog="foldpoint", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("solve", help="locate a maximal turning point")
    _add_run_args(p)
    p.add_argument("--output", "-o")
    p.add_argument("--trace")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("sweep-delta", help="one run per direction tolerance")
    _add_run_args(p)
    p.add_argument("--deltas", default="1e-9,1e-10,1e-11,1e-12")
    p.add_argument("--output", "-o")
    p.set_defaults(func=cmd_sweep_delta)

    p = sub.add_parser("verify", help="check a result file against the turning-point conditions")
    p.add_argument("result")
    p.add_argument("--output", "-o")
    p.add_argument("--matrix")
    p.add_argument("--tol-residual", type=float)
    p.add_argument("--tol-kernel", type=float)
    p.add_argument("--refine", action="store_true", help="also run Newton on the branching system")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("compare-init", help="one run per initial point")
    _add_run_args(p)
    p.add_argument("--starts", default="const:0.1,const:1,const:10")
    p.add_argument("--output", "-o")
    p.set_defaults(func=cmd_compare_init)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except FoldpointError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
