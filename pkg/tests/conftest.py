import functools

import numpy as np
import pytest

from foldpoint import ConvexConcaveParams, SolverConfig, make_bratu, make_convex_concave, solve

BENCH_N = 100
STARTS = (0.1, 1.0, 10.0)


def benchmark_problem(name):
    if name == "bratu":
        return make_bratu(BENCH_N)
    if name == "cc05":
        return make_convex_concave(BENCH_N, ConvexConcaveParams(0.5, 2.0))
    if name == "cc01":
        return make_convex_concave(BENCH_N, ConvexConcaveParams(0.1, 1.5))
    raise KeyError(name)


@functools.lru_cache(maxsize=None)
def benchmark_run(name, c, delta=1e-9, eps=1e-6):
    """MAQDSA on a benchmark from u0 = c * 1_n; cached across test modules."""
    cfg = SolverConfig(u0=np.full(BENCH_N, c), eps=eps, dir_tol=delta)
    return solve(benchmark_problem(name), cfg)


_ACCEPTANCE_LINES = []


@pytest.fixture
def acceptance_log():
    return _ACCEPTANCE_LINES


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in _ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
