import csv
import io
import json
import subprocess
import sys

import numpy as np
import pytest

from foldpoint.cli import ConfigError, main, parse_u0
from foldpoint.results import (
    RESULT_KEYS, TRACE_COLUMNS, ResultFormatError, dumps_result, loads_result, parse_trace_csv,
    result_document, trace_csv,
)

from conftest import benchmark_run

BRATU = ["--problem", "bratu", "--n", "100", "--eps", "1e-6", "--delta", "1e-9"]
CC05 = ["--problem", "convex-concave", "--n", "100", "--q", "0.5", "--gamma", "2",
        "--eps", "1e-6", "--delta", "1e-9"]


def _rows(text):
    return list(csv.DictReader(io.StringIO(text)))


@pytest.fixture(scope="module")
def bratu_result(tmp_path_factory):
    d = tmp_path_factory.mktemp("bratu")
    out, trace = d / "r.json", d / "t.csv"
    code = main(["solve", *BRATU, "--algorithm", "maqdsa", "--u0", "const:1.0",
                 "-o", str(out), "--trace", str(trace)])
    return code, out, trace


def test_solve_bratu(bratu_result):
    code, out, trace = bratu_result
    assert code == 0
    doc = json.loads(out.read_text())
    assert list(doc) == RESULT_KEYS
    assert doc["status"] == "Converged"
    assert doc["lambda_star"] == pytest.approx(3.513652, abs=1e-5)
    assert doc["params"] == {}
    rows = _rows(trace.read_text())
    assert list(rows[0]) == TRACE_COLUMNS
    lams = [float(r["lambda"]) for r in rows]
    assert np.all(np.diff(lams) >= 0)
    assert len(rows) == doc["iterations"]


def test_solve_convex_concave_stdout(capsys):
    assert main(["solve", *CC05]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["lambda_star"] == pytest.approx(11.643872, abs=1e-5)
    assert doc["params"] == {"q": 0.5, "gamma": 2.0}


def test_bad_q_exit_code(capsys):
    assert main(["solve", "--problem", "convex-concave", "--n", "10", "--q", "1.5", "--gamma", "2"]) == 3
    assert "0 < q < 1" in capsys.readouterr().err


@pytest.mark.parametrize("argv", [
    ["solve", "--problem", "bratu"],
    ["solve", "--problem", "bratu", "--n", "10", "--u0", "const:0"],
    ["solve", "--problem", "bratu", "--n", "10", "--u0", "const:-2"],
    ["solve", "--problem", "bratu", "--n", "10", "--u0", "banana"],
    ["solve", "--problem", "bratu", "--n", "10", "--eps", "0"],
    ["solve", "--problem", "convex-concave", "--n", "10"],
    ["solve", "--problem", "perron-file"],
    ["solve", "--problem", "nope", "--n", "10"],
    ["solve", "--problem", "bratu", "--n", "ten"],
])
def test_configuration_errors(argv):
    # argparse failures exit directly; validation failures return the code
    try:
        code = main(argv)
    except SystemExit as exc:
        code = exc.code
    assert code == 3


def test_max_iter_exit_code(tmp_path):
    assert main(["solve", *BRATU, "--max-iter", "3", "-o", str(tmp_path / "r.json")]) == 2
    assert json.loads((tmp_path / "r.json").read_text())["status"] == "MaxIter"


def test_u0_file(tmp_path):
    path = tmp_path / "u0.txt"
    path.write_text("\n".join(["0.5"] * 8) + "\n\n")
    np.testing.assert_array_equal(parse_u0(f"file:{path}", 8), np.full(8, 0.5))
    with pytest.raises(ConfigError):
        parse_u0(f"file:{path}", 9)
    with pytest.raises(ConfigError):
        parse_u0(f"file:{tmp_path / 'missing.txt'}", 8)


def test_perron_file(tmp_path, capsys):
    m = tmp_path / "A.txt"
    m.write_text("2 1\n1 2\n")
    assert main(["solve", "--problem", "perron-file", "--matrix", str(m), "--eps", "1e-10",
                 "--delta", "1e-12"]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["lambda_star"] == pytest.approx(3.0, abs=1e-8)
    assert doc["params"] == {"matrix": str(m)}


def test_verify_converged(bratu_result, tmp_path):
    _, out, _ = bratu_result
    report = tmp_path / "v.json"
    assert main(["verify", str(out), "-o", str(report)]) == 0
    rep = json.loads(report.read_text())
    assert rep["failed"] == []
    assert rep["transversality"] > 0


def test_verify_with_refine(bratu_result, capsys):
    _, out, _ = bratu_result
    assert main(["verify", str(out), "--refine"]) == 0
    rep = json.loads(capsys.readouterr().out)
    assert rep["refined_lambda"] == pytest.approx(3.513652, abs=1e-6)


def test_verify_corrupted_file(bratu_result, tmp_path, capsys):
    _, out, _ = bratu_result
    bad = tmp_path / "bad.json"
    text = out.read_text()
    bad.write_text(text[: len(text) // 2])
    assert main(["verify", str(bad)]) == 3
    assert "parse error" in capsys.readouterr().err


def test_verify_missing_field(bratu_result, tmp_path):
    _, out, _ = bratu_result
    doc = json.loads(out.read_text())
    del doc["psi_star"]
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps(doc))
    assert main(["verify", str(bad)]) == 3


def test_verify_fabricated_result(bratu_result, tmp_path, capsys):
    _, out, _ = bratu_result
    doc = json.loads(out.read_text())
    doc["u_star"] = np.random.default_rng(0).uniform(0.1, 2.0, 100).tolist()
    fake = tmp_path / "fake.json"
    fake.write_text(json.dumps(doc))
    assert main(["verify", str(fake)]) == 4
    assert "residual_F" in capsys.readouterr().err


def test_verify_missing_file(tmp_path):
    assert main(["verify", str(tmp_path / "none.json")]) == 3


def test_sweep_delta(tmp_path):
    out = tmp_path / "sweep.csv"
    assert main(["sweep-delta", *CC05, "--u0", "const:1.0", "--deltas", "1e-9,1e-10,1e-11,1e-12",
                 "-o", str(out)]) == 0
    rows = _rows(out.read_text())
    assert [float(r["delta"]) for r in rows] == [1e-9, 1e-10, 1e-11, 1e-12]
    assert all(r["status"] == "Converged" for r in rows)
    lams = [float(r["lambda"]) for r in rows]
    assert max(lams) - min(lams) <= 1e-7
    diffs = [float(r["u_diff_inf"]) for r in rows]
    assert all(a >= b for a, b in zip(diffs, diffs[1:]))
    assert diffs[-1] == 0.0


def test_sweep_single_delta(capsys):
    assert main(["sweep-delta", "--problem", "bratu", "--n", "20", "--deltas", "1e-9"]) == 0
    assert len(_rows(capsys.readouterr().out)) == 1


def test_compare_init(capsys, monkeypatch):
    monkeypatch.setenv("FOLDPOINT_THREADS", "3")
    argv = ["compare-init", "--problem", "convex-concave", "--n", "100", "--q", "0.1",
            "--gamma", "1.5", "--delta", "1e-9", "--starts", "const:0.1,const:1,const:10"]
    assert main(argv) == 0
    rows = _rows(capsys.readouterr().out)
    assert [r["u0"] for r in rows] == ["const:0.1", "const:1", "const:10"]
    assert all(r["status"] == "Converged" for r in rows)
    lams = [float(r["lambda"]) for r in rows]
    assert max(lams) - min(lams) <= 1e-4


def test_compare_init_infeasible_start(capsys):
    assert main(["compare-init", "--problem", "bratu", "--n", "10", "--starts", "const:0,const:1"]) == 0
    rows = _rows(capsys.readouterr().out)
    assert rows[0]["status"] == "ConfigError"
    assert rows[1]["status"] == "Converged"


def test_result_round_trip():
    res = benchmark_run("bratu", 1.0)
    doc = result_document(res, problem="bratu", n=100, params={}, algorithm="maqdsa", eps=1e-6,
                          delta=1e-9, u0_spec="const:1.0", elapsed_ms=12.5)
    assert loads_result(dumps_result(doc)) == doc
    assert parse_trace_csv(trace_csv(res.trace)) == res.trace


@pytest.mark.parametrize("text", ["", "[1, 2]", "{\"problem\": \"bratu\"}"])
def test_loads_result_rejects(text):
    with pytest.raises(ResultFormatError):
        loads_result(text)


def test_deterministic_output(tmp_path):
    docs = []
    for k in range(2):
        out = tmp_path / f"r{k}.json"
        assert main(["solve", "--problem", "bratu", "--n", "30", "--delta", "1e-9", "-o", str(out)]) == 0
        doc = json.loads(out.read_text())
        doc.pop("elapsed_ms")
        docs.append(json.dumps(doc))
    assert docs[0] == docs[1]


def test_module_entry_point(tmp_path):
    out = tmp_path / "r.json"
    proc = subprocess.run(
        [sys.executable, "-m", "foldpoint", "solve", "--problem", "bratu", "--n", "20",
         "--delta", "1e-9", "-o", str(out)],
        capture_output=True, text=True, check=False,
    )
    assert proc.returncode == 0, proc.stderr
    raw = out.read_bytes()
    assert b"\r\n" not in raw
    assert json.loads(raw.decode("utf-8"))["status"] == "Converged"
