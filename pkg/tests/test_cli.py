from __future__ import annotations

import csv
import io
import json
import os
import subprocess
import sys
from fractions import Fraction
from pathlib import Path

import numpy as np
import pytest

from ultrawalk import cli
from ultrawalk import quantum_walk

GOLDEN = Path(__file__).parent / "golden"

GOLDEN_CASES = [
    ("time_average_p3_M2.csv", ["time-average", "--p", "3", "--M", "2"]),
    ("hypercube_N4.csv", ["graph", "--family", "hypercube", "--N", "4", "--time-average"]),
    ("evolve_t0.csv", ["evolve", "--p", "3", "--M", "2", "--eps", "2,1", "--t", "0"]),
    ("spectrum_p3_M2.json", ["spectrum", "--p", "3", "--M", "2", "--eps", "2,1", "--format", "json"]),
    ("limit_p2.csv", ["limit", "--p", "2", "--K", "2", "--M", "1,3"]),
    ("classical_series.csv", ["classical", "--p", "2", "--M", "2", "--eps", "2,1", "--t-grid", "0:2:5"]),
]


def run_cli(*args: str, env=None) -> subprocess.CompletedProcess:
    full_env = dict(os.environ, **(env or {}))
    return subprocess.run(
        [sys.executable, "-m", "ultrawalk", *args], capture_output=True, text=True, env=full_env
    )


def rows(text: str) -> list[dict]:
    return list(csv.DictReader(io.StringIO(text)))


def error_of(cp) -> dict:
    lines = cp.stderr.strip().splitlines()
    assert len(lines) == 1, cp.stderr
    return json.loads(lines[0])["error"]


@pytest.mark.parametrize("name, args", GOLDEN_CASES)
def test_golden_output_is_byte_identical(name, args):
    first = run_cli(*args)
    second = run_cli(*args)
    assert first.returncode == 0, first.stderr
    assert first.stdout == second.stdout
    assert first.stdout == (GOLDEN / name).read_text()


def test_help():
    cp = run_cli("--help")
    assert cp.returncode == 0
    assert "time-average" in cp.stdout


def test_time_average_rows():
    out = rows(run_cli("time-average", "--p", "3", "--M", "2").stdout)
    assert [(r["class_k"], r["class_size"], r["value_exact"]) for r in out] == [
        ("0", "1", "41/81"),
        ("1", "2", "14/81"),
        ("2", "6", "2/81"),
    ]
    for r in out:
        assert float(r["value_float"]) == float(Fraction(r["value_exact"]))


def test_floats_round_trip_at_full_precision():
    cp = run_cli("evolve", "--p", "3", "--M", "3", "--eps", "3,2,1", "--t", "1.7")
    wp = quantum_walk.WalkParams.from_couplings(3, (3.0, 2.0, 1.0))
    expected = quantum_walk.probabilities(wp, 1.7).values
    got = [float(r["value_float"]) for r in rows(cp.stdout)]
    assert got == list(expected)


def test_json_mirror_matches_csv():
    args = ["time-average", "--p", "2", "--M", "3"]
    doc = json.loads(run_cli(*args, "--format", "json").stdout)
    assert doc["schema_version"] == 1
    assert doc["command"] == "time-average"
    csv_rows = rows(run_cli(*args).stdout)
    assert [r["value_exact"] for r in csv_rows] == [r["value_exact"] for r in doc["rows"]]
    assert [float(r["value_float"]) for r in csv_rows] == [r["value_float"] for r in doc["rows"]]


def test_output_file(tmp_path):
    out = tmp_path / "ta.csv"
    cp = run_cli("time-average", "--p", "3", "--M", "2", "--output", str(out))
    assert cp.returncode == 0 and cp.stdout == ""
    assert out.read_text() == (GOLDEN / "time_average_p3_M2.csv").read_text()


@pytest.mark.parametrize(
    "args, kind",
    [
        (["evolve", "--p", "3"], "validation"),
        (["bogus"], "validation"),
        (["evolve", "--p", "3", "--M", "2", "--eps", "1,2", "--t", "1"], "validation"),
        (["evolve", "--p", "3", "--M", "2", "--eps", "x", "--t", "1"], "validation"),
        (["time-average", "--p", "1", "--M", "2"], "domain"),
        (["graph", "--family", "cycle", "--N", "2", "--time-average"], "domain"),
        (["decay-fit", "--p", "2", "--M", "40", "--landscape", "linear", "--w0", "1", "--alpha", "1",
          "--window", "100,1e6"], "validation"),
    ],
)
def test_invalid_specs_exit_2_with_one_json_line(args, kind):
    cp = run_cli(*args)
    assert cp.returncode == 2
    err = error_of(cp)
    assert err["code"] == 2 and err["kind"] == kind and err["message"]


def test_resource_cap_exit_3_and_env_override():
    args = ["spectrum", "--p", "3", "--M", "3", "--eps", "3,2,1", "--self-check"]
    assert run_cli(*args).returncode == 0
    cp = run_cli(*args, env={cli.CAP_ENV: "10"})
    assert cp.returncode == 3
    err = error_of(cp)
    assert err["code"] == 3 and "10" in err["message"]
    cp = run_cli(*args, env={cli.CAP_ENV: "ten"})
    assert cp.returncode == 2


def test_self_check_mismatch_exits_4(monkeypatch, capsys):
    monkeypatch.setattr(quantum_walk, "evolve_oracle", lambda wp, t: np.zeros(wp.tp.n_sites))
    code = cli.run(["evolve", "--p", "3", "--M", "2", "--eps", "2,1", "--t", "1", "--self-check"])
    assert code == 4
    err = json.loads(capsys.readouterr().err)["error"]
    assert err["kind"] == "numerical"


def test_self_checks_pass():
    for args in (
        ["evolve", "--p", "2", "--M", "4", "--eps", "8,4,2,1", "--t-grid", "0:100:20", "--self-check"],
        ["classical", "--p", "3", "--M", "3", "--eps", "3,2,1", "--t-grid", "0:5:20", "--self-check"],
        ["spectrum", "--p", "5", "--M", "3", "--landscape", "exponential", "--w0", "1", "--alpha", "1",
         "--self-check"],
    ):
        cp = run_cli(*args)
        assert cp.returncode == 0, cp.stderr


def test_config_precedence(tmp_path):
    cfg = tmp_path / "run.ini"
    cfg.write_text(
        "[defaults]\np = 3\nM = 5\n\n[landscape]\nkind = explicit\neps = 2,1\n\n[evolve]\nM = 2\nt = 0\n"
    )
    # command section beats defaults; landscape section supplies eps
    cp = run_cli("--config", str(cfg), "evolve")
    assert cp.returncode == 0, cp.stderr
    assert [float(r["value_float"]) for r in rows(cp.stdout)] == [1.0, 0.0, 0.0]
    # flags beat the config
    cp = run_cli("--config", str(cfg), "evolve", "--t", "1.0")
    assert float(rows(cp.stdout)[0]["value_float"]) < 1.0
    # defaults apply where the command section is silent
    cp = run_cli("--config", str(cfg), "time-average")
    assert len(rows(cp.stdout)) == 6
    bad = tmp_path / "bad.ini"
    bad.write_text("[evolve]\nspeed = 3\n")
    assert run_cli("--config", str(bad), "evolve").returncode == 2
    assert run_cli("--config", str(tmp_path / "missing.ini"), "evolve").returncode == 2


def test_series_output():
    out = rows(run_cli("evolve", "--p", "3", "--M", "2", "--eps", "2,1", "--t-grid", "0:10:11").stdout)
    assert {r["series"] for r in out} == {"P_V0", "P_V1", "P_V2"}
    by_t = {}
    for r in out:
        by_t.setdefault(r["x"], {})[r["series"]] = float(r["y"])
    for vals in by_t.values():
        assert vals["P_V0"] + 2 * vals["P_V1"] + 6 * vals["P_V2"] == pytest.approx(1.0, abs=1e-12)


def test_decay_fit_json_report():
    cp = run_cli("decay-fit", "--p", "2", "--M", "40", "--landscape", "linear", "--w0", "1", "--alpha", "2",
                 "--ref-level", "0", "--window", "100,1e6", "--model", "power", "--format", "json")
    doc = json.loads(cp.stdout)
    (rec,) = doc["rows"]
    assert set(rec) == {"model", "slope", "intercept", "residual", "t_min", "t_max"}
    assert rec["slope"] == pytest.approx(-0.5, rel=0.15)


def test_graph_and_compare_commands():
    out = rows(run_cli("graph", "--family", "complete", "--N", "4", "--time-average").stdout)
    assert [r["value_exact"] for r in out] == ["5/8", "1/8"]
    out = rows(run_cli("graph", "--family", "line", "--t", "25", "--nmax", "5").stdout)
    assert float(out[-1]["value_float"]) == pytest.approx(1.0, abs=1e-10)
    out = rows(run_cli("mean-distance", "--p", "3", "--M", "2").stdout)
    assert out[0]["value_exact"] == out[1]["value_exact"] == "64/243"
    assert run_cli("graph", "--family", "cycle", "--N", "5").returncode == 2
