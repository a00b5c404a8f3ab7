import json
import math

import pytest
from click.testing import CliRunner

from stepnls import cli
from stepnls.errors import DomainError, NewtonFailure
from stepnls.spectral import ProblemParams

SHOCK = ["--A1", "1", "--A2", "1", "--B1", "-1", "--B2", "1"]
RAR = ["--A1", "1", "--A2", "1", "--B1", "1", "--B2", "-1"]


@pytest.fixture
def run(tmp_path):
    runner = CliRunner()

    def go(*args, out=None):
        out = out or tmp_path
        return runner.invoke(cli.main, [*args, "--out", str(out)])
    return go


def test_classify_shock(run):
    r = run("classify", *SHOCK)
    assert r.exit_code == 0
    doc = json.loads(r.stdout)
    assert doc["scenario"] == "shock2"
    assert abs(doc["thresholds"]["bv"] - 2 / 7 * (2 + 3 * math.sqrt(2))) < 1e-12
    assert abs(doc["xi_E1"] - 4.82842712) < 1e-8


def test_classify_rarefaction(run):
    r = run("classify", *RAR)
    assert json.loads(r.stdout)["scenario"] == "rarefaction"


def test_domain_errors_exit_2(run):
    r = run("classify", "--A1", "0", "--A2", "1", "--B1", "-1", "--B2", "1")
    assert r.exit_code == 2
    err = json.loads(r.stderr)
    assert "A_j>0 required" in err["message"] and err["exit_code"] == 2
    r = run("classify", "--A1", "1", "--A2", "1", "--B1", "1", "--B2", "1")
    assert r.exit_code == 2 and json.loads(r.stderr)["error"] == "EqualBCase"
    assert run("solve-genus3", *SHOCK, "--xi", "0.1").exit_code == 2


def test_solver_failure_exit_3(run, monkeypatch):
    def boom(*a, **k):
        raise NewtonFailure("no convergence", residual=[0.5, -2.0])
    monkeypatch.setattr(cli, "solve_genus3_at", boom)
    r = run("solve-genus3", "--A1", "2", "--A2", "2", "--B1", "-1", "--B2", "1", "--xi", "0.1")
    assert r.exit_code == 3
    err = json.loads(r.stderr)
    assert err["error"] == "NewtonFailure" and err["last_residual"] == 2.0


def test_io_failure_exit_4(run, tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("x")
    r = run("classify", *SHOCK, out=blocker / "sub")
    assert r.exit_code == 0  # classify writes nothing
    r = run("slowdecay", *RAR, "--xi", "-2", out=blocker / "sub")
    assert r.exit_code == 4


def test_bad_options():
    r = CliRunner().invoke(cli.main, ["signature", *SHOCK, "--xi", "6", "--nx", "4"])
    assert r.exit_code == 2
    r = CliRunner().invoke(cli.main, ["classify", *SHOCK, "--format", "pdf"])
    assert r.exit_code == 2


def test_scattering_row_at_zero(run, tmp_path):
    r = run("scattering", *SHOCK, "--k", "-1:1:3")
    assert r.exit_code == 0
    lines = (tmp_path / "scattering.csv").read_text().splitlines()
    assert lines[0].startswith("k,a_re,a_im")
    rows = [dict(zip(lines[0].split(","), ln.split(","))) for ln in lines[1:]]
    assert float(rows[1]["k"]) == 0.0
    assert abs(float(rows[1]["a_re"]) - math.sqrt(2) / 2) < 1e-12
    assert float(rows[1]["detS_residual"]) < 1e-12
    # k = -1 sits where a cut meets the real axis
    assert rows[0]["detS_residual"] == "nan"
    assert json.loads(r.stdout)["points"] == 3


def test_slowdecay_sweep(run):
    r = run("slowdecay", *RAR, "--sweep", "xi=-2:2:3")
    runs = json.loads(r.stdout)["runs"]
    assert [x["c1"] for x in runs] == [1.0, 0.0, 1.0]
    assert all(abs(x["identity_residual"]) < 1e-10 for x in runs)


def test_trace_command(run, tmp_path):
    r = run("trace-genus2", *SHOCK)
    doc = json.loads(r.stdout)
    assert doc["termination"]["type"] == "alphaRealAxis"
    assert abs(doc["termination"]["xi_m"]) < 0.05
    assert doc["max_residual"] < 1e-8
    assert sorted(doc["files"]) == ["trace_genus2.csv", "trace_genus2.json"]


def test_outputs_are_byte_identical(run, tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    args = ("signature", *SHOCK, "--xi", "6", "--nx", "80", "--ny", "40")
    ra, rb = run(*args, out=a), run(*args, out=b)
    assert ra.exit_code == 0 and ra.stdout == rb.stdout
    for f in json.loads(ra.stdout)["files"]:
        assert (a / f).read_bytes() == (b / f).read_bytes()


def test_signature_reports_events(run):
    r = run("signature", *SHOCK, "--xi", "4.82842712474619", "--nx", "200", "--ny", "100",
            "--format", "json")
    run0 = json.loads(r.stdout)["runs"][0]
    assert [e["type"] for e in run0["events"]] == ["hitsE1"]


def test_normalize_records_transform(run):
    r = run("sectors", "--A1", "1", "--A2", "1", "--B1", "-3", "--B2", "1", "--normalize", "--format", "json")
    doc = json.loads(r.stdout)
    assert doc["scenario"] == "shock1"
    assert doc["transform"]["A"] == 0.5
    assert doc["normalized_from"]["B1"] == -3.0


def test_parse_sweep():
    assert list(cli.parse_sweep("xi=0:1:3")) == [0.0, 0.5, 1.0]
    for bad in ("xi=0:1", "k=0:1:3", "xi=a:1:3", "xi=0:1:0"):
        with pytest.raises(DomainError):
            cli.parse_sweep(bad)


def test_run_config_validation():
    p = ProblemParams(1, 1, -1, 1)
    for kw in ({"tol": 0}, {"grid": (8, 100)}, {"formats": ()}, {"threads": 0}):
        with pytest.raises(DomainError):
            cli.RunConfig(p, **kw)
