import io
import json

import pytest

from fracw.cli import RunConfig, Report, golden, main
from fracw.pva import parse_lambda
from fracw.dsred import FractionalDS
from fracw.liealg import make_sl


def run(*argv):
    buf = io.StringIO()
    code = main(list(argv), stdout=buf)
    return code, buf.getvalue()


BROKEN = """generators: a, b, c
{a, b} = a
{a, c} = b
"""


@pytest.mark.parametrize("argv", [
    ("verify-pva", "--preset", "virasoro"),
    ("verify-pva", "--preset", "kdv", "--c", "3/2"),
    ("verify-pva", "--algebra", "sl2", "--m", "2", "--k", "k"),
    ("ds-reduce", "--algebra", "sl2", "--m", "1", "--k", "2"),
    ("generators", "--m", "2"),
    ("kdv", "--depth", "3"),
    ("kdv", "--c", "3/2", "--depth", "4"),
    ("kdv", "--c", "q"),
    ("hierarchy", "--preset", "sl2", "--depth", "2"),
    ("kdv-from-sl2",),
    ("brst-check", "--algebra", "sl3-minimal", "--weight-bound", "2"),
])
def test_passing_commands_exit_zero(argv):
    code, out = run(*argv)
    assert code == 0, out
    assert "FAIL" not in out


def test_identity_failure_exits_one(tmp_path):
    f = tmp_path / "broken.txt"
    f.write_text(BROKEN)
    code, out = run("verify-pva", "--preset", str(f))
    assert code == 1
    assert "FAIL jacobi(a,b,c)" in out


@pytest.mark.parametrize("argv", [
    ("verify-pva", "--preset", "bogus"),
    ("hierarchy", "--preset", "bogus"),
    ("ds-reduce", "--algebra", "so5"),
    ("ds-reduce", "--algebra", "sl3-subregular"),
    ("ds-reduce", "--m", "0"),
    ("ds-reduce", "--k", "0"),
    ("ds-reduce", "--k", "1/0x"),
    ("ds-reduce", "--algebra", "missing.json"),
    ("no-such-command",),
    ("ds-reduce", "--format", "xml"),
])
def test_usage_errors_exit_two(argv, capsys):
    code, _ = run(*argv)
    assert code == 2


def test_json_config_file(tmp_path):
    f = tmp_path / "alg.json"
    f.write_text(json.dumps({"type": "sl", "n": 2, "nilpotent": "principal", "m": 2, "k": "3"}))
    code, out = run("generators", "--algebra", str(f), "--format", "json")
    doc = json.loads(out)
    assert code == 0
    assert doc["config"]["m"] == 2 and doc["config"]["k"] == "3"


def test_json_shape():
    code, out = run("verify-pva", "--preset", "virasoro", "--format", "json")
    doc = json.loads(out)
    assert code == 0
    assert doc["schema_version"] == 1
    assert doc["command"] == "verify-pva"
    assert {"config", "results", "output"} <= set(doc)
    for r in doc["results"]:
        assert set(r) <= {"name", "pass", "residual"} and r["pass"] is True


def test_json_residual_present_on_failure(tmp_path):
    f = tmp_path / "broken.txt"
    f.write_text(BROKEN)
    _, out = run("verify-pva", "--preset", str(f), "--format", "json")
    bad = [r for r in json.loads(out)["results"] if not r["pass"]]
    assert bad and all("residual" in r for r in bad)


@pytest.mark.parametrize("argv", [
    ("bracket-table", "--m", "2", "--format", "json"),
    ("hierarchy", "--preset", "kdv", "--depth", "2", "--format", "json"),
])
def test_byte_identical_reruns(argv):
    assert run(*argv) == run(*argv)


def test_bracket_table_round_trip():
    code, out = run("bracket-table", "--m", "1", "--k", "k", "--which", "2")
    assert code == 0
    W = FractionalDS(make_sl(2), 1, "k").w_algebra()
    P2 = W.presentations()[1]
    lines = [ln for ln in out.splitlines() if ln.startswith("{")]
    assert len(lines) == len(W.alg.generators) ** 2
    for ln in lines:
        lhs, rhs = ln.split(" = ", 1)
        a, _, b = lhs.strip("{}_2").partition(" L ")
        b = b.rstrip("}")
        assert parse_lambda(W.alg, rhs) == P2.stored(a, b)


def test_generators_round_trip():
    _, out = run("ds-reduce", "--m", "2", "--k", "k")
    ds = FractionalDS(make_sl(2), 2, "k")
    gens = ds.extract_generators()
    for ln in out.splitlines():
        if ln.startswith("g_"):
            nm, _, expr = ln.partition(" = ")
            assert ds.V.parse(expr) == gens[nm]


def test_report_exit_codes():
    rep = Report(RunConfig(command="x"))
    rep.check("fine", True)
    assert rep.emit(io.StringIO()) == 0
    rep.check("broken", False, "r")
    buf = io.StringIO()
    assert rep.emit(buf) == 1
    assert "FAIL broken  residual: r" in buf.getvalue()


def test_golden_loader():
    g = golden("kdv")
    assert dict(g["flows"])["h2"] == "3*u*u' + c*u'''"
    assert [k for k, _ in g["densities"]][:2] == ["h0", "h1"]
