import io
import json
import math
from pathlib import Path

import pytest
from hypothesis import given, settings, strategies as st

from chebmel import __version__
from chebmel.cli import run
from chebmel.families import remark1_families
from chebmel.report import (FORMATS, Report, certificate_from_report, certificate_report,
                            emit, empty_report, parse, zero_report)
from chebmel.verify import check_ect
from chebmel.zeros import count_zeros

MODELS = Path(__file__).resolve().parent.parent / "models"


def cli(*argv):
    out = io.StringIO()
    code = run([str(a) for a in argv], stdout=out)
    return code, out.getvalue()


# -- exit codes ---------------------------------------------------------------------

def test_verify_ect_cos_family():
    code, out = cli("verify-ect", "--config", MODELS / "cos_full_2.json")
    assert code == 0
    rep = json.loads(out)
    assert rep["passed"] is True and rep["kind"] == "certificate"


def test_verify_ect_remark1_fails_with_witness():
    code, out = cli("verify-ect", "--config", MODELS / "remark1_first.json")
    assert code == 1
    cert = certificate_from_report(parse(out))
    leaf = cert.failing()[0]
    assert leaf.witnesses and leaf.witnesses[0]["kind"] == "sign-change"


def test_verify_ct_inline_family():
    code, _ = cli("verify-ct", "--family", '{"kind": "trig", "variant": "sin-full", "m": 3}')
    assert code == 0


def test_prop8_case_i():
    code, out = cli("prop8", "--case", "i", "--m", "1", "--trials", "20")
    assert code == 0
    p = json.loads(out)["payload"]
    assert p["bound"] == 4 and p["realized_count"] == 4


@pytest.mark.parametrize("model", ["system9_m2.json", "system10_case_i_m1.json",
                                   "system11_a1_b1_m1.json"])
def test_melnikov_models(model):
    code, out = cli("melnikov", "--config", MODELS / model, "--format", "csv")
    assert code == 0
    assert "location,multiplicity,residual" in out.splitlines()


def test_melnikov_sweep_csv():
    code, out = cli("melnikov", "--config", MODELS / "system9_m2.json", "--sweep", "9",
                    "--derivative", "--format", "csv")
    assert code == 0
    body = [ln for ln in out.splitlines() if not ln.startswith("#")]
    assert body[0] == "rho,M1,dM1" and len(body) == 10


def test_realize_system9():
    code, out = cli("realize", "--system", "9", "--m", "2", "--targets", "0.3", "0.7")
    assert code == 0


def test_identities_suite():
    code, out = cli("identities", "--suite", "eq37", "--format", "text")
    assert code == 0 and "passed: true" in out


@pytest.mark.parametrize("argv", [
    [],
    ["verify-ect"],
    ["verify-ect", "--bogus"],
    ["melnikov"],
    ["prop8", "--case", "i", "--m", "1", "--trials", "-1"],
    ["verify-ect", "--family", '{"kind": "trig", "variant": "tan-full", "m": 2}'],
    ["verify-ect", "--family", "{not json"],
    ["identities", "--suite", "eq37", "--format", "xml"],
])
def test_usage_errors(argv):
    assert cli(*argv)[0] == 2


def test_non_convergence_exit():
    fam = '{"kind": "expr", "members": ["1", "log(t)"], "domain": [-1, 1]}'
    assert cli("realize", "--family", fam, "--targets", "0.5")[0] == 3


def test_jobs_environment_override(monkeypatch):
    monkeypatch.setenv("CHEB_JOBS", "0")
    assert cli("identities", "--suite", "eq37", "--jobs", "4")[0] == 2
    monkeypatch.setenv("CHEB_JOBS", "2")
    assert cli("identities", "--suite", "eq37", "--jobs", "0")[0] == 0


# -- determinism and headers -----------------------------------------------------------

@pytest.mark.parametrize("argv", [
    ["verify-ct", "--family", '{"kind": "trig", "variant": "mixed-full", "m": 2}', "--seed", "7"],
    ["prop8", "--case", "ii", "--m", "1", "--trials", "15", "--seed", "3"],
    ["melnikov", "--config", str(MODELS / "system11_a1_b1_m1.json"), "--format", "csv"],
])
def test_byte_identical_reruns(argv, tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    assert cli(*argv, "--out", a)[0] == cli(*argv, "--out", b)[0]
    assert a.read_bytes() == b.read_bytes()


def test_report_header_fields():
    _, out = cli("verify-ect", "--config", MODELS / "cos_full_2.json", "--seed", "12")
    d = json.loads(out)
    assert d["version"] == __version__
    assert d["seed"] == 12
    assert d["case"] == "cos-full m=2"
    assert d["tolerances"]
    _, out = cli("identities", "--suite", "eq37")
    assert json.loads(out)["seed"] == 0


def test_config_file_and_flag_precedence(tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"family": {"kind": "trig", "variant": "cos-full", "m": 1},
                               "seed": 4}))
    _, out = cli("verify-ct", "--config", cfg)
    assert json.loads(out)["seed"] == 4
    _, out = cli("verify-ct", "--config", cfg, "--seed", "9")
    assert json.loads(out)["seed"] == 9


# -- serialization -----------------------------------------------------------------------

@pytest.mark.parametrize("fmt", FORMATS)
def test_empty_document(fmt):
    r = empty_report()
    text = emit(r, fmt)
    assert parse(text, fmt) == r


def test_zero_report_csv_header():
    z = count_zeros(lambda y: y * y - 0.25, (0.0, 1.0))
    text = emit(zero_report(z, "demo", 0), "csv")
    lines = text.splitlines()
    header = next(ln for ln in lines if not ln.startswith("#"))
    assert header == "location,multiplicity,residual"
    back = parse(text, "csv")
    assert back.rows[0][0] == z.zeros[0].location and back.rows[0][1] == 1


@pytest.mark.parametrize("fmt", FORMATS)
def test_certificate_round_trip(fmt):
    cert = check_ect(remark1_families()[1], 120, window=(-0.9, 50.0))
    rep = certificate_report(cert, "remark1 second", 0)
    back = parse(emit(rep, fmt), fmt)
    assert back == rep
    assert certificate_from_report(back).to_dict() == cert.to_dict()


def test_special_floats_survive():
    rep = Report("x", payload={"a": math.inf, "b": -math.inf}, columns=["v"], rows=[[1e-300]])
    for fmt in FORMATS:
        back = parse(emit(rep, fmt), fmt)
        assert back.payload == {"a": math.inf, "b": -math.inf}
        assert back.rows == [[1e-300]]


@pytest.mark.parametrize("fmt", FORMATS)
def test_unicode_line_separators_survive(fmt):
    # str.splitlines would also break on these
    rep = Report("x", "a\x85b", payload={"s": ["\x85", "\u2028", "\x1c", "\r"]})
    assert parse(emit(rep, fmt), fmt) == rep


names = st.text(alphabet="abcdefghijklmnopqrstuvwxyz_", min_size=1, max_size=8)
finite = st.floats(allow_nan=False, allow_infinity=False)
scalars = st.one_of(finite, st.integers(-10**12, 10**12), st.booleans())
json_values = st.recursive(st.one_of(scalars, st.none(), st.text(max_size=10)),
                           lambda kids: st.one_of(st.lists(kids, max_size=4),
                                                  st.dictionaries(names, kids, max_size=4)),
                           max_leaves=12)


@st.composite
def reports(draw):
    ncol = draw(st.integers(0, 4))
    cols = draw(st.lists(names, min_size=ncol, max_size=ncol, unique=True))
    rows = draw(st.lists(st.lists(scalars, min_size=ncol, max_size=ncol), max_size=5)) \
        if ncol else []
    return Report(draw(names), draw(st.text(alphabet="abc xyz-=", max_size=12)),
                  draw(st.one_of(st.none(), st.integers(0, 2**31))),
                  draw(st.dictionaries(names, finite, max_size=3)),
                  draw(st.dictionaries(names, json_values, max_size=4)), cols, rows,
                  draw(st.one_of(st.none(), st.booleans())))


@settings(max_examples=150, deadline=None)
@given(reports(), st.sampled_from(FORMATS))
def test_round_trip_property(rep, fmt):
    assert parse(emit(rep, fmt), fmt) == rep
    assert emit(parse(emit(rep, fmt), fmt), fmt) == emit(rep, fmt)
