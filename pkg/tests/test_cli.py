import json
from fractions import Fraction as F

import pytest

from lecplastic.cli import main, read_profile
from lecplastic.export import OperatorExport
from lecplastic.plasticity import decide, verdict_from_dict, verdict_to_dict
from lecplastic.profile import FailureKind

BAD_COLLISION = {
    "name": "collide",
    "components": [
        {"kind": "atom", "value": "3/2", "multiplicity": 1},
        {"kind": "sequence", "limit": "1", "direction": "decreasing", "gap": "1/2", "ratio": "1/2"},
    ],
}


def write(tmp_path, doc, name="p.json"):
    path = tmp_path / name
    path.write_text(doc if isinstance(doc, str) else json.dumps(doc))
    return str(path)


@pytest.mark.parametrize("name, code", [
    ("two-atoms", 3), ("inc2-dec1", 3), ("atom1-inc2", 3), ("unit-ball", 0), ("balanced-at-1", 0),
])
def test_decide_exit_codes(name, code, capsys):
    assert main(["decide", f"bundled:{name}"]) == code
    out = capsys.readouterr().out
    assert name in out and ("NOT PLASTIC" in out) == (code == 3)


def test_decide_json_round_trip(capsys):
    assert main(["decide", "bundled:two-atoms", "--json"]) == 3
    doc = json.loads(capsys.readouterr().out)
    assert doc["format_version"] == 1 and doc["verdict"] == "not_plastic"
    v = verdict_from_dict(doc)
    assert v == decide(read_profile("bundled:two-atoms"))
    assert v.certificate.kind is FailureKind.TWO_INFINITE_ATOMS
    assert json.loads(json.dumps(verdict_to_dict(v))) == {k: doc[k] for k in doc if k != "profile"}


def test_validation_error_exit_1(tmp_path, capsys):
    assert main(["decide", write(tmp_path, BAD_COLLISION)]) == 1
    assert "COLLISION" in capsys.readouterr().err
    assert main(["verify", write(tmp_path, BAD_COLLISION)]) == 1


@pytest.mark.parametrize("doc", ["{oops", '{"name": "x", "components": [{"kind": "atom"}]}'])
def test_parse_error_exit_2(tmp_path, doc):
    assert main(["decide", write(tmp_path, doc)]) == 2


def test_missing_file_exit_2(tmp_path):
    assert main(["decide", str(tmp_path / "nope.json")]) == 2
    assert main(["decide", "bundled:no-such-profile"]) == 2


def test_witness_on_plastic_profile_exit_4(capsys):
    assert main(["witness", "bundled:unit-ball"]) == 4
    assert "plastic" in capsys.readouterr().err


def test_witness_export_round_trip(tmp_path, capsys):
    out = tmp_path / "op.json"
    assert main(["witness", "bundled:inc2-dec1", "--truncate", "32", "--chain", "3", "--out", str(out)]) == 0
    assert "5/6" in capsys.readouterr().out
    doc = json.loads(out.read_text())
    exp = OperatorExport.from_dict(doc)
    assert exp.dimension == 32 and len(exp.matrix) == 32 * 32
    assert [c[0] for c in exp.chain] == list(range(-3, 4))
    assert exp.report.contraction_ratio == F(5, 6)
    assert exp.report.operator_norm <= 1 + 1e-12
    assert exp.to_dict() == doc


def test_witness_to_stdout(capsys):
    assert main(["witness", "bundled:two-atoms", "--truncate", "8"]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["report"]["contraction_ratio"] == "1/2"


def test_inject_fault_exit_5(capsys):
    assert main(["witness", "bundled:two-atoms", "--inject-fault"]) == 5
    assert "check failed" in capsys.readouterr().err
    assert main(["verify", "bundled:two-atoms", "--dims", "16", "--inject-fault"]) == 5
    assert "FAIL" in capsys.readouterr().out
    assert main(["verify", "bundled:unit-ball", "--dims", "4", "--samples", "5", "--inject-fault"]) == 5


@pytest.mark.parametrize("name", ["two-atoms", "inc2-dec1", "atom1-inc2", "balanced-at-1", "unit-ball"])
def test_verify_passes(name, capsys):
    assert main(["verify", f"bundled:{name}", "--dims", "8,16", "--samples", "10", "--json"]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["passed"] and all(c["ok"] for c in doc["checks"])


def test_verify_text_output(capsys):
    assert main(["verify", "bundled:atom1-inc2", "--dims", "16"]) == 0
    out = capsys.readouterr().out
    assert "PASS" in out and "2/3" in out and "checks passed" in out


def test_profiles_listing(capsys):
    assert main(["profiles"]) == 0
    assert "bundled:two-atoms" in capsys.readouterr().out.split()


def test_bad_dims_is_usage_error():
    with pytest.raises(SystemExit) as exc:
        main(["verify", "bundled:two-atoms", "--dims", "0,x"])
    assert exc.value.code == 2
