import io
import json

import pytest

from ctrlrep import controlled as ctl
from ctrlrep.cli import map_to_json, parse_input, parse_map, rep_to_json, run
from ctrlrep.errors import InvariantViolation, ParseError
from ctrlrep.linal import QQ
from ctrlrep.quiver import NSubRep, RigidIndec, catalog_rep


def invoke(*argv):
    out, err = io.StringIO(), io.StringIO()
    code = run(list(argv), out, err)
    return code, out.getvalue()


def call_json(*argv):
    code, text = invoke(*argv)
    return code, json.loads(text)


@pytest.fixture
def write(tmp_path):
    def _write(name, payload):
        path = tmp_path / name
        path.write_text(json.dumps(payload))
        return str(path)
    return _write


def test_catalog_lists_five_entries():
    code, report = call_json("catalog", "--n", "3")
    assert code == 0
    assert [e["id"] for e in report["result"]["entries"]] == [f"V(3,{j})" for j in range(1, 6)]


def test_presentation_counts():
    code, report = call_json("presentation", "--n", "2")
    assert code == 0
    assert report["result"]["presentation"]["counts"] == [12, 12]


def test_iso_of_absorbed_sum(write):
    a = write("a.json", map_to_json(ctl.dsum(ctl.elementary("B"), ctl.elementary("Binf"))))
    b = write("b.json", map_to_json(ctl.elementary("Binf")))
    code, report = call_json("iso", a, b)
    assert code == 0 and report["result"] == {"iso": True}
    code, report = call_json("iso", a, write("c.json", map_to_json(ctl.elementary("C"))))
    assert code == 0 and report["result"] == {"iso": False}


def test_classify_and_invariants(write):
    path = write("r.json", map_to_json(ctl.elementary(ctl.ElementaryName("R", 2), 2)))
    code, report = call_json("classify", path)
    assert code == 0
    assert report["result"]["class"] == {"lambda": "inf{2}", "mu": [0, 0], "nu": [0, 0], "rigid": []}
    code, report = call_json("invariants", path)
    assert code == 0
    assert report["result"]["lambda"]["status"] == {"kind": "DivergentBranches", "branches": [2]}


def test_budget_exit_code(write):
    path = write("b.json", map_to_json(ctl.elementary("B")))
    code, report = call_json("classify", path, "--max-level", "3")
    assert code == 2
    assert report["result"]["reports"]["lambda"]["status"]["kind"] == "LowerBound"
    assert call_json("invariants", path, "--max-level", "3")[0] == 2


def test_quiver_verbs(write):
    v35 = write("v.json", rep_to_json(catalog_rep(RigidIndec(3, 5))))
    code, report = call_json("quiver-decompose", v35)
    assert code == 0 and report["result"]["summands"] == [{"id": "V(3,5)", "mult": 1}]
    s0 = write("s.json", {"field": "Q", "n": 3, "dim0": 1, "subspaces": [[], [], []]})
    code, report = call_json("quiver-ext", v35, s0)
    assert code == 0 and report["result"] == {"ext1": 1, "hom": 0, "euler": -1}
    code, report = call_json("quiver-rigidify", s0)
    assert code == 0 and report["result"]["rigid"]["dim0"] == 0


def test_rigidify_report_feeds_back(write, tmp_path):
    v = write("v.json", {"field": "Q", "n": 2, "dim0": 2, "subspaces": [[["1", "0"]], [["1", "0"]]]})
    _, text = invoke("quiver-rigidify", v)
    again = tmp_path / "rig.json"
    again.write_text(text)
    code, report = call_json("quiver-decompose", str(again))
    assert code == 0 and report["result"]["summands"] == [{"id": "V(2,1)", "mult": 1}]


def test_misc_verbs(write):
    assert call_json("rep-type", "--card", "4")[1]["result"]["type"] == "Tame"
    assert call_json("rep-type", "--card", "inf")[1]["result"]["type"] == "Wild"
    assert call_json("rep-type", "--card", "0")[0] == 1
    m = write("m.json", {"entries": [[0, 0, "1"], [1, 0, "-1"]]})
    assert call_json("ideal-member", m, "--ideal", "IA_R")[1]["result"]["member"] is True
    assert call_json("ideal-member", m, "--ideal", "AR")[1]["result"]["member"] is False
    code, report = call_json("ext-elementary", "C", "A", "--witness", "4")
    assert report["result"]["ext1"] == 1
    assert report["result"]["witness"]["values"] == [1, 1, 1, 1]
    assert call_json("ext-elementary", "Cinf", "R")[1]["result"]["ext1"] == "continuum"


def test_input_errors(write):
    bad_field = write("f.json", {"field": "Fp:6", "n": 1, "dim0": 0, "subspaces": [[]]})
    code, report = call_json("quiver-decompose", bad_field)
    assert code == 1 and report["error"].startswith("ParseError")
    assert call_json("quiver-decompose", "/nonexistent.json")[0] == 1
    assert invoke("classify")[0] == 1
    broken = write("x.json", {"field": "Q"})
    assert call_json("classify", broken)[0] == 1


def test_band_block_shape_is_invariant_violation():
    data = map_to_json(ctl.elementary("B"))
    data["tail_rules"][0]["blocks"][0] = [["1", "0"], ["0", "1"]]
    with pytest.raises(InvariantViolation):
        parse_map(data)
    code, _ = invoke("classify", json.dumps(data))
    assert code == 1


def test_field_tag_parse_error():
    with pytest.raises(ParseError):
        parse_input(json.dumps({"field": "Fp:6", "n": 1, "dim0": 0, "subspaces": [[]]}), "rep")


@pytest.mark.parametrize("name", ctl.ELEMENTARY)
def test_map_json_round_trip(name):
    phi = ctl.elementary(ctl.ElementaryName(name, 2), 3)
    assert parse_map(json.loads(json.dumps(map_to_json(phi)))) == phi


def test_single_strand_branch_form():
    data = {"field": "Q", "n": 1,
            "domain": {"root": 0, "branches": [{"tail": {"kind": "const", "w": 1}}]},
            "codomain": {"root": 1, "branches": [{"seed_arities": [], "tail": {"kind": "const", "w": 1},
                                                  "start": 1}]},
            "seed_entries": [{"from": [1, 1, 0], "to": ["root", 0], "val": "-1"}],
            "tail_rules": [{"branch": 1, "kind": "band", "w": 1, "D": 1,
                            "blocks": [[["-1"]], [["1"]], [["0"]]]}]}
    phi = parse_map(data)
    assert phi == ctl.m_functor(NSubRep.from_vectors(QQ, 1, [[[1]]]))


def test_deterministic_output(write):
    path = write("c.json", map_to_json(ctl.dsum(ctl.elementary("C"), ctl.elementary("Cinf"))))
    first = invoke("classify", path, "--format", "text")
    assert first == invoke("classify", path, "--format", "text")
    assert "nu: (inf)" in first[1]
