import json

import pytest

from mcwb.cli import corpusInstances, main, seededPlaneInstance
from mcwb.core import instance_to_json, isMulticut
from mcwb.embedding import RotationEmbedding, traceFaces
from mcwb.oracles import minMulticutByPartition

from conftest import instance_from_lists


@pytest.fixture()
def square_file(tmp_path):
    inst = instance_from_lists(
        4, [(0, 1, 1), (1, 2, 1), (2, 3, 1), (3, 0, 1)], [(0, 2), (1, 3)],
        budget=2, rotation=[[3, 0], [0, 1], [1, 2], [2, 3]])
    path = tmp_path / "square.json"
    path.write_text(json.dumps(instance_to_json(inst)))
    return str(path), inst


def run(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def test_seeded_instances_are_deterministic_and_plane():
    a = seededPlaneInstance((3, 7))
    b = seededPlaneInstance((3, 7))
    assert a.graph.edges == b.graph.edges
    assert a.pattern.demand_edges == b.pattern.demand_edges
    for inst in corpusInstances(5, seed=1, max_n=8):
        emb = RotationEmbedding.from_edge_lists(inst.graph, inst.rotation)
        _, genus = traceFaces(emb)
        assert genus == 0


def test_solve_matches_oracle_and_is_deterministic(capsys, square_file):
    path, inst = square_file
    code, out1, err1 = run(capsys, "solve", path, "--method", "oracle")
    assert code == 0
    payload = json.loads(out1)
    w, _ = minMulticutByPartition(inst)
    assert payload["weight"] == w == 2
    assert isMulticut(inst, payload["cut"])
    code, out2, _ = run(capsys, "solve", path, "--method", "oracle")
    assert out2 == out1  # stdout is byte-identical; timing goes to stderr
    manifest = json.loads(err1)
    assert manifest["command"] == "solve"
    assert "wallClockMs" in manifest and "resultDigest" in manifest


def test_decide_exit_codes(capsys, square_file):
    path, _ = square_file
    code, out, _ = run(capsys, "decide", path, "--budget", "2")
    assert code == 0 and json.loads(out)["answer"] == "yes"
    code, out, _ = run(capsys, "decide", path, "--budget", "1")
    assert code == 1 and json.loads(out)["answer"] == "no"


def test_usage_and_validation_errors(capsys, tmp_path):
    code, _, _ = run(capsys, "no-such-command")
    assert code == 2
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    code, _, _ = run(capsys, "solve", str(bad))
    assert code == 3
    code, _, _ = run(capsys, "corpus", "no-such-suite")
    assert code == 2


def test_make_gadget_payload(capsys, tmp_path):
    out_path = tmp_path / "gadget.json"
    code, _, _ = run(capsys, "make-gadget", str(out_path),
                     "--delta", "1", "--set", "1,1")
    assert code == 0
    payload = json.loads(out_path.read_text())
    assert payload["N"] == 4 and payload["W"] == 1600
    assert payload["vertices"] == 25
    assert set(payload["corners"]) == {"UL", "UR", "DL", "DR"}
    assert len(payload["edgeList"]) == payload["edges"]


def test_verify_gadget_passes_and_cap_refusal(capsys, tmp_path):
    spec = tmp_path / "g1.json"
    spec.write_text(json.dumps({"delta": 1, "S": [[1, 1]]}))
    code, out, _ = run(capsys, "verify", "gadget", str(spec))
    assert code == 0 and json.loads(out)["passed"]
    spec2 = tmp_path / "g2.json"
    spec2.write_text(json.dumps({"delta": 2, "S": [[1, 1]]}))
    code, _, _ = run(capsys, "verify", "gadget", str(spec2))
    assert code == 4  # certification over the width cap is refused


def test_verify_dual_and_witness(capsys, square_file):
    path, _ = square_file
    code, out, _ = run(capsys, "verify", "dual", path)
    assert code == 0 and json.loads(out)["passed"]
    code, out, _ = run(capsys, "verify", "witness", path, "--cut", "0,2")
    assert code == 0 and json.loads(out)["isMulticut"]
    code, out, _ = run(capsys, "verify", "witness", path, "--cut", "0")
    assert code == 1


def test_reduce_tiling_and_csp(capsys, tmp_path):
    tiling = tmp_path / "tiling.json"
    tiling.write_text(json.dumps({
        "delta": 1, "k": 2,
        "edges": [[0, 1, s, s] for s in "UDLR"],
        "S": [[[1, 1]], [[1, 1]]]}))
    code, out, _ = run(capsys, "reduce", "tiling", str(tiling))
    assert code == 0
    payload = json.loads(out)
    assert payload["vertices"] == 38
    assert len(set(payload["terminals"].values())) == 4
    csp = tmp_path / "csp.json"
    csp.write_text(json.dumps({
        "delta": 1, "n": 1, "edges": [[0, 0], [0, 0]],
        "rotation": [[0, 1, 0, 1]],
        "relations": [[[1, 1]], [[1, 1]]]}))
    code, out, _ = run(capsys, "reduce", "csp3t", str(csp))
    assert code == 0
    payload = json.loads(out)
    assert sorted(len(g) for g in payload["groups"]) == [4, 4, 4]


def test_corpus_oracle_equiv(capsys):
    code, out, _ = run(capsys, "corpus", "oracle-equiv", "--count", "3")
    assert code == 0
    payload = json.loads(out)
    assert payload["passed"] and len(payload["cases"]) == 3
