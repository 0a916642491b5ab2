import json

import pytest

from torusdamp.cli import main


def run(tmp_path, *argv, sub="out"):
    out = tmp_path / sub
    code = main([*argv, "--out", str(out)])
    return code, out


def test_verify_checkerboard_fails(tmp_path, capsys):
    code, out = run(tmp_path, "verify", "--preset", "checkerboard2d", "--conditions", "wgcc,sgcc")
    assert code == 1
    doc = json.loads((out / "verdicts.json").read_text())
    assert doc["schema"] == "1"
    assert [v["result"] for v in doc["verdicts"]] == ["Holds", "Fails"]


def test_verify_full_torus_holds(tmp_path):
    code, _ = run(tmp_path, "verify", "--preset", "full2d", "--conditions", "wgcc,sgcc")
    assert code == 0


@pytest.mark.parametrize("doc", [
    {"periods": [1.0, 1.0], "polyhedra": []},
    {"polyhedra": []},
    {"periods": ["1", "1"], "polyhedra": [{"halfspaces": [{"n": ["1", "0"], "c": "x"}]}]},
])
def test_verify_invalid_scene(tmp_path, doc):
    path = tmp_path / "scene.json"
    path.write_text(json.dumps(doc))
    code, out = run(tmp_path, "verify", "--scene", str(path))
    assert code == 3
    err = json.loads((out / "scene_error.json").read_text())
    assert err["error"] == "invalid_scene"


def test_verify_missing_scene_file(tmp_path):
    code, _ = run(tmp_path, "verify", "--scene", str(tmp_path / "nope.json"))
    assert code == 3


def test_verify_unknown_preset(tmp_path):
    code, _ = run(tmp_path, "verify", "--preset", "nope")
    assert code == 3


def test_reduce_outputs(tmp_path):
    code, out = run(tmp_path, "reduce", "--periods", "1,1,1", "--n", "0,1,1")
    assert code == 0
    doc = json.loads((out / "reduction.json").read_text())
    assert doc["alignment_error"] <= 1e-12
    assert doc["periodicity"]["max_discrepancy"] <= 1e-10


def test_reduce_degenerate_alpha(tmp_path):
    code, _ = run(tmp_path, "reduce", "--periods", "1,1", "--n", "1,1", "--pq", "1,1")
    assert code == 5


def test_reduce_non_primitive(tmp_path):
    code, _ = run(tmp_path, "reduce", "--periods", "1,1", "--n", "2,2")
    assert code == 3


def test_flow_outputs(tmp_path):
    code, out = run(tmp_path, "flow", "--seed", "3", "--s-max", "5", "--samples", "11", "--svg")
    assert code == 0
    doc = json.loads((out / "flow.json").read_text())
    assert doc["max_divergence"] <= 1e-6
    assert (out / "trajectory.csv").exists() and (out / "theta1.svg").exists()


def test_probe_plane_waves(tmp_path):
    code, out = run(tmp_path, "probe", "--preset", "band2d", "--family", "plane",
                    "--h", "1/32,1/64", "--res", "256,32")
    assert code == 0
    doc = json.loads((out / "probe.json").read_text())
    assert len(doc["rows"]) == 2
    assert "ratio_growth" in doc["rows"][1]
    assert (out / "probe.csv").read_text().count("\n") == 3


def test_simulate_small_run(tmp_path):
    code, out = run(tmp_path, "simulate", "--preset", "full2d", "--res", "16", "--T", "1",
                    "--dt", "0.01", "--sample-dt", "0.05", "--kmax", "2", "--svg")
    assert code == 0
    doc = json.loads((out / "fit.json").read_text())
    assert doc["fit"]["rate"] == pytest.approx(doc["oracle_rate"], rel=0.05)
    assert (out / "energy.csv").exists() and (out / "energy.svg").exists()


def test_outputs_are_byte_identical(tmp_path):
    argv = ["simulate", "--preset", "band2d", "--res", "16", "--T", "0.5", "--dt", "0.01", "--seed", "9"]
    _, out1 = run(tmp_path, *argv, sub="a")
    _, out2 = run(tmp_path, *argv, sub="b")
    assert (out1 / "fit.json").read_bytes() == (out2 / "fit.json").read_bytes()
    assert (out1 / "energy.csv").read_bytes() == (out2 / "energy.csv").read_bytes()
    _, r1 = run(tmp_path, "reduce", "--periods", "1,2,3", "--n", "1,-2,3", sub="c")
    _, r2 = run(tmp_path, "reduce", "--periods", "1,2,3", "--n", "1,-2,3", sub="d")
    assert (r1 / "reduction.json").read_bytes() == (r2 / "reduction.json").read_bytes()
