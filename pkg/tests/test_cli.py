from __future__ import annotations

import io
import json

import pytest

from qualmotion import scene as sc
from qualmotion.cli import RunReport, main
from support import block_on_ground, state


def run(*argv: str) -> tuple[int, str]:
    out = io.StringIO()
    code = main(list(argv), out)
    return code, out.getvalue()


@pytest.fixture
def generated(tmp_path):
    path = tmp_path / "stack.json"
    code, _ = run("generate", "--stack", "3", "--impulse", "1,0,0@top", "--out", str(path))
    assert code == 0
    return path, tmp_path / "stack.truth.json"


def write_forces(path, forces) -> str:
    path.write_text(json.dumps({"format": "aip-forces/1", "forces": forces}))
    return str(path)


class TestValidate:
    def test_ok(self, generated):
        code, text = run("validate", str(generated[0]))
        assert code == 0 and text.startswith("ok ")

    def test_malformed(self, tmp_path, capsys):
        bad = tmp_path / "bad.json"
        doc = sc.scene_to_dict(block_on_ground())
        doc["objects"][1]["state_after"]["qv"] = ["+", "0"]
        bad.write_text(json.dumps(doc))
        assert run("validate", str(bad))[0] == 2
        assert "objects[1].state_after.qv" in capsys.readouterr().err

    def test_missing_file(self, tmp_path):
        assert run("validate", str(tmp_path / "nope.json"))[0] == 2


class TestInfer:
    def test_lists_ground_truth(self, generated):
        scene_path, truth_path = generated
        truth = json.loads(truth_path.read_text())["action"]
        code, text = run("infer", str(scene_path), "--format", "json")
        assert code == 0
        report = RunReport.from_json(text)
        assert truth in [s["action"] for s in report.solutions]
        assert report.solution_count == len(report.solutions)

    def test_text_and_json_agree(self, generated):
        _, text = run("infer", str(generated[0]), "--heuristics", "h2")
        _, js = run("infer", str(generated[0]), "--heuristics", "h2", "--format", "json")
        report = RunReport.from_json(js)
        listed = [line.split("] ", 1)[1] for line in text.splitlines() if line.startswith("[")]
        assert listed == report.actions()
        assert "push object b2 in direction (+,0,0) at locus (-,0,0)" in listed

    def test_report_round_trip(self, generated):
        _, js = run("infer", str(generated[0]), "--format", "json", "--max-solutions", "2")
        report = RunReport.from_json(js)
        assert report.to_json() == js
        assert report.solution_count == 2
        assert report.config["max_solutions"] == 2

    def test_deterministic_apart_from_timing(self, generated):
        a = json.loads(run("infer", str(generated[0]), "--format", "json")[1])
        b = json.loads(run("infer", str(generated[0]), "--format", "json")[1])
        a.pop("wall_time"), b.pop("wall_time")
        assert a == b

    def test_no_moved_object(self, tmp_path):
        path = tmp_path / "still.json"
        sc.save(block_on_ground(), path)
        code, text = run("infer", str(path))
        assert code == 3
        assert "NoMovedObject" in text

    def test_no_solution(self, tmp_path):
        path = tmp_path / "odd.json"
        # two separate objects both slide sideways; one push cannot move both
        moved = state("+00")
        sc.save(sc.Scene((sc.SceneObject("a", state(), moved), sc.SceneObject("b", state(), moved))), path)
        code, text = run("infer", str(path))
        assert code == 3
        assert "solutions 0" in text

    def test_unknown_contact_object(self, tmp_path):
        doc = sc.scene_to_dict(block_on_ground())
        doc["contacts"][0]["b"] = "table"
        path = tmp_path / "s.json"
        path.write_text(json.dumps(doc))
        assert run("infer", str(path))[0] == 2

    def test_bad_threads(self, generated, monkeypatch):
        monkeypatch.setenv("AIP_THREADS", "zero")
        assert run("infer", str(generated[0]))[0] == 2


class TestPredict:
    def _scene(self, tmp_path):
        path = tmp_path / "s.json"
        sc.save(block_on_ground(), path)
        return str(path)

    def test_gravity_only(self, tmp_path):
        forces = write_forces(tmp_path / "f.json", [{"object": "box", "qd": ["0", "0", "-"], "qr": ["0", "0", "0"]}])
        code, text = run("predict", self._scene(tmp_path), forces, "--format", "json")
        assert code == 0
        env = json.loads(text)["envelopes"]["box"]
        assert env == [
            {"dqv": ["0", "0", "-"], "dqw": ["0", "0", "0"]},
            {"dqv": ["0", "0", "0"], "dqw": ["0", "0", "0"]},
        ]

    def test_empty(self, tmp_path):
        code, text = run("predict", self._scene(tmp_path), write_forces(tmp_path / "f.json", []))
        assert code == 0
        assert "box: 1 possible change(s)" in text

    def test_twelve_and_thirteen(self, tmp_path, capsys):
        f = {"object": "box", "qd": ["+", "0", "0"], "qr": ["0", "+", "0"]}
        assert run("predict", self._scene(tmp_path), write_forces(tmp_path / "f.json", [f] * 12))[0] == 0
        assert run("predict", self._scene(tmp_path), write_forces(tmp_path / "g.json", [f] * 13))[0] == 2
        assert "13 forces" in capsys.readouterr().err

    def test_bad_force_file(self, tmp_path):
        path = tmp_path / "f.json"
        path.write_text(json.dumps({"format": "aip-forces/1", "forces": [{"object": "box", "qd": ["+"]}]}))
        assert run("predict", self._scene(tmp_path), str(path))[0] == 2


class TestGenerate:
    def test_files(self, generated):
        scene_path, truth_path = generated
        scene = sc.load(scene_path)
        assert len(scene.movable) == 3
        assert json.loads(truth_path.read_text())["action"]["object"] == "b2"

    def test_zero_impulse(self, tmp_path):
        path = tmp_path / "z.json"
        assert run("generate", "--stack", "1", "--impulse", "zero", "--out", str(path))[0] == 0
        assert all(o.change.is_zero for o in sc.load(path).movable)
        assert json.loads((tmp_path / "z.truth.json").read_text()) == {"action": None}

    def test_seed_is_byte_identical(self, tmp_path):
        outs = []
        for name in ("a", "b"):
            path = tmp_path / f"{name}.json"
            run("generate", "--boxes", "3", "--seed", "8", "--out", str(path), "--sidecar", str(tmp_path / f"{name}.t"))
            outs.append((path.read_bytes(), (tmp_path / f"{name}.t").read_bytes()))
        assert outs[0] == outs[1]

    def test_bad_impulse(self, tmp_path):
        assert run("generate", "--stack", "2", "--impulse", "sideways", "--out", str(tmp_path / "x.json"))[0] == 2


class TestCheck:
    def test_pass(self, generated):
        code, text = run("check", str(generated[0]), str(generated[1]))
        result = json.loads(text)
        assert code == 0 and result["pass"] and result["oracle_compared"]

    def test_two_objects_compared(self, tmp_path):
        path = tmp_path / "s.json"
        run("generate", "--stack", "2", "--impulse", "1,0,0@top", "--out", str(path))
        code, text = run("check", str(path), str(tmp_path / "s.truth.json"), "--heuristics", "h2")
        assert code == 0 and json.loads(text)["oracle_compared"]

    def test_tampered_after_state(self, generated):
        scene_path, truth_path = generated
        doc = json.loads(scene_path.read_text())
        top = next(o for o in doc["objects"] if o["id"] == "b2")
        top["state_after"]["qv"] = ["-", "0", "0"]
        scene_path.write_text(json.dumps(doc))
        code, text = run("check", str(scene_path), str(truth_path))
        result = json.loads(text)
        assert code == 4
        assert result["diff"]["missing_ground_truth"]["object"] == "b2"
