import copy
import json
import os
import subprocess
import sys

import pytest

from tensional import cli
from tensional.config import load_config, loads_config
from tensional.errors import ConfigParseError, ValidationError

ROOT = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
HYPERBOLIC = os.path.join(ROOT, "configs", "hyperbolic.json")

BASE = {
    "manifolds": {
        "E2": {"coords": ["a", "b"], "metric": [["1", "0"], [None, "1"]]},
        "E3": {"coords": ["X", "Y", "Z"],
               "metric": [["1", "0", "0"], [None, "1", "0"], [None, None, "1"]]},
    },
    "maps": {"graph": {"source": "E2", "target": "E3", "components": ["a", "b", "a*b"]}},
    "tasks": [{"type": "classify_map", "map": "graph"}],
}


def _cfg(**changes):
    raw = copy.deepcopy(BASE)
    raw.update(changes)
    return raw


def test_example_config_loads():
    cfg = load_config(HYPERBOLIC)
    assert cfg.tasks[0]["type"] == "classify_map"
    assert cfg.charts["H"].params["p"] == pytest.approx(2 + 2 ** 0.5)


def test_example_config_run(capsys):
    assert cli.main(["run", "--config", HYPERBOLIC, "--seed", "42"]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["schema_version"] == 1
    assert doc["tool"]["name"] == "tensional"
    task = doc["tasks"][0]
    assert task["verdicts"]["hs_tensional"] is True
    assert task["verdicts"]["hm_tensional"] is False
    assert task["status"] == "ok" and not task["mismatches"]
    assert len(task["result"]["points"]) == 10
    assert "timings" in doc and len(doc["config_digest"]) == 64


def test_non_square_metric_is_rejected():
    raw = _cfg()
    raw["manifolds"]["E2"]["metric"] = [["1", "0", "0"], ["0", "1", "0"]]
    with pytest.raises(ValidationError) as info:
        loads_config(json.dumps(raw))
    assert any(p == "manifolds/E2/metric" for p, _ in info.value.problems)


def test_all_problems_are_collected():
    raw = _cfg()
    raw["maps"]["graph"]["source"] = "nowhere"
    raw["manifolds"]["E3"]["metric"][1][0] = "7"
    raw["tasks"].append({"type": "integrate"})
    raw["tasks"].append({"type": "check_convex", "scalar": "f"})
    raw["sampling"] = {"n_points": 2}
    with pytest.raises(ValidationError) as info:
        loads_config(json.dumps(raw))
    paths = {p for p, _ in info.value.problems}
    assert {"maps/graph/source", "manifolds/E3/metric/1/0", "tasks/1/type",
            "tasks/2/scalar", "sampling/n_points"} <= paths


def test_expression_errors_are_validation_errors():
    raw = _cfg()
    raw["maps"]["graph"]["components"][2] = "a*(b"
    with pytest.raises(ValidationError) as info:
        loads_config(json.dumps(raw))
    assert info.value.problems[0][0] == "maps/graph/components/2"


def test_mirrored_lower_triangle_is_accepted():
    raw = _cfg()
    raw["manifolds"]["E2"]["metric"] = [["1", "0.5*a"], ["0.5*a", "2"]]
    loads_config(json.dumps(raw))


def test_malformed_json():
    with pytest.raises(ConfigParseError):
        loads_config("{not json")


def test_bad_config_exit_code(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    raw = _cfg()
    raw["maps"]["graph"]["target"] = "E7"
    bad.write_text(json.dumps(raw))
    assert cli.main(["run", "--config", str(bad)]) == 2
    assert "maps/graph/target" in capsys.readouterr().err
    assert cli.main(["run", "--config", str(tmp_path / "missing.json")]) == 2


def test_expectation_mismatch_exit_code(tmp_path, capsys):
    raw = _cfg(tasks=[{"type": "classify_map", "map": "graph", "expect": {"harmonic": True}}])
    raw["maps"]["graph"]["components"][2] = "a^2"
    path = tmp_path / "c.json"
    path.write_text(json.dumps(raw))
    assert cli.main(["run", "--config", str(path), "--format", "text"]) == 1
    out = capsys.readouterr().out
    assert "MISMATCH" in out and "expected harmonic=True" in out


def test_numerical_error_exit_code(tmp_path):
    raw = _cfg()
    raw["manifolds"]["E2"]["metric"] = [["1", "2"], [None, "1"]]
    path = tmp_path / "c.json"
    path.write_text(json.dumps(raw))
    out = tmp_path / "r.json"
    assert cli.main(["run", "--config", str(path), "--out", str(out)]) == 3
    doc = json.loads(out.read_text())
    assert doc["tasks"][0]["status"] == "error"
    assert doc["tasks"][0]["error"]["kind"] == "NotPositiveDefinite"


def test_overrides_are_recorded(tmp_path):
    path = tmp_path / "c.json"
    path.write_text(json.dumps(_cfg()))
    out = tmp_path / "r.json"
    assert cli.main(["run", "--config", str(path), "--seed", "7", "--tolerance", "1e-6",
                     "--jet-order", "5", "--out", str(out)]) == 0
    settings = json.loads(out.read_text())["settings"]
    assert settings == {"seed": 7, "classify": 1e-6, "jet_order": 5, "n_points": 10,
                        "identity": 1e-8}


def test_every_task_type(tmp_path):
    raw = _cfg()
    raw["manifolds"]["I"] = {"coords": ["s"], "metric": [["1"]], "sample_box": [[-1, 1]]}
    raw["manifolds"]["S"] = {"coords": ["u", "v"],
                             "induced": {"target": "E3", "components": ["u", "v", "0"]}}
    raw["maps"]["line"] = {"source": "I", "target": "E3", "components": ["s", "0", "1"]}
    raw["maps"]["flat"] = {"source": "S", "target": "E3", "components": ["u", "v", "0"]}
    raw["fields"] = {"pos": {"chart": "E2", "components": ["a", "b"]}}
    raw["scalars"] = {"f": {"chart": "E2", "expr": "a^2+b^2"}}
    raw["tasks"] = [
        {"type": "classify_submanifold", "map": "flat", "expect": {"verdict": "Minimal"}},
        {"type": "classify_curve", "map": "line", "expect": {"verdict": "Geodesic"}},
        {"type": "check_rough_type", "field": "pos",
         "expect": {"tensorial": True, "coordinate": True}},
        {"type": "check_convex", "scalar": "f", "expect": {"strongly_convex": True}},
        {"type": "energy", "map": "graph", "box": [[0, 1], [0, 1]], "resolution": 8,
         "expect": {"energy": 4 / 3}, "expect_tolerance": 1e-2},
        {"type": "casebook", "case": "line", "expect": {"passed": True}},
    ]
    path = tmp_path / "c.json"
    path.write_text(json.dumps(raw))
    out = tmp_path / "r.json"
    code = cli.main(["run", "--config", str(path), "--out", str(out)])
    doc = json.loads(out.read_text())
    assert code == 0, [t.get("mismatches") for t in doc["tasks"]]
    assert [t["status"] for t in doc["tasks"]] == ["ok"] * 6


def test_casebook_command(capsys):
    assert cli.main(["casebook", "--case", "kelvin(3,1)", "--case", "line"]) == 0
    out = capsys.readouterr().out
    assert "PASS  kelvin(3,1)" in out and "2/2 cases passed" in out
    assert cli.main(["casebook", "--case", "bogus"]) == 2


def test_casebook_all_via_console_script():
    proc = subprocess.run([sys.executable, "-m", "tensional.cli", "casebook", "--all"],
                          capture_output=True, text=True)
    assert proc.returncode == 0, proc.stdout[-2000:]
    assert "cases passed" in proc.stdout


def test_check_expr(capsys):
    assert cli.main(["check-expr", "x*y+sin(z)", "--vars", "x,y,z"]) == 0
    assert capsys.readouterr().out.strip() == "((x * y) + sin(z))"
    assert cli.main(["check-expr", "x+w", "--vars", "x"]) == 2
    assert "unknown variable 'w'" in capsys.readouterr().err
