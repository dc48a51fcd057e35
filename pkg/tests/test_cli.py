import json
import math
import os
import subprocess
import sys
from pathlib import Path

import pytest

from moyalgeom import expr as ex
from moyalgeom.cli import main
from moyalgeom.presets import FLAT

GOLDEN = Path(__file__).parent / "golden"

PLANE = """\
[algebra]
coords = x, y
theta = 0 1; -1 0

[box]
x = -1, 1
y = -1, 1

[embedding]
X = x, y, x*y
"""


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def write(tmp_path, text, name="spec.ini"):
    p = tmp_path / name
    p.write_text(text)
    return str(p)


def test_check_flat_passes(capsys):
    code, out, _ = run(capsys, "check", "--preset", "flat")
    assert code == 0
    assert "0 failed" in out and "FAIL" not in out


def test_schwarzschild_metric_json(capsys):
    code, out, _ = run(capsys, "metric", "--preset", "schwarzschild-slice", "--format", "json")
    assert code == 0
    rep = json.loads(out)
    assert set(rep) == {"meta", "objects", "verdicts"}
    assert rep["meta"]["order"] == 3 and rep["meta"]["seed"] == 0
    g12 = rep["objects"]["metric"]["1,2"]
    assert len(g12) == 4
    names = ("r", "theta", "phi", "m")
    box = ex.SampleBox({"r": (3, 10), "theta": (0.3, math.pi - 0.3), "phi": (0.3, 2 * math.pi - 0.3)},
                       {"m": 1.0})
    assert ex.numeric_equal(ex.parse(g12[2], names), ex.parse("r*sin(2*theta)", names), box)
    assert ex.parse(g12[1], names).is_zero and ex.parse(g12[3], names).is_zero


def test_metric_golden(capsys):
    """Byte-for-byte golden report for the sphere metric."""
    code, out, _ = run(capsys, "metric", "--preset", "sphere", "--format", "json")
    assert code == 0
    golden = GOLDEN / "sphere_metric.json"
    if os.environ.get("MOYALGEOM_REGEN_GOLDEN"):
        golden.write_text(out)
    assert out == golden.read_text()


def test_json_is_deterministic_across_processes(tmp_path):
    outs = []
    for hashseed in ("1", "2"):
        env = dict(os.environ, PYTHONHASHSEED=hashseed)
        p = subprocess.run([sys.executable, "-m", "moyalgeom", "idempotent", "--preset", "sphere",
                            "--format", "json"], capture_output=True, text=True, env=env, check=True)
        outs.append(p.stdout)
    assert outs[0] == outs[1]


def test_non_skew_theta_exit_2(capsys, tmp_path):
    path = write(tmp_path, PLANE.replace("0 1; -1 0", "0 1; 1 0"))
    code, out, err = run(capsys, "check", path)
    assert code == 2 and out == ""
    assert ":3:" in err and "skew" in err


def test_parse_error_exit_2(capsys, tmp_path):
    code, _, err = run(capsys, "metric", write(tmp_path, PLANE.replace("x*y", "x*/y")))
    assert code == 2 and ":10:" in err


def test_missing_file_exit_2(capsys, tmp_path):
    code, _, _ = run(capsys, "metric", str(tmp_path / "nope.ini"))
    assert code == 2


def test_source_required_once(capsys, tmp_path):
    assert run(capsys, "metric")[0] == 2
    assert run(capsys, "metric", write(tmp_path, PLANE), "--preset", "flat")[0] == 2


def test_transform_without_diffeo_exit_2(capsys):
    code, _, err = run(capsys, "transform", "--preset", "sphere")
    assert code == 2 and "[diffeo]" in err


def test_singular_metric_exit_3(capsys, tmp_path):
    code, _, err = run(capsys, "metric", write(tmp_path, PLANE.replace("X = x, y, x*y", "X = x, x, x")))
    assert code == 3 and "NotEmbeddedError" in err


def test_domain_error_exit_3(capsys, tmp_path):
    code, _, err = run(capsys, "metric", write(tmp_path, PLANE.replace("x*y", "sqrt(x)")))
    assert code == 3


def test_failing_check_exit_1(capsys, tmp_path):
    # an impossible tolerance on the chart box makes round-off count as failure
    text = FLAT.replace("u2 = -4, 4", "u2 = -4, 4\ntol = 1e-300")
    code, out, _ = run(capsys, "transform", write(tmp_path, text))
    assert code == 1 and "FAIL chart-associativity" in out


def test_order_flag_and_text_format(capsys):
    code, out, _ = run(capsys, "idempotent", "--preset", "sphere", "--order", "1")
    assert code == 0
    assert "# order: 1" in out and "hbar^1:" in out and "hbar^2:" not in out


def test_order_out_of_range(capsys):
    assert run(capsys, "metric", "--preset", "flat", "--order", "9")[0] == 2


def test_seed_recorded(capsys):
    code, out, _ = run(capsys, "classical", "--preset", "sphere", "--seed", "17", "--format", "json")
    rep = json.loads(out)
    assert code == 0 and rep["meta"]["seed"] == 17
    assert all(v["seed"] == 17 for v in rep["verdicts"])
    assert rep["objects"]["christoffel_0"]["1,2,2"]  # Gamma^theta_phiphi


@pytest.mark.parametrize("command", ["connection", "curvature", "riemann", "transform"])
def test_other_commands_on_flat(capsys, command):
    code, out, _ = run(capsys, command, "--preset", "flat", "--format", "json")
    rep = json.loads(out)
    assert code == 0 and rep["objects"] and rep["verdicts"]


def test_output_file(capsys, tmp_path):
    target = tmp_path / "r.json"
    code, out, _ = run(capsys, "metric", "--preset", "flat", "--format", "json", "-o", str(target))
    assert code == 0 and out == ""
    assert json.loads(target.read_text())["meta"]["source"] == "preset:flat"


def test_large_expressions_are_summarised():
    from moyalgeom.report import expr_string
    x = ex.symbol("x")
    e = x
    for _ in range(12):
        e = ex.mul(ex.sin(ex.add(e, 1)), ex.cos(ex.add(e, 2)))
    s = expr_string(e, ex.Evaluator({"x": [0.0]}))
    assert s.startswith("<") and "value at first sample point" in s
