import json

import numpy as np
import pytest

from conftest import DATA, GOLDEN
from kendall3d.cli import run

HOUSE = DATA / "house.json"

GOLDEN_ARGS = {
    "preshape": ["preshape"],
    "basis": ["basis"],
    "curvature": ["curvature", "--plane", "xi1_2,xi2_3"],
    "simulate": ["simulate", "--sigma", "0.05", "--n", "5", "--seed", "7", "--emit-configs"],
    "check": ["check"],
}

# fields fixed only up to a choice of eigenvectors or SVD signs: compare shape, not values
SHAPE_ONLY = {"vectors", "preshape", "landmarks"}
SIGN_FREE = {"c12", "c13", "c23"}
# finite-difference output is noisy at the level of the step's roundoff
LOOSE = {"oracle": 1e-7, "rel_discrepancy": 1e-6, "max_rel_discrepancy": 1e-6}


def _compare(got, want, path="$"):
    key = path.rsplit(".", 1)[-1]
    if isinstance(want, dict):
        assert isinstance(got, dict) and list(got) == list(want), path
        for k in want:
            _compare(got[k], want[k], f"{path}.{k}")
    elif key in SHAPE_ONLY and path != "$.preshape":
        assert np.shape(got) == np.shape(want), path
    elif isinstance(want, list):
        assert isinstance(got, list) and len(got) == len(want), path
        for i, (g, w) in enumerate(zip(got, want)):
            _compare(g, w, f"{path}[{i}]" if not isinstance(w, (dict, list)) else f"{path}.{key}")
    elif isinstance(want, bool) or isinstance(want, str) or want is None:
        assert got == want, path
    elif isinstance(want, int):
        assert got == want and isinstance(got, int), path
    else:
        g, w = (abs(got), abs(want)) if key in SIGN_FREE else (got, want)
        tol = LOOSE.get(key.split("[")[0], 1e-9)
        assert g == pytest.approx(w, rel=tol, abs=tol), path


def _json_run(capsys, argv):
    code = run(argv)
    out = capsys.readouterr().out
    return code, json.loads(out)


@pytest.mark.parametrize("name", sorted(GOLDEN_ARGS))
def test_golden_json(capsys, name):
    code, doc = _json_run(capsys, [*GOLDEN_ARGS[name], "-i", str(HOUSE), "--json"])
    assert code == 0
    _compare(doc, json.loads((GOLDEN / f"{name}.json").read_text()))


def test_preshape_golden_up_to_rotation(capsys):
    # the pre-shape itself is canonical (no rotation applied); check it numerically too
    _, doc = _json_run(capsys, ["preshape", "-i", str(HOUSE), "--json"])
    want = json.loads((GOLDEN / "preshape.json").read_text())
    np.testing.assert_allclose(doc["preshape"], want["preshape"], atol=1e-12)


def test_golden_basis_is_orthonormal_and_horizontal():
    doc = json.loads((GOLDEN / "basis.json").read_text())
    M = np.array(doc["vectors"])
    assert M.shape == (23, 27)
    assert doc["orthonormality_residual"] <= 1e-10
    assert doc["horizontality_residual"] <= 1e-10


def test_text_output(capsys):
    assert run(["curvature", "-i", str(HOUSE), "--plane", "dl2,dl3"]) == 0
    out = capsys.readouterr().out
    assert out.startswith("K = 1")


def test_flat_plane_via_cli(capsys):
    code, doc = _json_run(capsys, ["curvature", "-i", str(HOUSE), "--plane", "dl2,dl3", "--json"])
    assert code == 0 and doc["curvature"] == pytest.approx(1.0, abs=1e-9)


def test_curvature_from_coordinates(capsys):
    u = ",".join(["1"] + ["0"] * 22)
    v = ",".join(["0", "1"] + ["0"] * 21)
    code, doc = _json_run(capsys, ["curvature", "-i", str(HOUSE), "--u-coords", u, "--v-coords", v, "--json"])
    assert code == 0 and doc["curvature"] == pytest.approx(1.0, abs=1e-9)


def test_simulate_byte_identical(tmp_path, capsys):
    outs = []
    for i in range(2):
        path = tmp_path / f"s{i}.csv"
        assert run(["simulate", "-i", str(HOUSE), "--sigma", "0.1", "--n", "5", "--seed", "7", "--json", "-o", str(path)]) == 0
        outs.append((capsys.readouterr().out, path.read_bytes()))
    assert outs[0] == outs[1]
    lines = outs[0][1].decode().splitlines()
    assert len(lines) == 6 and len(lines[0].split(",")) == 30


def test_output_file_for_other_commands(tmp_path, capsys):
    path = tmp_path / "pre.json"
    assert run(["preshape", "-i", str(HOUSE), "-o", str(path)]) == 0
    assert json.loads(path.read_text())["command"] == "preshape"


def test_check_random_k5(tmp_path, capsys, rng):
    for i in range(3):
        p = tmp_path / f"r{i}.csv"
        p.write_text("\n".join(",".join(repr(float(x)) for x in row) for row in rng.standard_normal((5, 3))) + "\n")
        code, doc = _json_run(capsys, ["check", "-i", str(p), "--json"])
        assert code == 0 and doc["passed"] and doc["max_rel_discrepancy"] <= 1e-3


@pytest.fixture
def collinear(tmp_path):
    p = tmp_path / "line.csv"
    p.write_text("\n".join(f"{t},{2 * t},{-t}" for t in range(6)) + "\n")
    return p


@pytest.mark.parametrize("cmd", [["basis"], ["curvature", "--plane", "dl2,dl3"], ["check"], ["simulate", "--sigma", "0.1", "--n", "2", "--seed", "1"]])
def test_exit_3_on_collinear(capsys, collinear, cmd):
    code = run([*cmd, "-i", str(collinear), "--json"])
    captured = capsys.readouterr()
    assert code == 3
    err = json.loads(captured.out)["error"]
    assert err["exit_code"] == 3 and err["type"] == "SingularShapeError"
    assert "error" in captured.err


def test_exit_3_on_coincident(tmp_path, capsys):
    p = tmp_path / "pt.csv"
    p.write_text("1,1,1\n" * 5)
    assert run(["preshape", "-i", str(p)]) == 3


@pytest.mark.parametrize(
    "argv",
    [
        [],
        ["preshape"],
        ["bogus", "-i", "x.csv"],
        ["curvature", "-i", str(HOUSE)],
        ["curvature", "-i", str(HOUSE), "--plane", "dl2"],
        ["curvature", "-i", str(HOUSE), "--plane", "dl2,dl3", "--u-coords", "1"],
        ["simulate", "-i", str(HOUSE), "--sigma", "0.1", "--n", "3"],
        ["check", "-i", str(HOUSE), "--step", "0.5"],
        ["check", "-i", str(HOUSE), "--trials", "0"],
    ],
)
def test_exit_1_usage(capsys, argv):
    assert run(argv) == 1


def test_exit_2_data_errors(tmp_path, capsys):
    bad = tmp_path / "bad.csv"
    bad.write_text("1,2\n")
    assert run(["preshape", "-i", str(bad)]) == 2
    assert "line 1" in capsys.readouterr().err
    assert run(["preshape", "-i", str(tmp_path / "nope.json")]) == 2
    few = tmp_path / "few.csv"
    few.write_text("0,0,0\n1,0,0\n0,1,0\n")
    assert run(["preshape", "-i", str(few), "--json"]) == 2
    assert json.loads(capsys.readouterr().out)["error"]["exit_code"] == 2
    assert run(["curvature", "-i", str(HOUSE), "--plane", "xi1_2,xi9_9"]) == 2
    assert run(["simulate", "-i", str(HOUSE), "--sigma", "-1", "--n", "3", "--seed", "1"]) == 2


def test_exit_4_on_failed_check(capsys, monkeypatch):
    import kendall3d.cli as cli

    monkeypatch.setattr(cli, "oneill_bracket_norm_sq", lambda Z, u, v, cfg=None: 123.0)
    code, doc = _json_run(capsys, ["check", "-i", str(HOUSE), "--json"])
    assert code == 4 and doc["passed"] is False


def test_module_entry_point():
    import subprocess
    import sys

    res = subprocess.run([sys.executable, "-m", "kendall3d", "preshape", "-i", str(HOUSE), "--json"], capture_output=True, text=True)
    assert res.returncode == 0
    assert json.loads(res.stdout)["k"] == 10
