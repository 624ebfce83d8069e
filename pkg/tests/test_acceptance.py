"""The nine acceptance criteria, each at its stated tolerance.

Every test records a PASS/FAIL line that is printed in the terminal summary.
"""

import json
from contextlib import contextmanager

import numpy as np
from scipy import stats

from conftest import ACCEPTANCE, DATA, GOLDEN
from helpers import frame, random_horizontal, random_preshape, random_rotation
from kendall3d.cli import run
from kendall3d.kendall_curvature import (
    bracket_norm_sq,
    get_xi_basis,
    kendall_coordinates,
    kendall_svd,
    orthonormalize_plane,
    sectional_curvature,
    vertical_bracket,
)
from kendall3d.numeric_oracle import OracleConfig, oneill_bracket_norm_sq
from kendall3d.shape_core import align_rotation, exp_sphere, log_sphere, to_preshape
from kendall3d.simulation import SimulationSpec, simulate_in_tangent_space
from kendall3d.tangent_basis import apply_endomorphism, horizontal_basis, horizontal_project
from test_cli import GOLDEN_ARGS, _compare


@contextmanager
def criterion(name):
    detail = {"text": ""}
    try:
        yield detail
    except BaseException as exc:
        ACCEPTANCE.append((name, False, f"{detail['text']} {type(exc).__name__}: {exc}".strip().splitlines()[0]))
        raise
    ACCEPTANCE.append((name, True, detail["text"]))


def _plane(rng, Z):
    return orthonormalize_plane(random_horizontal(rng, Z), random_horizontal(rng, Z))


def test_1_basis_correctness():
    rng = np.random.default_rng(101)
    with criterion("1 basis correctness") as det:
        worst = 0.0
        for _ in range(200):
            k = int(rng.integers(4, 13))
            Z = random_preshape(rng, k)
            B = horizontal_basis(Z)
            assert B.d == 3 * k - 7
            M = B.matrix
            worst = max(worst, np.max(np.abs(M @ M.T - np.eye(B.d))))
            F = np.stack([w.ravel() for w in frame(Z)])
            worst = max(worst, np.max(np.abs(M @ F.T)))
            worst = max(worst, max(np.linalg.norm(apply_endomorphism(Z, t)) for t in B))
        det["text"] = f"200 shapes, worst residual {worst:.1e}"
        assert worst <= 1e-10


def test_2_kendall_basis_correctness():
    rng = np.random.default_rng(202)
    with criterion("2 Kendall basis correctness") as det:
        worst, cond = 0.0, 0.0
        for i in range(100):
            k = 4 + i % 9
            Z = random_preshape(rng, k)
            kb = get_xi_basis(kendall_svd(Z))
            assert kb.d == 3 * k - 7 == len(kb.vectors)
            for b in kb.vectors:
                worst = max(worst, np.linalg.norm(b - horizontal_project(b, Z)))
            assert np.isfinite(kb.gram_condition) and kb.gram_condition >= 1.0
            assert np.linalg.matrix_rank(kb.gram) == kb.d
            cond = max(cond, kb.gram_condition)
        det["text"] = f"100 shapes, worst horizontality {worst:.1e}, max Gram condition {cond:.2e}"
        assert worst <= 1e-8


def test_3_curvature_lower_bound():
    rng = np.random.default_rng(303)
    with criterion("3 curvature lower bound") as det:
        Ks = []
        for k in (4, 5, 10):
            for _ in range(340):
                Z = random_preshape(rng, k)
                Ks.append(sectional_curvature(Z, random_horizontal(rng, Z), random_horizontal(rng, Z)))
        det["text"] = f"{len(Ks)} triples, min K - 1 = {min(Ks) - 1:.1e}, max K = {max(Ks):.3f}"
        assert min(Ks) >= 1 - 1e-12


def test_4_flat_plane():
    rng = np.random.default_rng(404)
    with criterion("4 flat radial plane") as det:
        dev = 0.0
        for i in range(50):
            Z = random_preshape(rng, (4, 5, 7, 10)[i % 4])
            kb = get_xi_basis(kendall_svd(Z))
            u, v = orthonormalize_plane(*kb.dl_vectors)
            dev = max(dev, abs(sectional_curvature(Z, u, v, kb) - 1.0))
        det["text"] = f"50 points, max |K - 1| = {dev:.1e}"
        assert dev <= 1e-9


def test_5_oracle_equivalence():
    rng = np.random.default_rng(505)
    with criterion("5 oracle equivalence") as det:
        rels, ratios = [], []
        for i in range(20):
            Z = random_preshape(rng, (4, 5, 8)[i % 3])
            kb = get_xi_basis(kendall_svd(Z))
            u, v = _plane(rng, Z)
            closed = bracket_norm_sq(kb, vertical_bracket(kb, kendall_coordinates(u, kb), kendall_coordinates(v, kb)))
            rels.append(abs(oneill_bracket_norm_sq(Z, u, v) - closed) / closed)
            e1 = abs(oneill_bracket_norm_sq(Z, u, v, OracleConfig(step=2e-3)) - closed)
            e2 = abs(oneill_bracket_norm_sq(Z, u, v, OracleConfig(step=1e-3)) - closed)
            ratios.append(e1 / e2)
        det["text"] = (
            f"20 triples, max rel err {max(rels):.1e}; halving-step error ratio "
            f"{min(ratios):.2f}..{max(ratios):.2f}"
        )
        assert max(rels) <= 1e-4
        assert all(3.5 <= r <= 4.5 for r in ratios)


def test_6_isometry_invariance():
    rng = np.random.default_rng(606)
    with criterion("6 isometry invariance") as det:
        rot, mix = 0.0, 0.0
        for k in (4, 7):
            Z = random_preshape(rng, k)
            u, v = _plane(rng, Z)
            K = sectional_curvature(Z, u, v)
            for _ in range(20):
                R = random_rotation(rng)
                rot = max(rot, abs(sectional_curvature(Z @ R, u @ R, v @ R) - K))
                t = rng.uniform(0, 2 * np.pi)
                s = rng.choice([-1.0, 1.0])
                u2 = np.cos(t) * u + np.sin(t) * v
                v2 = s * (-np.sin(t) * u + np.cos(t) * v)
                mix = max(mix, abs(sectional_curvature(Z, u2, v2) - K))
        det["text"] = f"rotation drift {rot:.1e}, re-mixing drift {mix:.1e}"
        assert rot <= 1e-9 and mix <= 1e-9


def test_7_exp_log_and_alignment():
    rng = np.random.default_rng(707)
    with criterion("7 exp/log and alignment") as det:
        el, al = 0.0, 0.0
        for _ in range(100):
            Z = random_preshape(rng, int(rng.integers(4, 13)))
            v = rng.standard_normal(Z.shape)
            v -= np.vdot(v, Z) * Z
            v *= rng.uniform(0, 1) / np.linalg.norm(v)
            el = max(el, np.max(np.abs(log_sphere(Z, exp_sphere(Z, v)) - v)))
            aligned, _ = align_rotation(Z, Z @ random_rotation(rng))
            al = max(al, np.max(np.abs(aligned - Z)))
        det["text"] = f"log(exp(v)) error {el:.1e}, alignment residual {al:.1e}"
        assert el <= 1e-9 and al <= 1e-10


def test_8_simulation_contract():
    house = np.array(json.loads((DATA / "house.json").read_text())["landmarks"])
    Z = to_preshape(house)
    with criterion("8 simulation contract") as det:
        spec = SimulationSpec(0.05, 2000, seed=20240611)
        a = simulate_in_tangent_space(Z, spec)
        b = simulate_in_tangent_space(Z, spec, workers=4)
        assert np.array_equal(a.coords, b.coords) and np.array_equal(a.preshapes, b.preshapes)
        assert a.basis.d == 23
        norm_err = np.max(np.abs(np.linalg.norm(a.preshapes, axis=(1, 2)) - 1.0))
        assert norm_err <= 1e-12
        pmin = min(stats.kstest(a.coords[:, j], "norm", args=(0.0, 0.05)).pvalue for j in range(23))
        Z10 = random_preshape(np.random.default_rng(808), 10)
        c = simulate_in_tangent_space(Z10, SimulationSpec(0.05, 5000, seed=9)).coords
        fro = np.linalg.norm(np.cov(c, rowvar=False) - 0.05**2 * np.eye(23))
        det["text"] = f"d = 23, min KS p-value {pmin:.3f}, covariance Frobenius error {fro:.1e}"
        assert pmin > 0.01
        assert fro <= 0.1


def test_9_cli_contract(tmp_path, capsys):
    with criterion("9 CLI contract") as det:
        for name, argv in GOLDEN_ARGS.items():
            assert run([*argv, "-i", str(DATA / "house.json"), "--json"]) == 0
            _compare(json.loads(capsys.readouterr().out), json.loads((GOLDEN / f"{name}.json").read_text()))
        line = tmp_path / "line.csv"
        line.write_text("\n".join(f"{t},{t},{t}" for t in range(10)) + "\n")
        codes = {
            "collinear": run(["curvature", "-i", str(line), "--plane", "dl2,dl3", "--json"]),
            "usage": run(["curvature", "-i", str(DATA / "house.json")]),
            "parse": run(["preshape", "-i", str(tmp_path / "missing.csv")]),
        }
        capsys.readouterr()
        det["text"] = f"5 golden documents match; exit codes {codes}"
        assert codes == {"collinear": 3, "usage": 1, "parse": 2}
