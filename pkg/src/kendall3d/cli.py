"""Command-line interface: ``kendall3d <subcommand> ...``.

Exit codes: 0 success, 1 usage error, 2 parse/data error, 3 geometric
degeneracy, 4 failed ``check``. Set ``KENDALL3D_LOG`` to one of
``error, warn, info, debug`` to control diagnostics on stderr.
"""

import argparse
import json
import logging
import os
import sys
from pathlib import Path

import numpy as np

from kendall3d import errors
from kendall3d.kendall_curvature import (
    CurvatureReport,
    bracket_norm_sq,
    compute_curvature,
    kendall_basis,
    kendall_coordinates,
    orthonormalize_plane,
    vertical_bracket,
)
from kendall3d.landmark_io import infer_format, read_configuration, samples_to_records, write_samples
from kendall3d.numeric_oracle import OracleConfig, oneill_bracket_norm_sq
from kendall3d.shape_core import SO3_BASIS, centroid_size, preshape_rank, shape_space_dim, to_preshape
from kendall3d.simulation import SimulationSpec, simulate_in_tangent_space
from kendall3d.tangent_basis import DEFAULT_ZERO_TOL, horizontal_basis, horizontal_project

log = logging.getLogger("kendall3d")

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_DEGENERATE, EXIT_CHECK = 0, 1, 2, 3, 4
CHECK_TOL = 1e-3

_DEGENERATE = (
    errors.DegenerateConfigurationError,
    errors.SingularShapeError,
    errors.DegenerateSpectrumError,
    errors.IllConditionedBasisError,
    errors.DegeneratePlaneError,
    errors.NoUniqueLogarithmError,
)
_LOG_LEVELS = {"error": logging.ERROR, "warn": logging.WARNING, "info": logging.INFO, "debug": logging.DEBUG}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _exit_code(exc: BaseException) -> int:
    if isinstance(exc, UsageError):
        return EXIT_USAGE
    if isinstance(exc, _DEGENERATE):
        return EXIT_DEGENERATE
    return EXIT_DATA


def _floats(text: str) -> list[float]:
    try:
        return [float(t) for t in text.replace(" ", "").split(",") if t]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--input", "-i", required=True, help="landmark file (CSV or JSON)")
    common.add_argument("--format", choices=("csv", "json"), help="input format (default: from suffix)")
    common.add_argument("--output", "-o", help="also write the result document to this file")
    common.add_argument("--json", action="store_true", help="machine-readable JSON on stdout")

    parser = _Parser(prog="kendall3d", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    sub.add_parser("preshape", parents=[common], help="pre-shape matrix and diagnostics")

    p = sub.add_parser("basis", parents=[common], help="orthonormal horizontal basis (3k-7 vectors)")
    p.add_argument("--tol", type=float, default=DEFAULT_ZERO_TOL,
                   help=f"relative zero-eigenvalue threshold (default {DEFAULT_ZERO_TOL:g})")

    p = sub.add_parser("curvature", parents=[common], help="sectional curvature of a plane")
    p.add_argument("--plane", help="two Kendall basis labels or indices, e.g. dl2,dl3 or xi1_2,xi1_4")
    p.add_argument("--u-coords", type=_floats, help="Kendall-basis coefficients of u (comma separated)")
    p.add_argument("--v-coords", type=_floats, help="Kendall-basis coefficients of v (comma separated)")

    p = sub.add_parser("simulate", parents=[common], help="Gaussian samples in the tangent space")
    p.add_argument("--sigma", type=float, required=True, help="standard deviation per tangent coordinate")
    p.add_argument("--n", type=int, required=True, help="number of samples")
    p.add_argument("--seed", type=int, required=True, help="random seed (64-bit unsigned)")
    p.add_argument("--emit-configs", action="store_true", help="include centered landmark configurations")

    p = sub.add_parser("check", parents=[common], help="closed-form curvature vs finite-difference oracle")
    p.add_argument("--step", type=float, default=1e-4, help="oracle finite-difference step (default 1e-4)")
    p.add_argument("--trials", type=int, default=3, help="number of random planes (default 3)")
    p.add_argument("--seed", type=int, default=0, help="seed for the random planes (default 0)")
    return parser


def _matrix(a) -> list:
    return np.asarray(a, dtype=float).tolist()


def cmd_preshape(args, config):
    Z = to_preshape(config)
    s = np.linalg.svd(Z, compute_uv=False)
    doc = {
        "command": "preshape",
        "name": config.name,
        "k": config.k,
        "d": shape_space_dim(config.k),
        "rank": preshape_rank(Z),
        "singular_values": s.tolist(),
        "centroid_size": centroid_size(config),
        "preshape": _matrix(Z),
    }
    text = (
        f"k = {doc['k']}, d = {doc['d']}, rank = {doc['rank']}\n"
        f"singular values: {', '.join(f'{x:.6g}' for x in s)}\n"
        + "\n".join(" ".join(f"{x: .8f}" for x in row) for row in Z)
    )
    return doc, text, EXIT_OK


def cmd_basis(args, config):
    Z = to_preshape(config)
    B = horizontal_basis(Z, zero_tol=args.tol)
    M = B.matrix
    ortho = float(np.max(np.abs(M @ M.T - np.eye(B.d))))
    frame = np.stack([Z.ravel()] + [(Z @ L).ravel() for L in SO3_BASIS])
    horiz = float(np.max(np.abs(M @ frame.T)))
    doc = {
        "command": "basis",
        "k": config.k,
        "d": B.d,
        "tol": args.tol,
        "vectors": M.tolist(),
        "orthonormality_residual": ortho,
        "horizontality_residual": horiz,
    }
    text = f"{B.d} basis vectors at k = {config.k}; orthonormality residual {ortho:.3g}, horizontality residual {horiz:.3g}"
    return doc, text, EXIT_OK


def _parse_plane(spec: str):
    items = [s.strip() for s in spec.split(",")]
    if len(items) != 2 or not all(items):
        raise UsageError(f"--plane expects two comma-separated labels, got {spec!r}")
    return tuple(int(s) if s.isdigit() else s for s in items)


def cmd_curvature(args, config):
    if args.plane and (args.u_coords or args.v_coords):
        raise UsageError("use either --plane or --u-coords/--v-coords, not both")
    if args.plane:
        plane = _parse_plane(args.plane)
    elif args.u_coords and args.v_coords:
        plane = (np.array(args.u_coords), np.array(args.v_coords))
    else:
        raise UsageError("curvature needs --plane or both --u-coords and --v-coords")
    report: CurvatureReport = compute_curvature(config, plane)
    doc = {"command": "curvature", **report.to_dict()}
    text = (
        f"K = {report.curvature:.12g}  (plane {report.plane[0]}, {report.plane[1]})\n"
        f"|[u,v]^V|^2 = {report.bracket_norm_sq:.6g}; lambdas = "
        + ", ".join(f"{x:.6g}" for x in report.lambdas)
        + f"; Gram condition = {report.gram_condition:.3g}"
    )
    return doc, text, EXIT_OK


def cmd_simulate(args, config):
    Z = to_preshape(config)
    spec = SimulationSpec(sigma=args.sigma, n_samples=args.n, seed=args.seed)
    sim = simulate_in_tangent_space(Z, spec)
    scale = centroid_size(config)
    records = samples_to_records(sim.preshapes, scale=scale)
    samples = []
    for rec, c in zip(records, sim.coords):
        item = {"coords": c.tolist(), "preshape": rec["preshape"]}
        if args.emit_configs:
            item["landmarks"] = rec["landmarks"]
        samples.append(item)
    doc = {
        "command": "simulate",
        "k": config.k,
        "d": sim.basis.d,
        "sigma": args.sigma,
        "n": args.n,
        "seed": args.seed,
        "samples": samples,
    }
    if args.output:
        write_samples(sim.preshapes, args.output, infer_format(args.output), scale=scale)
    text = f"{len(sim)} samples at k = {config.k} (d = {sim.basis.d}), sigma = {args.sigma:g}, seed = {args.seed}"
    if args.output:
        text += f"; written to {args.output}"
    return doc, text, EXIT_OK


def cmd_check(args, config):
    if args.trials < 1:
        raise UsageError("--trials must be at least 1")
    try:
        cfg = OracleConfig(step=args.step)
    except errors.InvalidArgumentError as exc:
        raise UsageError(str(exc)) from None
    Z = to_preshape(config)
    kb = kendall_basis(Z)
    rng = np.random.default_rng(args.seed)
    trials = []
    for _ in range(args.trials):
        u = horizontal_project(rng.standard_normal(Z.shape), Z)
        v = horizontal_project(rng.standard_normal(Z.shape), Z)
        u, v = orthonormalize_plane(u, v)
        closed = bracket_norm_sq(kb, vertical_bracket(kb, kendall_coordinates(u, kb), kendall_coordinates(v, kb)))
        oracle = oneill_bracket_norm_sq(Z, u, v, cfg)
        rel = abs(closed - oracle) / max(abs(closed), 1e-12)
        trials.append({"closed_form": closed, "oracle": oracle, "rel_discrepancy": rel})
    worst = max(t["rel_discrepancy"] for t in trials)
    passed = worst <= CHECK_TOL
    doc = {
        "command": "check",
        "k": config.k,
        "trials": trials,
        "step": args.step,
        "max_rel_discrepancy": worst,
        "tolerance": CHECK_TOL,
        "passed": passed,
    }
    text = f"max relative discrepancy {worst:.3e} over {args.trials} planes: {'ok' if passed else 'FAILED'}"
    return doc, text, EXIT_OK if passed else EXIT_CHECK


COMMANDS = {
    "preshape": cmd_preshape,
    "basis": cmd_basis,
    "curvature": cmd_curvature,
    "simulate": cmd_simulate,
    "check": cmd_check,
}


def _configure_logging():
    level = _LOG_LEVELS.get(os.environ.get("KENDALL3D_LOG", "warn").strip().lower(), logging.WARNING)
    logger = logging.getLogger("kendall3d")
    logger.setLevel(level)
    if not logger.handlers:
        h = logging.StreamHandler(sys.stderr)
        h.setFormatter(logging.Formatter("kendall3d: %(levelname)s: %(message)s"))
        logger.addHandler(h)


def _dump(doc) -> str:
    return json.dumps(doc, indent=2, sort_keys=False) + "\n"


def run(argv=None) -> int:
    _configure_logging()
    argv = list(sys.argv[1:] if argv is None else argv)
    want_json = "--json" in argv
    try:
        args = build_parser().parse_args(argv)
        config = read_configuration(args.input, args.format)
        doc, text, code = COMMANDS[args.command](args, config)
        if args.output and args.command != "simulate":
            Path(args.output).write_text(_dump(doc))
    except (UsageError, errors.KendallError, OSError) as exc:
        code = _exit_code(exc)
        print(f"kendall3d: error: {exc}", file=sys.stderr)
        if want_json:
            sys.stdout.write(_dump({"error": {"type": type(exc).__name__, "message": str(exc), "exit_code": code}}))
        return code
    if args.json:
        sys.stdout.write(_dump(doc))
    else:
        print(text)
    return code


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
