"""Reading and writing landmark configurations and simulated samples.

Two formats are supported:

CSV
    One landmark per row, ``x,y,z``; an initial ``x,y,z`` header is optional.
    Sample files hold one flattened configuration per row under the header
    ``l1_x,l1_y,l1_z,l2_x,...``.
JSON
    ``{"name": ..., "landmarks": [[x, y, z], ...]}`` for a configuration and
    an array of ``{"landmarks": ..., "preshape": ...}`` objects for samples.

Floats are written so that they read back bit-for-bit.
"""

import csv
import io
import json
from pathlib import Path

import numpy as np

from kendall3d.errors import InvalidArgumentError, ParseError
from kendall3d.shape_core import Configuration
from kendall3d.simulation import samples_to_configurations

FORMATS = ("csv", "json")


def infer_format(path, fmt: str | None = None) -> str:
    if fmt is not None:
        fmt = fmt.lower()
        if fmt not in FORMATS:
            raise InvalidArgumentError(f"unknown format {fmt!r}; expected one of {FORMATS}")
        return fmt
    suffix = Path(path).suffix.lower().lstrip(".")
    return suffix if suffix in FORMATS else "csv"


def _fmt(x: float) -> str:
    return f"{x:.17g}"


def _parse_float(tok: str, path, line: int) -> float:
    try:
        val = float(tok)
    except ValueError:
        raise ParseError(f"non-numeric value {tok.strip()!r}", path, line) from None
    if not np.isfinite(val):
        raise ParseError(f"non-finite value {tok.strip()!r}", path, line)
    return val


def _read_text(path) -> str:
    try:
        return Path(path).read_text()
    except OSError as exc:
        raise ParseError(f"cannot read file: {exc.strerror}", path) from exc


def parse_csv_landmarks(text: str, path=None) -> np.ndarray:
    rows = []
    for lineno, row in enumerate(csv.reader(io.StringIO(text)), start=1):
        if not row or all(not c.strip() for c in row):
            continue
        if not rows and [c.strip().lower() for c in row] == ["x", "y", "z"]:
            continue
        if len(row) != 3:
            raise ParseError(f"expected 3 fields, got {len(row)}", path, lineno)
        rows.append([_parse_float(c, path, lineno) for c in row])
    return np.array(rows, dtype=float).reshape(-1, 3)


def parse_json_landmarks(text: str, path=None) -> tuple[np.ndarray, str | None]:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON: {exc.msg}", path, exc.lineno) from None
    if not isinstance(doc, dict) or "landmarks" not in doc:
        raise ParseError('expected an object with a "landmarks" array', path)
    name = doc.get("name")
    if name is not None and not isinstance(name, str):
        raise ParseError('"name" must be a string', path)
    pts = doc["landmarks"]
    if not isinstance(pts, list):
        raise ParseError('"landmarks" must be an array', path)
    for i, p in enumerate(pts, start=1):
        if not isinstance(p, list) or len(p) != 3:
            raise ParseError(f"landmark {i} must be an [x, y, z] triple", path)
        if not all(isinstance(c, (int, float)) and not isinstance(c, bool) for c in p):
            raise ParseError(f"landmark {i} has non-numeric coordinates", path)
    arr = np.array(pts, dtype=float).reshape(-1, 3)
    if not np.all(np.isfinite(arr)):
        raise ParseError("landmark coordinates must be finite", path)
    return arr, name


def read_configuration(path, fmt: str | None = None) -> Configuration:
    """Load a configuration from ``path`` (format from the suffix unless given)."""
    fmt = infer_format(path, fmt)
    text = _read_text(path)
    if fmt == "csv":
        pts, name = parse_csv_landmarks(text, path), Path(path).stem
    else:
        pts, name = parse_json_landmarks(text, path)
    if pts.shape[0] < 4:
        raise InvalidArgumentError(f"{path}: need at least 4 landmarks, found {pts.shape[0]}")
    return Configuration(pts, name=name)


def write_configuration(config, path, fmt: str | None = None) -> None:
    config = config if isinstance(config, Configuration) else Configuration(config)
    fmt = infer_format(path, fmt)
    if fmt == "csv":
        lines = ["x,y,z"] + [",".join(_fmt(x) for x in row) for row in config.points]
        text = "\n".join(lines) + "\n"
    else:
        doc = {"landmarks": config.points.tolist()}
        if config.name:
            doc = {"name": config.name, **doc}
        text = json.dumps(doc, indent=2) + "\n"
    _write_text(path, text)


def _write_text(path, text: str) -> None:
    try:
        Path(path).write_text(text)
    except OSError as exc:
        raise OSError(exc.errno, f"cannot write {path}: {exc.strerror}") from exc


def sample_header(k: int) -> list[str]:
    return [f"l{i}_{ax}" for i in range(1, k + 1) for ax in "xyz"]


def samples_to_records(samples, scale: float = 1.0) -> list[dict]:
    configs = samples_to_configurations(samples, scale=scale)
    return [
        {"landmarks": X.tolist(), "preshape": np.asarray(Z, dtype=float).tolist()}
        for X, Z in zip(configs, samples)
    ]


def write_samples(samples, path, fmt: str | None = None, k: int | None = None, scale: float = 1.0) -> None:
    """Write pre-shape samples together with their centered configurations.

    ``k`` is only needed to write a header for an empty CSV sample list.
    """
    fmt = infer_format(path, fmt)
    samples = [np.asarray(Z, dtype=float) for Z in samples]
    if fmt == "json":
        _write_text(path, json.dumps(samples_to_records(samples, scale), indent=1) + "\n")
        return
    if samples:
        k = samples[0].shape[0] + 1
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    if k is not None:
        w.writerow(sample_header(k))
    for X in samples_to_configurations(samples, scale=scale):
        w.writerow([_fmt(x) for x in X.ravel()])
    _write_text(path, buf.getvalue())


def read_samples(path, fmt: str | None = None) -> list[np.ndarray]:
    """Read sample configurations written by :func:`write_samples` as ``(k, 3)`` arrays."""
    fmt = infer_format(path, fmt)
    text = _read_text(path)
    if fmt == "json":
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ParseError(f"invalid JSON: {exc.msg}", path, exc.lineno) from None
        if not isinstance(doc, list):
            raise ParseError("expected an array of samples", path)
        return [np.array(rec["landmarks"], dtype=float) for rec in doc]
    reader = csv.reader(io.StringIO(text))
    header = next(reader, None)
    if header is None:
        return []
    if len(header) % 3 or header != sample_header(len(header) // 3):
        raise ParseError("unexpected sample header", path, 1)
    out = []
    for lineno, row in enumerate(reader, start=2):
        if not row:
            continue
        if len(row) != len(header):
            raise ParseError(f"expected {len(header)} fields, got {len(row)}", path, lineno)
        out.append(np.array([_parse_float(c, path, lineno) for c in row]).reshape(-1, 3))
    return out


def read_preshapes(path) -> list[np.ndarray]:
    """Pre-shapes stored in a JSON sample file."""
    doc = json.loads(_read_text(path))
    return [np.array(rec["preshape"], dtype=float) for rec in doc]
