"""Configurations, Helmertization and the pre-shape sphere.

Pre-shapes are stored as ``(k - 1, 3)`` arrays: one row per Helmert contrast,
one column per spatial axis. Rotations act on the right, ``Z -> Z @ R``, so the
vertical (rotation) directions at ``Z`` are ``Z @ L`` for skew-symmetric ``L``.
"""

from dataclasses import dataclass, field

import numpy as np

from kendall3d.errors import (
    DegenerateConfigurationError,
    InvalidArgumentError,
    NoUniqueLogarithmError,
    SingularShapeError,
)

#: Infinitesimal rotations about x, y and z (a basis of so(3)).
L_X = np.array([[0.0, 0.0, 0.0], [0.0, 0.0, -1.0], [0.0, 1.0, 0.0]])
L_Y = np.array([[0.0, 0.0, 1.0], [0.0, 0.0, 0.0], [-1.0, 0.0, 0.0]])
L_Z = np.array([[0.0, -1.0, 0.0], [1.0, 0.0, 0.0], [0.0, 0.0, 0.0]])
SO3_BASIS = (L_X, L_Y, L_Z)

PRESHAPE_NORM_TOL = 1e-12
DEGENERATE_TOL = 1e-12
RANK_TOL = 1e-8
TANGENT_TOL = 1e-10
ANTIPODAL_TOL = 1e-10


@dataclass(frozen=True)
class Configuration:
    """``k`` labelled landmarks in 3D, stored as a ``(k, 3)`` array."""

    points: np.ndarray
    name: str | None = field(default=None, compare=False)

    def __post_init__(self):
        pts = np.array(self.points, dtype=float)
        if pts.ndim != 2 or pts.shape[1] != 3:
            raise InvalidArgumentError(f"landmarks must be a (k, 3) array, got shape {pts.shape}")
        if pts.shape[0] < 4:
            raise InvalidArgumentError(f"need at least 4 landmarks in 3D, got {pts.shape[0]}")
        if not np.all(np.isfinite(pts)):
            raise InvalidArgumentError("landmark coordinates must be finite")
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)

    @property
    def k(self) -> int:
        return self.points.shape[0]

    @property
    def dim(self) -> int:
        """Dimension of the shape space, ``3k - 7``."""
        return 3 * self.k - 7


def shape_space_dim(k: int) -> int:
    return 3 * k - 7


def helmert_submatrix(k: int) -> np.ndarray:
    """Return the ``(k - 1, k)`` Helmert submatrix.

    Row ``j`` (1-based) holds ``j`` copies of ``-1/sqrt(j(j+1))`` followed by
    ``j/sqrt(j(j+1))`` and then zeros. Rows are orthonormal and sum to zero.
    """
    if int(k) != k or k < 2:
        raise InvalidArgumentError(f"Helmert submatrix needs k >= 2, got {k}")
    k = int(k)
    H = np.zeros((k - 1, k))
    for j in range(1, k):
        h = 1.0 / np.sqrt(j * (j + 1))
        H[j - 1, :j] = -h
        H[j - 1, j] = j * h
    return H


def _as_points(X) -> np.ndarray:
    if isinstance(X, Configuration):
        return X.points
    return Configuration(X).points


def helmertize(X) -> np.ndarray:
    """Translation-free ``(k - 1, 3)`` contrasts of a configuration."""
    pts = _as_points(X)
    return helmert_submatrix(pts.shape[0]) @ pts


def centroid_size(X) -> float:
    return float(np.linalg.norm(helmertize(X)))


def to_preshape(X) -> np.ndarray:
    """Remove location and scale from a configuration.

    Accepts a :class:`Configuration` or anything convertible to a ``(k, 3)``
    array. Raises :class:`DegenerateConfigurationError` when all landmarks
    coincide.
    """
    XH = helmertize(X)
    size = np.linalg.norm(XH)
    if size <= DEGENERATE_TOL:
        raise DegenerateConfigurationError(
            f"all landmarks coincide (centroid size {size:.3g})"
        )
    return XH / size


def check_preshape(Z, tol: float = PRESHAPE_NORM_TOL) -> np.ndarray:
    """Validate and return ``Z`` as a float ``(k - 1, 3)`` array of unit norm."""
    Z = np.asarray(Z, dtype=float)
    if Z.ndim != 2 or Z.shape[1] != 3 or Z.shape[0] < 3:
        raise InvalidArgumentError(f"pre-shape must be a (k-1, 3) array with k >= 4, got {Z.shape}")
    if not np.all(np.isfinite(Z)):
        raise InvalidArgumentError("pre-shape entries must be finite")
    norm = np.linalg.norm(Z)
    if abs(norm - 1.0) > tol:
        raise InvalidArgumentError(f"pre-shape must have unit Frobenius norm, got {norm!r}")
    return Z


def preshape_rank(Z, tol: float = RANK_TOL) -> int:
    s = np.linalg.svd(np.asarray(Z, dtype=float), compute_uv=False)
    return int(np.sum(s > tol))


def require_nonsingular(Z, tol: float = RANK_TOL) -> None:
    """Raise :class:`SingularShapeError` unless ``rank(Z) >= 2``."""
    s = np.linalg.svd(Z, compute_uv=False)
    if s[1] <= tol:
        raise SingularShapeError(
            f"shape is singular: second singular value {s[1]:.3g} <= {tol:g} (rank <= 1)"
        )


def vertical_frame(Z) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Return ``(Z @ L_x, Z @ L_y, Z @ L_z)``, a spanning set of the vertical space."""
    Z = np.asarray(Z, dtype=float)
    return tuple(Z @ L for L in SO3_BASIS)


def inner(A, B) -> float:
    """Frobenius inner product."""
    return float(np.vdot(A, B))


def exp_sphere(Z, v) -> np.ndarray:
    """Great-circle exponential map on the pre-shape sphere."""
    Z = np.asarray(Z, dtype=float)
    v = np.asarray(v, dtype=float)
    if v.shape != Z.shape:
        raise InvalidArgumentError(f"tangent vector shape {v.shape} does not match {Z.shape}")
    nv = np.linalg.norm(v)
    radial = inner(v, Z)
    if abs(radial) > TANGENT_TOL * max(1.0, nv):
        raise InvalidArgumentError(f"vector is not tangent to the sphere at Z: <v, Z> = {radial:.3g}")
    if nv <= 1e-14:
        return Z.copy()
    return np.cos(nv) * Z + np.sin(nv) * (v / nv)


def log_sphere(Z, Y) -> np.ndarray:
    """Inverse of :func:`exp_sphere`; the tangent vector at ``Z`` pointing to ``Y``."""
    Z = np.asarray(Z, dtype=float)
    Y = np.asarray(Y, dtype=float)
    if Y.shape != Z.shape:
        raise InvalidArgumentError(f"pre-shape shapes differ: {Z.shape} vs {Y.shape}")
    c = float(np.clip(inner(Z, Y), -1.0, 1.0))
    if c <= -1.0 + ANTIPODAL_TOL:
        raise NoUniqueLogarithmError("points are antipodal; the logarithm is not unique")
    w = Y - c * Z
    nw = np.linalg.norm(w)
    if nw <= 1e-15:
        return np.zeros_like(Z)
    # atan2 keeps full precision for nearby points where arccos does not
    theta = np.arctan2(nw, c)
    return theta * (w / nw)


def align_rotation(Z, Y) -> tuple[np.ndarray, np.ndarray]:
    """Rotate ``Y`` onto ``Z`` as closely as possible.

    Returns ``(Y @ R, R)`` with ``R`` in SO(3) maximizing ``<Z, Y @ R>``. When
    the unconstrained optimum is a reflection, the column belonging to the
    smallest singular value of ``Y.T @ Z`` is flipped.
    """
    Z = np.asarray(Z, dtype=float)
    Y = np.asarray(Y, dtype=float)
    if Y.shape != Z.shape:
        raise InvalidArgumentError(f"pre-shape shapes differ: {Z.shape} vs {Y.shape}")
    A, _, Bt = np.linalg.svd(Y.T @ Z)
    D = np.ones(3)
    if np.linalg.det(A @ Bt) < 0:
        D[-1] = -1.0
    R = (A * D) @ Bt
    return Y @ R, R
