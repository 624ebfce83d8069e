"""Orthonormal bases of the horizontal space at a pre-shape.

The ambient space at a pre-shape ``Z`` splits orthogonally into the radial
line spanned by ``Z``, the vertical space spanned by ``Z @ L_a`` and the
horizontal space ``H_Z``, which models the tangent space of shape space.
``H_Z`` is computed as the kernel of the symmetric map

    f(A) = <A, Z> Z + sum_a <A, Z L_a> Z L_a

through a symmetric eigendecomposition of its matrix.

Matrices are flattened row-major (contrast row first, then the x/y/z column),
which fixes the indexing of the ``3(k-1) x 3(k-1)`` matrix of ``f``.

Eigenvectors for the zero eigenvalue are only determined up to a rotation of
the kernel, so a :class:`HorizontalBasis` is reproducible within one run but
only its span is canonical.
"""

from dataclasses import dataclass

import numpy as np

from kendall3d.errors import InvalidArgumentError, SingularShapeError
from kendall3d.shape_core import check_preshape, require_nonsingular, vertical_frame

DEFAULT_ZERO_TOL = 1e-10
HORIZONTAL_TOL = 1e-8


def _spanning_vectors(Z: np.ndarray) -> np.ndarray:
    """Rows: flattened ``Z, Z L_x, Z L_y, Z L_z``."""
    return np.stack([Z.ravel(), *(w.ravel() for w in vertical_frame(Z))])


def endomorphism_matrix(Z) -> np.ndarray:
    """Matrix of ``f`` in the flattened canonical basis (symmetric PSD, rank 4)."""
    Z = check_preshape(Z)
    require_nonsingular(Z)
    W = _spanning_vectors(Z)
    return W.T @ W


def apply_endomorphism(Z, A) -> np.ndarray:
    """Evaluate ``f(A)`` directly from its defining sum."""
    Z = np.asarray(Z, dtype=float)
    A = np.asarray(A, dtype=float)
    out = np.vdot(A, Z) * Z
    for w in vertical_frame(Z):
        out = out + np.vdot(A, w) * w
    return out


@dataclass(frozen=True)
class HorizontalBasis:
    """Orthonormal basis ``t_1..t_d`` of ``H_Z`` with ``d = 3k - 7``.

    ``vectors`` has shape ``(d, k - 1, 3)``; ``eigenvalues`` are the (near
    zero) eigenvalues of ``f`` the vectors were selected for.
    """

    base_point: np.ndarray
    vectors: np.ndarray
    eigenvalues: np.ndarray

    @property
    def d(self) -> int:
        return self.vectors.shape[0]

    @property
    def k(self) -> int:
        return self.base_point.shape[0] + 1

    @property
    def matrix(self) -> np.ndarray:
        """Flattened basis as a ``(d, 3(k-1))`` array with orthonormal rows."""
        return self.vectors.reshape(self.d, -1)

    def __len__(self):
        return self.d

    def __iter__(self):
        return iter(self.vectors)


def horizontal_basis(Z, zero_tol: float = DEFAULT_ZERO_TOL) -> HorizontalBasis:
    """Orthonormal basis of the horizontal space at ``Z``.

    Eigenvectors of ``f`` whose eigenvalue is below ``zero_tol`` times the
    largest eigenvalue are kept, in ascending eigenvalue order.
    """
    Z = check_preshape(Z)
    M = endomorphism_matrix(Z)
    evals, P = np.linalg.eigh(M)
    keep = evals < zero_tol * evals[-1]
    k = Z.shape[0] + 1
    d = 3 * k - 7
    if keep.sum() != d:
        raise SingularShapeError(
            f"kernel of f has dimension {int(keep.sum())}, expected 3k-7 = {d}; "
            "shape is too close to the singular set"
        )
    vectors = P[:, keep].T.reshape(d, k - 1, 3)
    base = Z.copy()
    for a in (base, vectors):
        a.setflags(write=False)
    return HorizontalBasis(base_point=base, vectors=vectors, eigenvalues=evals[keep])


def horizontal_violation(V, Z) -> float:
    """Largest absolute inner product of ``V`` with ``Z`` and ``Z L_a``."""
    V = np.asarray(V, dtype=float)
    return float(np.max(np.abs(_spanning_vectors(np.asarray(Z, dtype=float)) @ V.ravel())))


def coordinates(V, basis: HorizontalBasis, tol: float = HORIZONTAL_TOL) -> np.ndarray:
    """Coordinates ``<V, t_i>`` of a horizontal vector."""
    V = np.asarray(V, dtype=float)
    if V.shape != basis.base_point.shape:
        raise InvalidArgumentError(f"vector shape {V.shape} does not match {basis.base_point.shape}")
    viol = horizontal_violation(V, basis.base_point)
    if viol > tol * max(1.0, np.linalg.norm(V)):
        raise InvalidArgumentError(f"vector is not horizontal: violation {viol:.3g} > {tol:g}")
    return basis.matrix @ V.ravel()


def from_coordinates(c, basis: HorizontalBasis) -> np.ndarray:
    """Tangent vector ``sum_i c_i t_i``.

    ``c`` may also be a ``(n, d)`` batch, giving an ``(n, k - 1, 3)`` result.
    """
    c = np.asarray(c, dtype=float)
    if c.shape[-1] != basis.d or c.ndim > 2:
        raise InvalidArgumentError(f"expected {basis.d} coordinates, got shape {c.shape}")
    if not np.all(np.isfinite(c)):
        raise InvalidArgumentError("coordinates must be finite")
    flat = c @ basis.matrix
    return flat.reshape(c.shape[:-1] + basis.base_point.shape)


def horizontal_project(V, Z) -> np.ndarray:
    """Remove the radial and vertical components of ``V`` at ``Z``."""
    Z = check_preshape(Z)
    require_nonsingular(Z)
    V = np.asarray(V, dtype=float)
    if V.shape != Z.shape:
        raise InvalidArgumentError(f"vector shape {V.shape} does not match {Z.shape}")
    Q, _ = np.linalg.qr(_spanning_vectors(Z).T)
    v = V.ravel()
    return (v - Q @ (Q.T @ v)).reshape(Z.shape)
