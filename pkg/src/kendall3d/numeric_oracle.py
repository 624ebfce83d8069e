"""Finite-difference estimate of the vertical bracket norm.

For the quotient of the pre-shape sphere by SO(3), the vertical part of the
bracket of two horizontal fields is twice the O'Neill tensor,
``[U, V]^V = 2 A_U V``, and ``A_U V`` is the vertical part of the covariant
derivative of ``V`` along ``U``. Extending ``v`` to the field
``Y -> horizontal part of v at Y`` and differentiating it along the great
circle through ``Z`` in direction ``u`` therefore gives ``|[u, v]^V|^2``
without any of the closed-form machinery in :mod:`kendall3d.kendall_curvature`.

The projections here are computed locally (QR of the radial/vertical frame) on
purpose, so that this module shares no code path with the basis constructions
it is used to check.
"""

from dataclasses import dataclass

import numpy as np

from kendall3d.errors import InvalidArgumentError, SingularShapeError
from kendall3d.shape_core import check_preshape, exp_sphere, vertical_frame


@dataclass(frozen=True)
class OracleConfig:
    step: float = 1e-4
    scheme: int = 2

    def __post_init__(self):
        if not 1e-8 < self.step < 1e-2:
            raise InvalidArgumentError(f"oracle step must lie in (1e-8, 1e-2), got {self.step}")
        if self.scheme not in (2, 4):
            raise InvalidArgumentError(f"central-difference order must be 2 or 4, got {self.scheme}")


def _frame_qr(Y: np.ndarray, with_radial: bool) -> np.ndarray:
    cols = [w.ravel() for w in vertical_frame(Y)]
    if with_radial:
        cols.insert(0, Y.ravel())
    Q, R = np.linalg.qr(np.stack(cols, axis=1))
    if np.min(np.abs(np.diag(R))) <= 1e-10:
        raise SingularShapeError("vertical frame is rank deficient: shape is singular")
    return Q


def _horizontal_part(v: np.ndarray, Y: np.ndarray) -> np.ndarray:
    Q = _frame_qr(Y, with_radial=True)
    x = v.ravel()
    return x - Q @ (Q.T @ x)


def oneill_bracket_norm_sq(Z, u, v, cfg: OracleConfig | None = None) -> float:
    """Estimate ``|[u, v]^V|^2`` at ``Z`` by central differences.

    ``u, v`` should be horizontal and orthonormal at ``Z``. The error is
    ``O(step^2)`` for the default scheme and ``O(step^4)`` for ``scheme=4``.
    """
    cfg = cfg or OracleConfig()
    Z = check_preshape(Z)
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    h = cfg.step

    def field_at(t):
        return _horizontal_part(v, exp_sphere(Z, t * u))

    if cfg.scheme == 2:
        deriv = (field_at(h) - field_at(-h)) / (2.0 * h)
    else:
        deriv = (
            -field_at(2 * h) + 8.0 * field_at(h) - 8.0 * field_at(-h) + field_at(-2 * h)
        ) / (12.0 * h)
    Qv = _frame_qr(Z, with_radial=False)
    vert = Qv.T @ deriv
    return float(4.0 * (vert @ vert))
