import numpy as np

from kendall3d.shape_core import to_preshape
from kendall3d.tangent_basis import horizontal_project


def random_preshape(rng, k):
    return to_preshape(rng.standard_normal((k, 3)))


def random_rotation(rng):
    Q, R = np.linalg.qr(rng.standard_normal((3, 3)))
    Q = Q * np.sign(np.diag(R))
    if np.linalg.det(Q) < 0:
        Q[:, 0] *= -1
    return Q


def random_horizontal(rng, Z):
    return horizontal_project(rng.standard_normal(Z.shape), Z)


def frame(Z):
    """Radial vector followed by the three vertical vectors."""
    from kendall3d.shape_core import vertical_frame

    return [Z, *vertical_frame(Z)]
