"""Gaussian simulation in the tangent space of shape space.

Coordinates are drawn in an orthonormal basis of the horizontal space at a
reference pre-shape, turned into tangent vectors and pushed onto the pre-shape
sphere with the exponential map. Draws whose norm reaches ``pi`` (the
injectivity radius) are discarded and redrawn.

Every sample owns an independent random stream derived from ``(seed, index)``,
so results do not depend on whether samples are generated in parallel.
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from kendall3d.errors import InvalidArgumentError, SimulationSpecError
from kendall3d.shape_core import exp_sphere, helmert_submatrix
from kendall3d.tangent_basis import HorizontalBasis, from_coordinates, horizontal_basis

log = logging.getLogger(__name__)

MAX_REJECTIONS = 1000


@dataclass(frozen=True)
class SimulationSpec:
    """``sigma`` is either a positive scalar or a ``d x d`` PSD covariance."""

    sigma: float | np.ndarray
    n_samples: int
    seed: int = 0

    def __post_init__(self):
        if int(self.n_samples) != self.n_samples or self.n_samples < 1:
            raise SimulationSpecError(f"n_samples must be a positive integer, got {self.n_samples}")
        if not 0 <= int(self.seed) < 2**64:
            raise SimulationSpecError(f"seed must be a 64-bit unsigned integer, got {self.seed}")
        if np.ndim(self.sigma) == 0:
            if not (np.isfinite(self.sigma) and self.sigma > 0):
                raise SimulationSpecError(f"sigma must be positive, got {self.sigma}")
        else:
            cov = np.asarray(self.sigma, dtype=float)
            if cov.ndim != 2 or cov.shape[0] != cov.shape[1]:
                raise SimulationSpecError(f"covariance must be square, got shape {cov.shape}")
            if not np.allclose(cov, cov.T, atol=1e-12, rtol=0):
                raise SimulationSpecError("covariance must be symmetric")
            if np.linalg.eigvalsh(cov)[0] < -1e-12:
                raise SimulationSpecError("covariance must be positive semi-definite")

    def factor(self, d: int) -> np.ndarray | float:
        """Scale (or matrix ``F`` with ``F F^T = cov``) applied to standard normals."""
        if np.ndim(self.sigma) == 0:
            return float(self.sigma)
        cov = np.asarray(self.sigma, dtype=float)
        if cov.shape != (d, d):
            raise SimulationSpecError(f"covariance must be {d}x{d} for this shape, got {cov.shape}")
        w, Q = np.linalg.eigh(cov)
        return Q * np.sqrt(np.clip(w, 0.0, None))


@dataclass(frozen=True)
class Simulation:
    """Samples on the pre-shape sphere with the tangent coordinates that produced them."""

    preshapes: np.ndarray  # (n, k-1, 3)
    coords: np.ndarray  # (n, d)
    basis: HorizontalBasis

    def __len__(self):
        return self.preshapes.shape[0]


def _draw(seed: int, index: int, d: int, factor) -> np.ndarray:
    rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(index,)))
    for attempt in range(MAX_REJECTIONS + 1):
        z = rng.standard_normal(d)
        c = factor * z if np.ndim(factor) == 0 else factor @ z
        if np.linalg.norm(c) < np.pi:
            if attempt:
                log.debug("sample %d accepted after %d rejections", index, attempt)
            return c
        log.info("sample %d: tangent draw with norm >= pi rejected", index)
    raise SimulationSpecError(
        f"{MAX_REJECTIONS} consecutive draws exceeded the injectivity radius; sigma is too large"
    )


def simulate_in_tangent_space(Z, spec: SimulationSpec, workers: int | None = None) -> Simulation:
    """Draw ``spec.n_samples`` shapes around the reference pre-shape ``Z``.

    ``workers > 1`` generates samples in a thread pool; output is identical to
    the sequential run.
    """
    basis = horizontal_basis(Z)
    Z = basis.base_point
    factor = spec.factor(basis.d)
    seed = int(spec.seed)

    def one(i):
        return _draw(seed, i, basis.d, factor)

    idx = range(int(spec.n_samples))
    if workers and workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            coords = list(pool.map(one, idx))
    else:
        coords = [one(i) for i in idx]
    coords = np.array(coords).reshape(len(idx), basis.d)
    tangents = from_coordinates(coords, basis)
    shapes = np.array([exp_sphere(Z, v) for v in tangents])
    return Simulation(preshapes=shapes, coords=coords, basis=basis)


def samples_to_configurations(samples, k: int | None = None, scale: float = 1.0) -> list[np.ndarray]:
    """Centered ``k x 3`` configurations whose pre-shapes are the given samples.

    ``scale`` sets the centroid size of the returned configurations.
    """
    samples = [np.asarray(Z, dtype=float) for Z in samples]
    if not samples:
        return []
    if k is None:
        k = samples[0].shape[0] + 1
    Ht = helmert_submatrix(k).T
    out = []
    for Z in samples:
        if Z.shape != (k - 1, 3):
            raise InvalidArgumentError(f"sample shape {Z.shape} inconsistent with k = {k}")
        out.append(scale * (Ht @ Z))
    return out
