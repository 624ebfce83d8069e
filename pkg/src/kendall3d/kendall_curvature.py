"""Sectional curvature of Kendall's 3D shape space.

The curvature of the plane spanned by orthonormal horizontal vectors ``u, v``
is ``1 + 3/4 |[u, v]^V|^2``. The vertical bracket is evaluated in closed form
through an adapted basis built from a pseudo-singular value decomposition of
the pre-shape: two radial directions ``dl2, dl3`` (variations of the
pseudo-singular values) and the directions ``xi_ij``. Brackets of basis
vectors are multiples of the vertical vectors ``eta_12, eta_13, eta_23`` whose
squared norms are ``lambda_i^2 + lambda_j^2``.

Index conventions: in the 3-row layout ``X = Z.T = V (Lambda, 0) U.T`` used to
state the formulas, ``E_ij`` is the ``3 x (k-1)`` elementary matrix and
``eta_ij`` is the vertical vector ``(E_ij - E_ji) X``. Labels are 1-based
(``dl2``, ``xi1_3``, ``xi2_7``); everything internal is 0-based.
"""

import re
from dataclasses import dataclass, field

import numpy as np

from kendall3d.errors import (
    DegeneratePlaneError,
    DegenerateSpectrumError,
    IllConditionedBasisError,
    InvalidArgumentError,
    SingularShapeError,
)
from kendall3d.shape_core import SO3_BASIS, check_preshape, to_preshape

SINGULAR_TOL = 1e-8
SPECTRUM_TOL = 1e-8
MAX_GRAM_CONDITION = 1e12
HORIZONTAL_TOL = 1e-8
PLANE_TOL = 1e-12

# canonical eta slots
ETA_PAIRS = ((0, 1), (0, 2), (1, 2))
_SLOT = {p: s for s, p in enumerate(ETA_PAIRS)}


@dataclass(frozen=True)
class SvdData:
    """``Z = U Sigma V^T`` with ``U, V`` rotations and ``Sigma = diag(lambdas)`` padded with zero rows.

    ``lambdas`` satisfy ``l1 >= l2 >= |l3|``. For ``k = 4`` the sign of ``l3``
    records the orientation of the tetrahedron (``sign(det Z)``); for larger
    ``k`` it is non-negative.
    """

    u_mat: np.ndarray
    lambdas: np.ndarray
    v_mat: np.ndarray

    @property
    def k(self) -> int:
        return self.u_mat.shape[0] + 1

    @property
    def sigma(self) -> np.ndarray:
        S = np.zeros((self.u_mat.shape[0], 3))
        S[:3, :3] = np.diag(self.lambdas)
        return S

    def reconstruct(self) -> np.ndarray:
        return self.u_mat @ self.sigma @ self.v_mat.T


def kendall_svd(Z, tol: float = SINGULAR_TOL) -> SvdData:
    """Pseudo-singular value decomposition with rotations on both sides."""
    Z = check_preshape(Z)
    U, s, Vt = np.linalg.svd(Z, full_matrices=True)
    V = Vt.T.copy()
    lam = s.copy()
    if s[1] <= tol:
        raise SingularShapeError(f"second singular value {s[1]:.3g} <= {tol:g}: shape is singular")
    # Both factors are made proper rotations; l3 u3 v3^T is unchanged when any
    # two of (l3, u3, v3) flip. With k > 4 the spare columns of U absorb the
    # orientation, so l3 < 0 only occurs for k = 4.
    square = U.shape[0] == 3
    if np.linalg.det(V) < 0:
        V[:, 2] *= -1.0
        if square:
            lam[2] *= -1.0
        else:
            U[:, 2] *= -1.0
    if np.linalg.det(U) < 0:
        if square:
            U[:, 2] *= -1.0
            lam[2] *= -1.0
        else:
            # columns beyond the third multiply zero rows of Sigma
            U[:, -1] *= -1.0
    for a in (U, lam, V):
        a.setflags(write=False)
    return SvdData(u_mat=U, lambdas=lam, v_mat=V)


@dataclass(frozen=True)
class BracketCoefficients:
    """Coefficients of ``eta_12, eta_13, eta_23`` in a vertical bracket."""

    c12: float
    c13: float
    c23: float

    @property
    def array(self) -> np.ndarray:
        return np.array([self.c12, self.c13, self.c23])

    def __neg__(self):
        return BracketCoefficients(-self.c12, -self.c13, -self.c23)


def basis_label(kind: tuple) -> str:
    if kind[0] == "dl":
        return f"dl{kind[1] + 1}"
    return f"xi{kind[1] + 1}_{kind[2] + 1}"


_LABEL_RE = re.compile(r"^(?:dl([23])|xi([123])_?(\d+))$")


def parse_label(label: str) -> tuple:
    """``'dl2'`` -> ``('dl', 1)``, ``'xi1_4'`` (or ``'xi14'``) -> ``('xi', 0, 3)``."""
    m = _LABEL_RE.match(label.strip().lower())
    if not m:
        raise InvalidArgumentError(f"unrecognised Kendall basis label {label!r}")
    if m.group(1):
        return ("dl", int(m.group(1)) - 1)
    i, j = int(m.group(2)) - 1, int(m.group(3)) - 1
    if j <= i:
        raise InvalidArgumentError(f"label {label!r}: need i < j")
    return ("xi", i, j)


def _eta_put(out: dict, p: int, q: int, coef: float) -> None:
    """Accumulate ``coef * eta_pq`` using ``eta_qp = -eta_pq``."""
    if p < q:
        out[_SLOT[(p, q)]] = out.get(_SLOT[(p, q)], 0.0) + coef
    else:
        out[_SLOT[(q, p)]] = out.get(_SLOT[(q, p)], 0.0) - coef


def _dl_xi(l_idx: int, i: int, j: int, lam) -> float:
    """Coefficient of ``eta_ij`` in ``[dl_l, xi_ij]^V`` for ``i < j <= 3``."""
    l1 = lam[0]
    li, lj = lam[i], lam[j]
    if i == 0 and l_idx == j:
        val = (1.0 / l1) * (l1**2 - lj**2) / (l1**2 + lj**2)
    elif i == 0:
        ll = lam[l_idx]
        val = (lj * ll / l1) * (l1**2 - lj**2) / (l1**2 + lj**2) ** 2
    elif l_idx == i:
        val = lj * (lj**2 - li**2) / (li**2 + lj**2) ** 2
    elif l_idx == j:
        val = li * (li**2 - lj**2) / (li**2 + lj**2) ** 2
    else:
        return 0.0
    # eta_ij = (E_ij - E_ji) X carries the opposite sign to the xi-xi cases
    return -2.0 * val


def _shared_index(s: int, p: int, q: int, lam) -> float:
    """Coefficient of ``eta_pq`` in ``[xi_sp, xi_sq]^V``; ``s, p, q`` distinct and <= 3."""
    ls, lp, lq = lam[s], lam[p], lam[q]
    return (
        -4.0 * (ls * lp / (ls**2 + lp**2)) * (ls * lq / (ls**2 + lq**2))
        + 2.0 * lp * lq / (lp**2 + lq**2)
    )


def _bracket_entry(a: tuple, b: tuple, lam) -> dict:
    """``[a, b]^V`` for basis kinds ``a, b`` as ``{slot: coefficient}``."""
    out: dict = {}
    if a == b or (a[0] == "dl" and b[0] == "dl"):
        return out
    if a[0] == "xi" and b[0] == "dl":
        return {s: -c for s, c in _bracket_entry(b, a, lam).items()}
    if a[0] == "dl":
        _, i, j = b
        if j < 3:
            _eta_put(out, i, j, _dl_xi(a[1], i, j, lam))
        return out
    (_, i1, j1), (_, i2, j2) = a, b
    if j1 < 3 and j2 < 3:
        (s,) = {i1, j1} & {i2, j2}
        # reorder so the shared index comes first; xi_ji = -xi_ij
        sign_a, p = (1.0, j1) if i1 == s else (-1.0, i1)
        sign_b, q = (1.0, j2) if i2 == s else (-1.0, i2)
        _eta_put(out, p, q, sign_a * sign_b * _shared_index(s, p, q, lam))
    elif j1 >= 3 and j1 == j2:
        li1, li2 = lam[i1], lam[i2]
        _eta_put(out, i1, i2, 2.0 * li1 * li2 / (li1**2 + li2**2))
    return out


@dataclass(frozen=True)
class KendallBasis:
    """The adapted basis ``{dl2, dl3} U {xi_ij}`` at a pre-shape.

    ``vectors`` has shape ``(3k - 7, k - 1, 3)`` ordered ``dl2, dl3, xi1_2,
    xi1_3, xi2_3`` and then ``xi1_j, xi2_j, xi3_j`` for ``j = 4..k-1``. The
    vectors are horizontal but neither normalized nor mutually orthogonal.
    """

    base_point: np.ndarray
    svd: SvdData
    vectors: np.ndarray
    kinds: tuple
    gram: np.ndarray
    gram_condition: float
    # sparse commutator table: rows (a, b) with a < b, the eta slot and coefficient
    _pairs: np.ndarray = field(repr=False)
    _slots: np.ndarray = field(repr=False)
    _coefs: np.ndarray = field(repr=False)

    @property
    def labels(self) -> list[str]:
        return [basis_label(kd) for kd in self.kinds]

    @property
    def dl_vectors(self) -> np.ndarray:
        return self.vectors[:2]

    @property
    def xi_small(self) -> np.ndarray:
        return self.vectors[2:5]

    @property
    def xi_large(self) -> np.ndarray:
        return self.vectors[5:]

    @property
    def index_table(self) -> dict[int, str]:
        return dict(enumerate(self.labels))

    @property
    def d(self) -> int:
        return self.vectors.shape[0]

    def index_of(self, label) -> int:
        """Position of a basis vector given a label (``'xi1_4'``) or an int index."""
        if isinstance(label, (int, np.integer)):
            if not 0 <= label < self.d:
                raise InvalidArgumentError(f"basis index {label} out of range 0..{self.d - 1}")
            return int(label)
        kind = parse_label(label)
        try:
            return self.kinds.index(kind)
        except ValueError:
            raise InvalidArgumentError(f"label {label!r} not present for k = {self.svd.k}") from None

    def combine(self, c) -> np.ndarray:
        """Vector with coefficients ``c`` in this basis."""
        c = np.asarray(c, dtype=float)
        if c.shape != (self.d,):
            raise InvalidArgumentError(f"expected {self.d} coefficients, got shape {c.shape}")
        return np.tensordot(c, self.vectors, axes=1)


def get_xi_basis(svd: SvdData, k: int | None = None, spectrum_tol: float = SPECTRUM_TOL) -> KendallBasis:
    """Build the Kendall basis from a pseudo-SVD.

    Raises :class:`DegenerateSpectrumError` when two of ``l1^2, l2^2, l3^2``
    coincide and :class:`SingularShapeError` when a required pseudo-singular
    value vanishes.
    """
    n = svd.u_mat.shape[0]
    if k is None:
        k = n + 1
    if k != n + 1:
        raise InvalidArgumentError(f"k = {k} inconsistent with SVD of a ({n}, 3) pre-shape")
    lam = np.asarray(svd.lambdas, dtype=float)
    if lam[1] <= SINGULAR_TOL:
        raise SingularShapeError(f"lambda_2 = {lam[1]:.3g}: shape is singular")
    if k > 4 and abs(lam[2]) <= SINGULAR_TOL:
        raise SingularShapeError(
            f"lambda_3 = {lam[2]:.3g}: the xi_3j directions vanish for planar shapes"
        )
    for i, j in ETA_PAIRS:
        if abs(lam[i] ** 2 - lam[j] ** 2) <= spectrum_tol:
            raise DegenerateSpectrumError(
                f"lambda_{i + 1}^2 and lambda_{j + 1}^2 coincide within {spectrum_tol:g}"
            )

    U, V = svd.u_mat, svd.v_mat
    Lam = np.diag(lam)

    def E(i, j):
        m = np.zeros((3, n))
        m[i, j] = 1.0
        return m

    def lift(W):
        # 3 x n layout back to (k-1, 3) storage
        return U @ W.T @ V.T

    kinds, vecs = [], []
    for i in (1, 2):
        kinds.append(("dl", i))
        vecs.append(lift(E(i, i) - (lam[i] / lam[0]) * E(0, 0)))
    for i, j in ETA_PAIRS:
        kinds.append(("xi", i, j))
        scale = (lam[i] ** 2 - lam[j] ** 2) / (lam[i] ** 2 + lam[j] ** 2)
        vecs.append(scale * lift(Lam @ (E(i, j) + E(j, i))))
    for j in range(3, n):
        for i in range(3):
            kinds.append(("xi", i, j))
            vecs.append(lam[i] * lift(E(i, j)))

    vectors = np.array(vecs).reshape(len(vecs), n, 3)
    flat = vectors.reshape(len(vecs), -1)
    gram = flat @ flat.T
    cond = float(np.linalg.cond(gram))

    pairs, slots, coefs = [], [], []
    for a in range(len(kinds)):
        for b in range(a + 1, len(kinds)):
            for s, c in _bracket_entry(kinds[a], kinds[b], lam).items():
                if c != 0.0:
                    pairs.append((a, b))
                    slots.append(s)
                    coefs.append(c)

    base = svd.reconstruct()
    for arr in (vectors, gram, base):
        arr.setflags(write=False)
    return KendallBasis(
        base_point=base,
        svd=svd,
        vectors=vectors,
        kinds=tuple(kinds),
        gram=gram,
        gram_condition=cond,
        _pairs=np.array(pairs, dtype=int).reshape(-1, 2),
        _slots=np.array(slots, dtype=int),
        _coefs=np.array(coefs, dtype=float),
    )


def kendall_basis(Z) -> KendallBasis:
    return get_xi_basis(kendall_svd(Z))


def _horizontal_violation(V, Z) -> float:
    frame = [Z] + [Z @ L for L in SO3_BASIS]
    return max(abs(float(np.vdot(V, w))) for w in frame)


def kendall_coordinates(V, kb: KendallBasis, tol: float = HORIZONTAL_TOL) -> np.ndarray:
    """Coefficients of a horizontal vector in the (non-orthogonal) Kendall basis."""
    V = np.asarray(V, dtype=float)
    if V.shape != kb.base_point.shape:
        raise InvalidArgumentError(f"vector shape {V.shape} does not match {kb.base_point.shape}")
    nv = float(np.linalg.norm(V))
    viol = _horizontal_violation(V, kb.base_point)
    if viol > tol * max(1.0, nv):
        raise InvalidArgumentError(f"vector is not horizontal: violation {viol:.3g} > {tol:g}")
    if kb.gram_condition > MAX_GRAM_CONDITION:
        raise IllConditionedBasisError(
            f"Kendall basis Gram matrix condition number {kb.gram_condition:.3g} exceeds {MAX_GRAM_CONDITION:g}"
        )
    flat = kb.vectors.reshape(kb.d, -1)
    c = np.linalg.solve(kb.gram, flat @ V.ravel())
    resid = float(np.linalg.norm(c @ flat - V.ravel()))
    if resid > 1e-8 * max(nv, 1e-300):
        raise IllConditionedBasisError(f"Kendall coordinate reconstruction residual {resid:.3g}")
    return c


def vertical_bracket(kb: KendallBasis, cu, cv) -> BracketCoefficients:
    """Vertical bracket of two horizontal vectors given by Kendall coefficients."""
    cu = np.asarray(cu, dtype=float)
    cv = np.asarray(cv, dtype=float)
    if cu.shape != (kb.d,) or cv.shape != (kb.d,):
        raise InvalidArgumentError(
            f"expected {kb.d} coefficients each, got shapes {cu.shape} and {cv.shape}"
        )
    a, b = kb._pairs[:, 0], kb._pairs[:, 1]
    # cu_a cv_b - cu_b cv_a flips sign exactly when u and v are swapped
    w = kb._coefs * (cu[a] * cv[b] - cu[b] * cv[a])
    out = np.bincount(kb._slots, weights=w, minlength=3)
    return BracketCoefficients(*map(float, out))


def bracket_norm_sq(kb: KendallBasis, bc: BracketCoefficients) -> float:
    """``|c12 eta_12 + c13 eta_13 + c23 eta_23|^2`` with ``|eta_ij|^2 = l_i^2 + l_j^2``."""
    l2 = np.asarray(kb.svd.lambdas) ** 2
    c = bc.array
    weights = np.array([l2[i] + l2[j] for i, j in ETA_PAIRS])
    return float(np.sum(c * c * weights))


def orthonormalize_plane(u, v, tol: float = PLANE_TOL) -> tuple[np.ndarray, np.ndarray]:
    """Gram-Schmidt on ``(u, v)``; raises :class:`DegeneratePlaneError` if dependent."""
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    nu, nv = np.linalg.norm(u), np.linalg.norm(v)
    if nu == 0.0 or nv == 0.0:
        raise DegeneratePlaneError("a plane needs two non-zero vectors")
    uh = u / nu
    w = v / nv
    w = w - np.vdot(w, uh) * uh
    # |w|^2 is the Gram determinant of the normalized pair
    if np.vdot(w, w) <= tol:
        raise DegeneratePlaneError(f"u and v are linearly dependent (Gram determinant {np.vdot(w, w):.3g})")
    return uh, w / np.linalg.norm(w)


def _curvature_parts(u, v, kb):
    uh, vh = orthonormalize_plane(u, v)
    for name, x in (("u", uh), ("v", vh)):
        viol = _horizontal_violation(x, kb.base_point)
        if viol > HORIZONTAL_TOL:
            raise InvalidArgumentError(f"{name} is not horizontal at Z: violation {viol:.3g}")
    bc = vertical_bracket(kb, kendall_coordinates(uh, kb), kendall_coordinates(vh, kb))
    nsq = bracket_norm_sq(kb, bc)
    return 1.0 + 0.75 * nsq, bc, nsq


def sectional_curvature(Z, u, v, kb: KendallBasis | None = None) -> float:
    """Sectional curvature of the plane spanned by horizontal ``u, v`` at ``Z``.

    ``u`` and ``v`` need not be orthonormal. Pass ``kb`` to reuse a basis
    already built at ``Z``.
    """
    Z = check_preshape(Z)
    if kb is None:
        kb = kendall_basis(Z)
    return _curvature_parts(u, v, kb)[0]


@dataclass(frozen=True)
class CurvatureReport:
    curvature: float
    k: int
    d: int
    lambdas: tuple
    gram_condition: float
    bracket: BracketCoefficients
    bracket_norm_sq: float
    plane: tuple

    def to_dict(self) -> dict:
        return {
            "curvature": self.curvature,
            "k": self.k,
            "d": self.d,
            "lambdas": list(self.lambdas),
            "gram_condition": self.gram_condition,
            "bracket": {"c12": self.bracket.c12, "c13": self.bracket.c13, "c23": self.bracket.c23},
            "bracket_norm_sq": self.bracket_norm_sq,
            "plane": list(self.plane),
        }


def compute_curvature(config, plane) -> CurvatureReport:
    """End-to-end curvature of a plane at the shape of ``config``.

    ``plane`` is a pair whose items are either Kendall basis labels / indices
    (``("dl2", "dl3")``) or coefficient vectors of length ``3k - 7`` in the
    Kendall basis.
    """
    Z = to_preshape(config)
    kb = kendall_basis(Z)
    if len(plane) != 2:
        raise InvalidArgumentError("plane must be a pair of directions")
    vecs, desc = [], []
    for item in plane:
        if isinstance(item, (str, int, np.integer)):
            idx = kb.index_of(item)
            vecs.append(kb.vectors[idx])
            desc.append(kb.labels[idx])
        else:
            vecs.append(kb.combine(item))
            desc.append("coords")
    K, bc, nsq = _curvature_parts(vecs[0], vecs[1], kb)
    return CurvatureReport(
        curvature=K,
        k=Z.shape[0] + 1,
        d=kb.d,
        lambdas=tuple(float(x) for x in kb.svd.lambdas),
        gram_condition=kb.gram_condition,
        bracket=bc,
        bracket_norm_sq=nsq,
        plane=tuple(desc),
    )
