"""Rigidity matrix and form, flex/stress linear algebra, conic detection.

Velocity assignments are (n, d) arrays or flattened (n*d,) vectors in
vertex-major order; all rank decisions go through one SVD helper with a
relative threshold.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import DEFAULT_TOL, Configuration, Framework, FrameworkError

ALL_FLEXES = "all_flexes"
PINNED_FLEXES = "pinned_flexes"
NONTRIVIAL_QUOTIENT = "nontrivial_quotient"

TRIVIAL = "trivial"
AFFINE_NONTRIVIAL = "affine_nontrivial"
NON_AFFINE = "non_affine"


def numerical_rank(a: np.ndarray, tol: float = DEFAULT_TOL) -> int:
    if a.size == 0:
        return 0
    s = np.linalg.svd(a, compute_uv=False)
    if s[0] == 0.0:
        return 0
    return int(np.sum(s > tol * s[0]))


def kernel_basis(a: np.ndarray, tol: float = DEFAULT_TOL) -> np.ndarray:
    """Orthonormal basis of the null space, shape (cols, nullity)."""
    if a.size == 0 or a.shape[0] == 0:
        return np.eye(a.shape[1] if a.ndim == 2 else 0)
    _, s, vt = np.linalg.svd(a, full_matrices=True)
    r = 0 if s.size == 0 or s[0] == 0.0 else int(np.sum(s > tol * s[0]))
    return vt[r:].T


def orthonormal_columns(a: np.ndarray, tol: float = DEFAULT_TOL) -> np.ndarray:
    """Orthonormal basis of the column span, shape (rows, rank)."""
    if a.size == 0:
        return np.zeros((a.shape[0], 0))
    u, s, _ = np.linalg.svd(a, full_matrices=False)
    if s.size == 0 or s[0] == 0.0:
        return np.zeros((a.shape[0], 0))
    r = int(np.sum(s > tol * s[0]))
    return u[:, :r]


def _as_velocity(f_or_n, d: int, q: np.ndarray) -> np.ndarray:
    q = np.asarray(q, dtype=float)
    n = f_or_n if isinstance(f_or_n, int) else f_or_n.n
    if q.shape == (n, d):
        return q
    if q.shape == (n * d,):
        return q.reshape(n, d)
    raise FrameworkError("dimension_mismatch", f"velocity shape {q.shape} != ({n},{d})")


@dataclass(frozen=True)
class RigidityMatrix:
    """e x (n*d) matrix; row per canonical edge, column blocks per vertex."""

    entries: np.ndarray
    edges: tuple[tuple[int, int], ...]
    dimension: int
    tol: float = DEFAULT_TOL

    @property
    def rank(self) -> int:
        return numerical_rank(self.entries, self.tol)

    def apply(self, q: np.ndarray) -> np.ndarray:
        return self.entries @ np.asarray(q, dtype=float).reshape(-1)


def rigidity_matrix(f: Framework, tol: float = DEFAULT_TOL) -> RigidityMatrix:
    n, d = f.n, f.dimension
    r = np.zeros((f.graph.edge_count, n * d))
    p = f.points
    for k, (i, j) in enumerate(f.edges):
        diff = p[i] - p[j]
        r[k, i * d : (i + 1) * d] = diff
        r[k, j * d : (j + 1) * d] = -diff
    return RigidityMatrix(r, f.edges, d, tol)


def rigidity_form(p: Configuration | np.ndarray, q: np.ndarray, edges) -> np.ndarray:
    """Per-edge values (p_i - p_j) . (q_i - q_j); symmetric in (p, q)."""
    pp = p.points if isinstance(p, Configuration) else np.asarray(p, dtype=float)
    qq = np.asarray(q, dtype=float)
    if qq.ndim == 1:
        qq = qq.reshape(pp.shape)
    if pp.shape != qq.shape:
        raise FrameworkError("dimension_mismatch", f"{pp.shape} vs {qq.shape}")
    out = np.empty(len(edges))
    for k, (i, j) in enumerate(edges):
        out[k] = float(np.dot(pp[i] - pp[j], qq[i] - qq[j]))
    return out


@dataclass(frozen=True)
class FlexBasis:
    """Orthonormal basis of a space of infinitesimal flexes.

    vectors: (n*d, m) with orthonormal columns, vertex-major layout.
    """

    vectors: np.ndarray
    space_tag: str
    dimension: int
    pin_set: frozenset[int] = frozenset()

    @property
    def dim(self) -> int:
        return self.vectors.shape[1]

    def column(self, k: int, n: int) -> np.ndarray:
        return self.vectors[:, k].reshape(n, self.dimension)


def trivial_flex_basis(c: Configuration, tol: float = DEFAULT_TOL) -> FlexBasis:
    """Orthonormal basis of {A p + b} at this configuration.

    The dimension is the rank of the generator set, e.g. d(d+1)/2 for a
    full-span configuration, 5 for two distinct points in R^3.
    """
    n, d = c.count, c.dimension
    gens = []
    for a in range(d):
        g = np.zeros((n, d))
        g[:, a] = 1.0
        gens.append(g.reshape(-1))
    for a in range(d):
        for b in range(a + 1, d):
            g = np.zeros((n, d))
            g[:, a] = -c.points[:, b]
            g[:, b] = c.points[:, a]
            gens.append(g.reshape(-1))
    basis = orthonormal_columns(np.array(gens).T, tol)
    return FlexBasis(basis, "trivial", d)


def flex_space(f: Framework, mode: str = ALL_FLEXES, tol: float = DEFAULT_TOL) -> FlexBasis:
    """Orthonormal kernel basis of R(p), optionally pinned or modulo trivial.

    pinned_flexes: intersect with C(d, G0) (coordinates of pinned vertices
    forced to zero).  nontrivial_quotient: intersect with the orthogonal
    complement of the trivial flex space.
    """
    n, d = f.n, f.dimension
    rm = rigidity_matrix(f, tol)
    if mode == PINNED_FLEXES:
        free = [i * d + a for i in range(n) if i not in f.pins for a in range(d)]
        if not free:
            return FlexBasis(np.zeros((n * d, 0)), mode, d, f.pins)
        sub = kernel_basis(rm.entries[:, free], tol)
        vecs = np.zeros((n * d, sub.shape[1]))
        vecs[free, :] = sub
        return FlexBasis(vecs, mode, d, f.pins)

    ker = kernel_basis(rm.entries, tol)
    if mode == ALL_FLEXES:
        return FlexBasis(ker, mode, d)
    if mode == NONTRIVIAL_QUOTIENT:
        triv = trivial_flex_basis(f.configuration, tol)
        if ker.shape[1] == 0:
            return FlexBasis(ker, mode, d)
        coeff = kernel_basis(triv.vectors.T @ ker, tol)
        vecs = orthonormal_columns(ker @ coeff, tol)
        return FlexBasis(vecs, mode, d)
    raise FrameworkError("schema", f"unknown flex-space mode {mode!r}")


@dataclass(frozen=True)
class RankReport:
    rank: int
    flex_dim: int
    trivial_dim: int
    nontrivial_dim: int
    edge_count: int
    rigid: bool


def is_infinitesimally_rigid(f: Framework, tol: float = DEFAULT_TOL) -> tuple[bool, RankReport]:
    rm = rigidity_matrix(f, tol)
    rank = rm.rank
    flex_dim = f.n * f.dimension - rank
    triv = trivial_flex_basis(f.configuration, tol).dim
    quot = flex_space(f, NONTRIVIAL_QUOTIENT, tol).dim
    rigid = flex_dim == triv
    return rigid, RankReport(rank, flex_dim, triv, quot, f.graph.edge_count, rigid)


@dataclass(frozen=True)
class StressVector:
    """Per-edge scalars omega_ij in canonical edge order."""

    values: np.ndarray
    edges: tuple[tuple[int, int], ...]

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.shape != (len(self.edges),):
            raise FrameworkError("dimension_mismatch", "stress length != edge count")
        object.__setattr__(self, "values", v)

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.values))


def equilibrium_residuals(f: Framework, w: StressVector) -> np.ndarray:
    """Per-vertex norm of sum_j omega_ij (p_i - p_j)."""
    n, d = f.n, f.dimension
    acc = np.zeros((n, d))
    p = f.points
    for omega, (i, j) in zip(w.values, f.edges):
        diff = omega * (p[i] - p[j])
        acc[i] += diff
        acc[j] -= diff
    return np.linalg.norm(acc, axis=1)


def stress_space(f: Framework, tol: float = DEFAULT_TOL) -> list[StressVector]:
    """Orthonormal basis of the cokernel (left null space) of R(p)."""
    rm = rigidity_matrix(f, tol)
    basis = kernel_basis(rm.entries.T, tol)
    return [StressVector(basis[:, k], f.edges) for k in range(basis.shape[1])]


def stress_space_matrix(f: Framework, tol: float = DEFAULT_TOL) -> np.ndarray:
    """Stress basis as an (e, m) array with orthonormal columns."""
    rm = rigidity_matrix(f, tol)
    return kernel_basis(rm.entries.T, tol)


@dataclass(frozen=True)
class StressMatrix:
    """Symmetric n x n matrix with off-diagonal -omega_ij and zero row sums."""

    entries: np.ndarray

    @property
    def n(self) -> int:
        return self.entries.shape[0]

    def rank(self, tol: float = DEFAULT_TOL) -> int:
        return numerical_rank(self.entries, tol)

    def eigenvalues(self) -> np.ndarray:
        return np.linalg.eigvalsh(self.entries)


def stress_matrix_entries(n: int, edges, values: np.ndarray) -> np.ndarray:
    omega = np.zeros((n, n))
    for w, (i, j) in zip(values, edges):
        omega[i, j] -= w
        omega[j, i] -= w
        omega[i, i] += w
        omega[j, j] += w
    return omega


def stress_matrix(f: Framework, w: StressVector) -> StressMatrix:
    if len(w.values) != f.graph.edge_count:
        raise FrameworkError("dimension_mismatch", "stress length != edge count")
    return StressMatrix(stress_matrix_entries(f.n, f.edges, w.values))


def stress_energy(w: StressVector, q: np.ndarray, edges=None) -> float:
    """E_omega(q) = sum_{i<j} omega_ij |q_i - q_j|^2."""
    edges = w.edges if edges is None else edges
    q = np.asarray(q, dtype=float)
    if q.ndim == 1:
        q = q.reshape(len(q), 1)
    total = 0.0
    for omega, (i, j) in zip(w.values, edges):
        diff = q[i] - q[j]
        total += omega * float(np.dot(diff, diff))
    return total


@dataclass(frozen=True)
class ConicWitness:
    """Nonzero symmetric Q (in span coordinates) annihilating all edge directions."""

    q: np.ndarray
    violated_pair: tuple[int, int] | None
    frame: np.ndarray  # (d, k) span frame the matrix lives in


def _sym_basis(k: int) -> list[np.ndarray]:
    out = []
    for a in range(k):
        m = np.zeros((k, k))
        m[a, a] = 1.0
        out.append(m)
    for a in range(k):
        for b in range(a + 1, k):
            m = np.zeros((k, k))
            m[a, b] = m[b, a] = 1.0 / np.sqrt(2.0)
            out.append(m)
    return out


def find_conic_at_infinity(f: Framework, tol: float = DEFAULT_TOL) -> ConicWitness | None:
    """Solve (p_i-p_j)^T Q (p_i-p_j) = 0 over symmetric Q in span coordinates.

    Returns a normalized kernel element with a violated non-edge pair when one
    exists; None when the only solution is Q = 0.
    """
    coords = f.configuration.span_coordinates()
    k = coords.shape[1]
    if k == 0:
        return None
    basis = _sym_basis(k)
    rows = []
    for (i, j) in f.edges:
        u = coords[i] - coords[j]
        rows.append([float(u @ m @ u) for m in basis])
    system = np.array(rows)
    null = kernel_basis(system, tol)
    if null.shape[1] == 0:
        return None
    q = sum(c * m for c, m in zip(null[:, 0], basis))
    q = q / np.linalg.norm(q)
    violated = None
    worst = 0.0
    scale = float(np.max(np.abs(coords))) ** 2 + 1.0
    for (i, j) in f.graph.non_edges():
        u = coords[i] - coords[j]
        val = abs(float(u @ q @ u))
        if val > worst:
            worst, violated = val, (i, j)
    if violated is not None and worst <= tol * scale:
        violated = None
    frame, _ = f.configuration.span_frame()
    return ConicWitness(q, violated, frame)


@dataclass(frozen=True)
class FlexClassification:
    label: str  # trivial | affine_nontrivial | non_affine
    effective: bool
    trivial_part: np.ndarray
    remainder_norm: float
    affine_residual: float


def classify_flex(
    f: Framework, v: np.ndarray, tol: float = DEFAULT_TOL, effective_tol: float = 1e-9
) -> FlexClassification:
    """Label a flex trivial / affine_nontrivial / non_affine, plus effectiveness.

    Effectiveness tests every non-edge pair for (p_k-p_l).(v_k-v_l) != 0; the
    trivial component is removed by orthogonal projection onto the trivial
    flex space.
    """
    n, d = f.n, f.dimension
    vv = _as_velocity(f, d, v)
    flat = vv.reshape(-1)
    rm = rigidity_matrix(f, tol)
    scale_r = np.linalg.norm(rm.entries) * np.linalg.norm(flat) + 1e-300
    if np.linalg.norm(rm.apply(flat)) > 1e-7 * scale_r:
        raise FrameworkError("schema", "input is not a first-order flex")

    triv = trivial_flex_basis(f.configuration, tol)
    coeff = triv.vectors.T @ flat
    trivial_part = triv.vectors @ coeff
    remainder = flat - trivial_part
    vnorm = np.linalg.norm(flat) + 1e-300
    rem_norm = float(np.linalg.norm(remainder))

    # Affine fit v_i = M s_i + t over span coordinates (well-posed there).
    coords = f.configuration.span_coordinates()
    design = np.hstack([coords, np.ones((n, 1))])
    sol, *_ = np.linalg.lstsq(design, vv, rcond=None)
    aff_res = float(np.linalg.norm(design @ sol - vv)) / vnorm

    pscale = float(np.max(np.abs(f.points))) + 1.0
    effective = False
    for (i, j) in f.graph.non_edges():
        val = abs(float(np.dot(f.points[i] - f.points[j], vv[i] - vv[j])))
        if val > effective_tol * pscale * pscale * (np.linalg.norm(flat) + 1e-300):
            effective = True
            break

    if rem_norm <= 1e-8 * vnorm:
        label = TRIVIAL
    elif aff_res <= 1e-8:
        label = AFFINE_NONTRIVIAL
    else:
        label = NON_AFFINE
    return FlexClassification(label, effective, trivial_part, rem_norm, aff_res)
