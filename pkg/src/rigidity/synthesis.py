"""Duality engine over the equilibrium-stress space.

Searches the stress space for a stress whose energy form is positive definite
on a prescribed subspace, and returns either a certificate or a Farkas-style
witness: a PSD Gram matrix, supported on the unpinned vertices, whose edge
image lies in the column span of the rigidity matrix.

The search maximizes the smallest eigenvalue of the reduced energy form over
the unit ball of the stress span: a concave maximin handled by subgradient
ascent with Polyak steps, with a cutting-plane polish that re-optimizes the
weights of all eigenvector cuts collected along the way.  The same cut
weights assemble the dual Gram witness when the optimum is not positive.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import nnls

from .certificates import (
    COORDINATE,
    VELOCITY,
    FarkasWitness,
    PDStressCertificate,
    RefutationReport,
    SuperStabilityCertificate,
    TargetSubspace,
    Undecided,
)
from .core import CABLE, DEFAULT_TOL, Framework, FrameworkError, STRUT
from .linalg import (
    NONTRIVIAL_QUOTIENT,
    StressVector,
    equilibrium_residuals,
    find_conic_at_infinity,
    flex_space,
    is_infinitesimally_rigid,
    kernel_basis,
    numerical_rank,
    orthonormal_columns,
    stress_matrix_entries,
    stress_space_matrix,
)


@dataclass(frozen=True)
class SolverOptions:
    seed: int = 0
    iterations: int = 700
    polish_every: int = 25
    pd_threshold: float = 1e-7   # relative to the stress-matrix scale
    witness_tol: float = 1e-7    # relative column-span residual
    psd_tol: float = 1e-9
    max_atoms: int = 240
    refine_iters: int = 400


# ---------------------------------------------------------------------------
# Targets


def coordinate_target(f: Framework, pins) -> TargetSubspace:
    """C(1, G0): coordinate vectors of the unpinned vertices."""
    pins = frozenset(int(i) for i in pins)
    free = [i for i in range(f.n) if i not in pins]
    vecs = np.zeros((f.n, len(free)))
    for k, i in enumerate(free):
        vecs[i, k] = 1.0
    return TargetSubspace(COORDINATE, vecs, 1, pins, tag="pinned_coordinates")


def affine_complement_target(f: Framework, tol: float = DEFAULT_TOL) -> TargetSubspace:
    """Orthogonal complement in R^n of [span coordinates, all-ones].

    Every equilibrium stress matrix kills that span, so super stability is an
    eigenvalue question on this complement of dimension n - d - 1.
    """
    coords = f.configuration.span_coordinates()
    gen = np.hstack([coords, np.ones((f.n, 1))])
    u = orthonormal_columns(gen, tol)
    comp = kernel_basis(u.T, tol)
    return TargetSubspace(COORDINATE, comp, 1, frozenset(), tag="affine_complement")


def quotient_target(f: Framework, tol: float = DEFAULT_TOL) -> TargetSubspace:
    basis = flex_space(f, NONTRIVIAL_QUOTIENT, tol)
    return TargetSubspace(
        VELOCITY, basis.vectors, f.dimension, frozenset(), tag=NONTRIVIAL_QUOTIENT
    )


def reduced_energy_forms(f: Framework, stress_basis: np.ndarray, target: TargetSubspace):
    """One (t x t) matrix per stress basis vector: V^T E_omega V on the target."""
    n = f.n
    forms = []
    for k in range(stress_basis.shape[1]):
        omega = stress_matrix_entries(n, f.edges, stress_basis[:, k])
        if target.kind == COORDINATE:
            forms.append(target.vectors.T @ omega @ target.vectors)
        else:
            d = target.dimension
            t = target.dim
            b = np.zeros((t, t))
            cols = [target.vectors[:, a].reshape(n, d) for a in range(t)]
            for a in range(t):
                oa = omega @ cols[a]
                for bidx in range(a, t):
                    val = float(np.sum(oa * cols[bidx]))
                    b[a, bidx] = b[bidx, a] = val
            forms.append(b)
    return forms


def edge_image(gram: np.ndarray, edges) -> np.ndarray:
    """M(X)_e = X_ii - 2 X_ij + X_jj, the squared-velocity edge measurement."""
    return np.array([gram[i, i] - 2.0 * gram[i, j] + gram[j, j] for i, j in edges])


# ---------------------------------------------------------------------------
# The maximin solver


def _simplex_min_norm(g: np.ndarray) -> np.ndarray:
    """argmin ||G lam|| over the probability simplex, via an NNLS lift."""
    m = g.shape[1]
    if m == 1:
        return np.array([1.0])
    rho = 10.0 * (np.linalg.norm(g, axis=0).max() + 1.0)
    a = np.vstack([g, rho * np.ones((1, m))])
    b = np.zeros(g.shape[0] + 1)
    b[-1] = rho
    lam, _ = nnls(a, b)
    s = lam.sum()
    if s <= 0.0:
        lam = np.full(m, 1.0 / m)
    else:
        lam = lam / s
    return lam


@dataclass
class _SolveState:
    value: float               # best verified lambda_min over the unit ball
    coeff: np.ndarray | None   # stress coefficients achieving it
    upper: float               # best dual upper bound min ||h(X)||
    witness: np.ndarray | None  # reduced PSD matrix achieving the upper bound
    scale: float


def _solve_maximin(forms: list[np.ndarray], opts: SolverOptions) -> _SolveState:
    m = len(forms)
    t = forms[0].shape[0]
    scale = max(float(np.linalg.norm(b, 2)) for b in forms) + 1e-300

    def cut(u: np.ndarray) -> np.ndarray:
        return np.array([float(u @ b @ u) for b in forms])

    def min_eig(c: np.ndarray):
        bc = sum(ck * bk for ck, bk in zip(c, forms))
        vals, vecs = np.linalg.eigh(bc)
        return float(vals[0]), vecs[:, 0]

    rng = np.random.default_rng(opts.seed)
    atoms_u: list[np.ndarray] = []
    atoms_g: list[np.ndarray] = []

    def add_atom(u: np.ndarray):
        if len(atoms_u) >= opts.max_atoms:
            return
        g = cut(u)
        atoms_u.append(u)
        atoms_g.append(g)

    # First cut from the normalized-trace direction.
    traces = np.array([float(np.trace(b)) for b in forms]) / t
    c = traces / np.linalg.norm(traces) if np.linalg.norm(traces) > 0 else None
    if c is None:
        c = np.zeros(m)
        c[0] = 1.0
    best_val, best_c = -np.inf, None
    upper, wit = np.inf, None

    for it in range(opts.iterations):
        val, u = min_eig(c)
        if val > best_val:
            best_val, best_c = val, c.copy()
        add_atom(u)
        if it % 7 == 3:  # occasional random cut keeps the atom set diverse
            r = rng.standard_normal(t)
            add_atom(r / np.linalg.norm(r))

        if it % opts.polish_every == 0 or it == opts.iterations - 1:
            g = np.array(atoms_g).T  # (m, k)
            lam = _simplex_min_norm(g)
            h = g @ lam
            hn = float(np.linalg.norm(h))
            if hn < upper:
                upper = hn
                wit = lam.copy()
            if hn > 1e-14 * scale:
                cand = h / hn
                cval, cu = min_eig(cand)
                if cval > best_val:
                    best_val, best_c = cval, cand
                add_atom(cu)
            if upper <= 1e-13 * scale and best_val <= 0.0:
                break
            if best_val > 0.0 and upper - best_val <= 1e-12 * scale:
                break

        # Polyak step toward the dual upper bound.
        g_here = cut(u)
        gn2 = float(g_here @ g_here)
        if gn2 <= 1e-300:
            continue
        target_gap = max(upper - val, 0.05 * abs(val) + 1e-13 * scale)
        if not np.isfinite(target_gap):
            target_gap = scale
        step = min(target_gap / gn2, 10.0 / np.sqrt(gn2))
        c = c + step * g_here
        norm_c = np.linalg.norm(c)
        if norm_c > 1.0:
            c = c / norm_c

    witness_mat = None
    if wit is not None:
        witness_mat = np.zeros((t, t))
        for w, u in zip(wit, atoms_u):
            if w > 0.0:
                witness_mat += w * np.outer(u, u)
    return _SolveState(best_val, best_c, upper, witness_mat, scale)


def _refine_witness(
    x0: np.ndarray, forms: list[np.ndarray], iters: int
) -> np.ndarray:
    """Dykstra projections between the PSD cone and {<B_k, X> = 0, tr X = 1}."""
    t = x0.shape[0]
    rows = [b.reshape(-1) for b in forms] + [np.eye(t).reshape(-1)]
    a = np.array(rows)
    b = np.zeros(len(rows))
    b[-1] = 1.0
    aat_inv = np.linalg.pinv(a @ a.T)

    def proj_affine(x: np.ndarray) -> np.ndarray:
        v = x.reshape(-1)
        corr = a.T @ (aat_inv @ (a @ v - b))
        y = (v - corr).reshape(t, t)
        return 0.5 * (y + y.T)

    def proj_psd(x: np.ndarray) -> np.ndarray:
        vals, vecs = np.linalg.eigh(0.5 * (x + x.T))
        vals = np.clip(vals, 0.0, None)
        return (vecs * vals) @ vecs.T

    x = x0.copy()
    p = np.zeros_like(x)
    q = np.zeros_like(x)
    for _ in range(iters):
        y = proj_psd(x + p)
        p = x + p - y
        x_new = proj_affine(y + q)
        q = y + q - x_new
        if np.linalg.norm(x_new - x) <= 1e-15 * (np.linalg.norm(x) + 1.0):
            x = x_new
            break
        x = x_new
    return proj_psd(x)


# ---------------------------------------------------------------------------
# Witness assembly


def _aggregate_gram(f: Framework, target: TargetSubspace, x_red: np.ndarray) -> np.ndarray:
    """Reduced PSD matrix -> n x n Gram of a velocity assignment."""
    n = f.n
    full = target.vectors @ x_red @ target.vectors.T
    if target.kind == COORDINATE:
        return 0.5 * (full + full.T)
    d = target.dimension
    gram = np.zeros((n, n))
    for a in range(d):
        sel = np.arange(a, n * d, d)
        gram += full[np.ix_(sel, sel)]
    return 0.5 * (gram + gram.T)


def _build_witness(
    f: Framework,
    target: TargetSubspace,
    x_red: np.ndarray,
    stress_basis: np.ndarray,
    opts: SolverOptions,
    tol: float,
) -> FarkasWitness | None:
    gram = _aggregate_gram(f, target, x_red)
    gnorm = float(np.linalg.norm(gram, 2))
    if gnorm <= 0.0:
        return None
    gram = gram / gnorm
    vals, vecs = np.linalg.eigh(gram)
    psd_defect = max(0.0, -float(vals.min()))
    vals = np.clip(vals, 0.0, None)
    gram = (vecs * vals) @ vecs.T
    keep = vals > max(opts.psd_tol, 1e-12)
    factor = vecs[:, keep] * np.sqrt(vals[keep])
    # Zero out pinned rows exactly; the target construction already does
    # this up to round-off.
    if target.pin_set:
        pins = sorted(target.pin_set)
        gram[pins, :] = 0.0
        gram[:, pins] = 0.0
        factor[pins, :] = 0.0
    image = edge_image(gram, f.edges)
    inorm = float(np.linalg.norm(image))
    if inorm <= 1e-14:
        residual = 0.0
    elif stress_basis.shape[1] == 0:
        residual = 0.0
    else:
        residual = float(np.linalg.norm(stress_basis.T @ image)) / inorm
    if residual > opts.witness_tol:
        return None
    return FarkasWitness(gram, image, factor, residual, psd_defect, target.pin_set)


# ---------------------------------------------------------------------------
# Public entry points


def synthesize_pd_stress(
    f: Framework,
    target: TargetSubspace,
    opts: SolverOptions = SolverOptions(),
    tol: float = DEFAULT_TOL,
    seed_stress: np.ndarray | None = None,
):
    """Either a PDStressCertificate, a FarkasWitness, or Undecided.

    Certificate: an equilibrium stress omega with V^T E_omega V > t I on the
    target, t above the PD threshold.  Witness: a nonzero PSD Gram matrix
    supported off the pins whose edge image lies in col-span R(p); it proves
    no certificate exists.
    """
    if target.dim == 0:
        zeros = np.zeros(f.graph.edge_count)
        return PDStressCertificate(zeros, target, 0.0, 0.0, vacuous=True)

    s_basis = stress_space_matrix(f, tol)
    if s_basis.shape[1] == 0:
        x_red = np.zeros((target.dim, target.dim))
        x_red[0, 0] = 1.0
        wit = _build_witness(f, target, x_red, s_basis, opts, tol)
        if wit is not None:
            return wit
        return Undecided("empty stress space but witness assembly failed", 0.0, np.inf)

    forms = reduced_energy_forms(f, s_basis, target)

    # A direction killed by every stress is an exact rank-one witness.
    stacked = np.vstack(forms)
    common = kernel_basis(stacked, tol)
    if common.shape[1] > 0:
        v = common[:, 0]
        wit = _build_witness(
            f, target, np.outer(v, v), s_basis, opts, tol
        )
        if wit is not None:
            return wit

    state = _solve_maximin(forms, opts)
    if seed_stress is not None:
        coeff = s_basis.T @ seed_stress
        nc = np.linalg.norm(coeff)
        if nc > 0:
            coeff = coeff / nc
            bc = sum(ck * bk for ck, bk in zip(coeff, forms))
            val = float(np.linalg.eigvalsh(bc)[0])
            if val > state.value:
                state.value, state.coeff = val, coeff

    if state.coeff is not None:
        omega = s_basis @ state.coeff
        omega_mat = stress_matrix_entries(f.n, f.edges, omega)
        omega_scale = float(np.linalg.norm(omega_mat, 2)) + 1e-300
        if state.value > opts.pd_threshold * omega_scale:
            sv = StressVector(omega, f.edges)
            resid = float(equilibrium_residuals(f, sv).max())
            return PDStressCertificate(omega, target, state.value, resid)

    if state.witness is not None:
        x = _refine_witness(state.witness, forms, opts.refine_iters)
        if float(np.trace(x)) > 1e-12:
            wit = _build_witness(f, target, x, s_basis, opts, tol)
            if wit is not None:
                return wit

    return Undecided(
        "maximin value inside the undecided band or witness residual too large",
        state.value,
        state.upper / state.scale if np.isfinite(state.upper) else np.inf,
    )


def prestress_stability_certificate(
    f: Framework, opts: SolverOptions = SolverOptions(), tol: float = DEFAULT_TOL
):
    """Prestress stability in R^d: PD stress on the nontrivial flex quotient."""
    target = quotient_target(f, tol)
    result = synthesize_pd_stress(f, target, opts, tol)
    if isinstance(result, PDStressCertificate):
        return result
    if isinstance(result, FarkasWitness):
        reason = "a mixture of nontrivial flexes has zero energy against every stress"
        if stress_space_matrix(f, tol).shape[1] == 0:
            reason = "mechanism not blockable (stress space is {0})"
        return RefutationReport(reason, result)
    return RefutationReport("undecided", None, {"diagnostics": result.reason})


def super_stability_certificate(
    f: Framework, opts: SolverOptions = SolverOptions(), tol: float = DEFAULT_TOL
):
    """PSD stress matrix of rank n-d-1 plus no conic at infinity.

    A success is also a universal-prestress-stability certificate.
    """
    target = affine_complement_target(f, tol)
    conic = find_conic_at_infinity(f, tol)
    result = synthesize_pd_stress(f, target, opts, tol)
    d = f.configuration.span_dim
    want_rank = f.n - d - 1
    if isinstance(result, PDStressCertificate):
        if conic is not None:
            return RefutationReport(
                "edge directions lie on a conic at infinity",
                None,
                {"conic": conic.q.tolist()},
            )
        omega_mat = stress_matrix_entries(f.n, f.edges, result.stress)
        eigs = np.linalg.eigvalsh(omega_mat)
        scale = float(np.abs(eigs).max()) + 1e-300
        if result.vacuous:
            eigs = np.zeros(f.n)
            rank = 0
        else:
            if eigs.min() < -1e-9 * scale:
                return RefutationReport(
                    "reduced form PD but full stress matrix not PSD", None, {}
                )
            rank = int(np.sum(eigs > 1e-9 * scale))
        if rank != want_rank:
            return RefutationReport(
                f"stress matrix rank {rank} != n-d-1 = {want_rank}", None, {}
            )
        return SuperStabilityCertificate(
            result.stress, eigs, rank, result.lambda_min, result.equilibrium_residual
        )
    details: dict = {}
    reasons = []
    if isinstance(result, FarkasWitness):
        reasons.append("no PSD stress of maximal rank (Gram witness found)")
        details["witness_residual"] = result.colspan_residual
    elif isinstance(result, Undecided):
        reasons.append(f"solver undecided: {result.reason}")
    if conic is not None:
        reasons.append("edge directions lie on a conic at infinity")
        details["conic"] = conic.q.tolist()
    witness = result if isinstance(result, FarkasWitness) else None
    return RefutationReport("; ".join(reasons), witness, details)


def universal_second_order_to_prestress(
    f: Framework,
    pins,
    opts: SolverOptions = SolverOptions(),
    tol: float = DEFAULT_TOL,
):
    """Pin d+1 spanning vertices, search for a stress PD on C(1, G0), and on
    success verify the stress matrix is PSD of rank n-d-1 with no conic."""
    pins = frozenset(int(i) for i in pins)
    sub = f.points[sorted(pins)]
    centered = sub - sub.mean(axis=0)
    pin_span = numerical_rank(centered, tol)
    if pin_span < f.configuration.span_dim:
        raise FrameworkError("pin_span", "pin set does not affinely span the configuration")
    target = coordinate_target(f, pins)
    result = synthesize_pd_stress(f, target, opts, tol)
    d = f.configuration.span_dim
    want_rank = f.n - d - 1
    report: dict = {"pins": sorted(pins), "verdict": None}
    if isinstance(result, PDStressCertificate):
        omega_mat = stress_matrix_entries(f.n, f.edges, result.stress)
        eigs = np.linalg.eigvalsh(omega_mat)
        scale = float(np.abs(eigs).max()) + 1e-300 if not result.vacuous else 1.0
        psd_ok = result.vacuous or eigs.min() >= -1e-9 * scale
        rank = 0 if result.vacuous else int(np.sum(eigs > 1e-9 * scale))
        conic = find_conic_at_infinity(f, tol)
        ok = psd_ok and rank == want_rank and conic is None
        report.update(
            verdict="super stable / universally prestress stable" if ok else "inconsistent",
            psd=bool(psd_ok),
            rank=rank,
            expected_rank=want_rank,
            conic=conic is None,
            certificate=result,
        )
        return report
    report.update(verdict="refuted", witness=result)
    return report


def _strict_sign_stress(
    f: Framework,
    lower: np.ndarray,
    upper: np.ndarray,
    tol: float = DEFAULT_TOL,
):
    """Maximize the margin m with lower*m <= omega_e (sign-constrained entries)
    over the stress space, ||omega||_inf <= 1.  Returns (omega, margin)."""
    from scipy.optimize import linprog

    s = stress_space_matrix(f, tol)
    m_s = s.shape[1]
    if m_s == 0:
        return None, 0.0
    e = s.shape[0]
    # Variables: (c_1..c_m, margin).  Maximize margin.
    cvec = np.zeros(m_s + 1)
    cvec[-1] = -1.0
    a_ub = []
    b_ub = []
    for k in range(e):
        if lower[k]:   # need omega_k >= margin
            row = np.zeros(m_s + 1)
            row[:m_s] = -s[k]
            row[-1] = 1.0
            a_ub.append(row)
            b_ub.append(0.0)
        if upper[k]:   # need omega_k <= -margin
            row = np.zeros(m_s + 1)
            row[:m_s] = s[k]
            row[-1] = 1.0
            a_ub.append(row)
            b_ub.append(0.0)
        for sign in (1.0, -1.0):  # ||omega||_inf <= 1
            row = np.zeros(m_s + 1)
            row[:m_s] = sign * s[k]
            a_ub.append(row)
            b_ub.append(1.0)
    bounds = [(None, None)] * m_s + [(0.0, None)]
    res = linprog(cvec, A_ub=np.array(a_ub), b_ub=np.array(b_ub), bounds=bounds, method="highs")
    if not res.success:
        return None, 0.0
    omega = s @ res.x[:m_s]
    return omega, float(res.x[-1])


def roth_whiteley_check(
    f: Framework, opts: SolverOptions = SolverOptions(), tol: float = DEFAULT_TOL
) -> tuple[bool, dict]:
    """First-order rigidity of a tensegrity: the underlying bar framework is
    infinitesimally rigid and some equilibrium stress is strictly positive on
    the cables and strictly negative on the struts."""
    if f.members is None:
        raise FrameworkError("schema", "no members tagged cable/strut")
    rigid, rank_report = is_infinitesimally_rigid(f, tol)
    lower = np.array([m == CABLE for m in f.members])
    upper = np.array([m == STRUT for m in f.members])
    omega, margin = _strict_sign_stress(f, lower, upper, tol)
    strict = False
    if omega is not None and np.linalg.norm(omega) > 0:
        strict = margin >= 1e-6 * float(np.abs(omega).max())
    ok = bool(rigid and strict)
    report = {
        "bar_rigid": bool(rigid),
        "rank": rank_report.rank,
        "sign_margin": margin,
        "stress": None if omega is None else omega,
        "proper_stress_found": strict,
    }
    return ok, report


def spider_face_prestress(
    f: Framework,
    spider_edges,
    rigid_vertices,
    opts: SolverOptions = SolverOptions(),
    tol: float = DEFAULT_TOL,
):
    """Prestress stability from a spider tensegrity on a first-order rigid core.

    spider_edges: edges carrying the spider stress; rigid_vertices: vertex set
    whose induced framework must be infinitesimally rigid in its span.
    """
    rigid_vertices = frozenset(int(i) for i in rigid_vertices)
    spider_set = {(min(i, j), max(i, j)) for i, j in spider_edges}
    idx = f.graph.edge_index()
    for e in spider_set:
        if e not in idx:
            raise FrameworkError("schema", f"spider edge {e} is not an edge of the framework")

    # Induced subframework on the rigid vertex set, in its own span.
    verts = sorted(rigid_vertices)
    remap = {v: k for k, v in enumerate(verts)}
    sub_edges = [
        (remap[i], remap[j]) for i, j in f.edges if i in rigid_vertices and j in rigid_vertices
    ]
    from .core import Configuration, Graph

    sub_pts = f.points[verts]
    sub_conf = Configuration(f.dimension, sub_pts)
    span = sub_conf.span_dim
    if span < f.dimension:
        frame, centroid = sub_conf.span_frame()
        sub_conf = Configuration(span, (sub_pts - centroid) @ frame)
    sub = Framework(Graph(len(verts), tuple(sub_edges)), sub_conf)
    rigid, _ = is_infinitesimally_rigid(sub, tol)
    if not rigid:
        raise FrameworkError("subgraph_not_rigid", "induced framework is not infinitesimally rigid")

    # Spider stress: equilibrium stress of the spider subframework, positive
    # on every spider edge with an endpoint outside the rigid set.
    spider_idx = sorted(idx[e] for e in spider_set)
    sub_sp = Framework(
        Graph(f.n, tuple(f.edges[k] for k in spider_idx)), f.configuration
    )
    need_pos = np.array(
        [
            not (i in rigid_vertices and j in rigid_vertices)
            for i, j in sub_sp.edges
        ]
    )
    omega_sp, margin = _strict_sign_stress(sub_sp, need_pos, np.zeros(len(sub_sp.edges), dtype=bool), tol)
    if omega_sp is None or margin <= 1e-9:
        raise FrameworkError("spider_stress", "no positive spider stress on the given edges")

    seed = np.zeros(f.graph.edge_count)
    sp_index = {e: k for k, e in enumerate(sub_sp.edges)}
    for e, k in sp_index.items():
        seed[idx[e]] = omega_sp[k]

    target = quotient_target(f, tol)
    result = synthesize_pd_stress(f, target, opts, tol, seed_stress=seed)
    if isinstance(result, PDStressCertificate):
        return result
    return RefutationReport("synthesis failed despite spider stress",
                            result if isinstance(result, FarkasWitness) else None)
