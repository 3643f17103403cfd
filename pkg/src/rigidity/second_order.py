"""Second-order flex machinery.

Per-flex extension and blocking are exact linear algebra; the global
falsifier is a heuristic search that can refute second-order rigidity but
never certify it.  The pinned universal second-order decision goes through
the stress-synthesis duality and unpacks a failed search into an explicit
(p', p'') pair.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import least_squares

from .certificates import FarkasWitness, PDStressCertificate, SecondOrderFlex, Undecided
from .core import DEFAULT_TOL, Framework, FrameworkError
from .linalg import (
    NONTRIVIAL_QUOTIENT,
    StressVector,
    classify_flex,
    flex_space,
    numerical_rank,
    rigidity_form,
    rigidity_matrix,
    stress_space_matrix,
)
from .synthesis import SolverOptions, coordinate_target, synthesize_pd_stress

EXTENSION_TOL = 1e-8
FLEX_TOL = 1e-9


def _flex_residual(f: Framework, p1: np.ndarray) -> float:
    r = rigidity_form(f.configuration.points, p1, f.edges)
    scale = (
        float(np.max(np.abs(f.points)) + 1.0)
        * (np.linalg.norm(p1) + 1e-300)
    )
    return float(np.linalg.norm(r)) / scale


def _check_flex(f: Framework, p1: np.ndarray) -> np.ndarray:
    p1 = np.asarray(p1, dtype=float)
    if p1.ndim == 1:
        p1 = p1.reshape(f.n, -1)
    if _flex_residual(f, p1) > 1e-7:
        raise FrameworkError("schema", "p1 is not a first-order flex")
    return p1


def extend_to_second_order(
    f: Framework, p1: np.ndarray, tol: float = EXTENSION_TOL
) -> SecondOrderFlex | None:
    """Least-squares solve of R(p) p'' = -R(p', p').

    Returns the flex when the residual is small enough, else None.
    Solvability is equivalent to w^T R(p',p') = 0 for every equilibrium
    stress w (the cokernel test), which callers can cross-check via
    is_blocked.
    """
    p1 = _check_flex(f, p1)
    d2 = p1.shape[1]
    rhs = -rigidity_form(p1, p1, f.edges)
    scale = float(np.linalg.norm(rhs)) + 1e-300
    # R(p) acts on the span coordinates only; solve there and embed.
    rm = rigidity_matrix(f)
    n, d = f.n, f.dimension
    sol, *_ = np.linalg.lstsq(rm.entries, rhs, rcond=None)
    resid = float(np.linalg.norm(rm.entries @ sol - rhs))
    if resid > tol * scale:
        return None
    p2 = np.zeros((n, d2))
    p2[:, :d] = sol.reshape(n, d)
    r1 = _flex_residual(f, p1)
    r2 = resid / scale
    return SecondOrderFlex(p1, p2, r1, r2)


def is_blocked(
    f: Framework, p1: np.ndarray, tol: float = DEFAULT_TOL
) -> tuple[bool | None, StressVector | None]:
    """True iff some equilibrium stress has w^T R(p',p') > 0.

    Returns (verdict, blocking stress); verdict is None for trivial flexes,
    where the energy vanishes for every stress and the question does not
    apply.
    """
    p1 = _check_flex(f, p1)
    if p1.shape[1] == f.dimension:
        label = classify_flex(f, p1, tol).label
        if label == "trivial":
            return None, None
    s = stress_space_matrix(f, tol)
    if s.shape[1] == 0:
        return False, None
    measure = rigidity_form(p1, p1, f.edges)
    coeff = s.T @ measure
    nc = float(np.linalg.norm(coeff))
    scale = float(np.linalg.norm(measure)) + 1e-300
    if nc <= 10 * FLEX_TOL * scale:
        return False, None
    w = s @ (coeff / nc)
    return True, StressVector(w, f.edges)


def second_order_falsify(
    f: Framework,
    dim: int | None = None,
    budget: int = 50,
    seed: int = 0,
    tol: float = EXTENSION_TOL,
) -> SecondOrderFlex | None:
    """Search the nontrivial flex sphere for an extendable first-order flex.

    Levenberg-Marquardt on the stress-space component of R(p',p'); a verified
    witness refutes second-order rigidity, a miss is inconclusive.
    """
    dim = f.dimension if dim is None else int(dim)
    g = f
    if dim != f.dimension:
        from .core import Configuration, Graph

        pts = np.zeros((f.n, dim))
        pts[:, : f.dimension] = f.points
        g = Framework(Graph(f.n, f.edges), Configuration(dim, pts), f.pins)
    basis = flex_space(g, NONTRIVIAL_QUOTIENT)
    if basis.dim == 0:
        return None
    s = stress_space_matrix(g)
    v = basis.vectors
    rng = np.random.default_rng(seed)

    def attempt(c0: np.ndarray) -> SecondOrderFlex | None:
        if s.shape[1] == 0:
            c = c0
        else:
            def fun(c):
                cn = c / (np.linalg.norm(c) + 1e-300)
                p1 = (v @ cn).reshape(g.n, dim)
                return s.T @ rigidity_form(p1, p1, g.edges)

            method = "lm" if s.shape[1] >= basis.dim else "trf"
            res = least_squares(fun, c0, method=method, xtol=1e-15, ftol=1e-15, max_nfev=400)
            c = res.x
        cn = c / (np.linalg.norm(c) + 1e-300)
        p1 = (v @ cn).reshape(g.n, dim)
        if _flex_residual(g, p1) > FLEX_TOL:
            return None
        ext = extend_to_second_order(g, p1, tol)
        return ext

    for trial in range(budget):
        if trial == 0:
            c0 = np.zeros(basis.dim)
            c0[0] = 1.0
        else:
            c0 = rng.standard_normal(basis.dim)
            c0 /= np.linalg.norm(c0)
        found = attempt(c0)
        if found is not None:
            return found
    return None


@dataclass(frozen=True)
class PinnedDecision:
    verdict: str  # "certificate" | "witness"
    certificate: PDStressCertificate | None
    witness: FarkasWitness | None
    flex: SecondOrderFlex | None
    undecided: Undecided | None = None


def unpack_witness(f: Framework, witness: FarkasWitness, tol: float = EXTENSION_TOL) -> SecondOrderFlex:
    """Turn a Gram witness into an explicit pinned second-order flex.

    The velocity p' lives in fresh coordinates orthogonal to the affine span
    of p, so R(p, p') = 0 holds automatically and p' vanishes on the pins;
    p'' comes from the least-squares solve of R(p) p'' = -M(X).
    """
    n, d = f.n, f.dimension
    r = witness.flex_factor.shape[1]
    big = d + max(r, 1)
    p1 = np.zeros((n, big))
    p1[:, d : d + r] = witness.flex_factor
    rm = rigidity_matrix(f)
    rhs = -witness.edge_image
    sol, *_ = np.linalg.lstsq(rm.entries, rhs, rcond=None)
    p2 = np.zeros((n, big))
    p2[:, :d] = sol.reshape(n, d)
    scale = float(np.linalg.norm(rhs)) + 1e-300
    r2 = float(np.linalg.norm(rm.entries @ sol - rhs)) / scale
    pts = np.zeros((n, big))
    pts[:, :d] = f.points
    r1 = float(
        np.linalg.norm(rigidity_form(pts, p1, f.edges))
    ) / ((np.max(np.abs(f.points)) + 1.0) * (np.linalg.norm(p1) + 1e-300))
    return SecondOrderFlex(p1, p2, r1, r2)


def pinned_u2r_decide(
    f: Framework,
    pins=None,
    opts: SolverOptions = SolverOptions(),
    tol: float = DEFAULT_TOL,
) -> PinnedDecision:
    """Decide pinned universal second-order rigidity.

    Certificate: an equilibrium stress PD on C(1, G0), which blocks every
    pinned flex in every dimension.  Witness: a PSD Gram matrix unpacked into
    an explicit pinned second-order flex (p', p'').
    """
    pins = f.pins if pins is None else frozenset(int(i) for i in pins)
    if not pins:
        raise FrameworkError("pin_span", "pinned analysis requires a nonempty pin set")
    sub = f.points[sorted(pins)]
    centered = sub - sub.mean(axis=0)
    if numerical_rank(centered, tol) < f.configuration.span_dim:
        raise FrameworkError("pin_span", "pin set does not affinely span the configuration")
    target = coordinate_target(f, pins)
    result = synthesize_pd_stress(f, target, opts, tol)
    if isinstance(result, PDStressCertificate):
        return PinnedDecision("certificate", result, None, None)
    if isinstance(result, FarkasWitness):
        flex = unpack_witness(f, result)
        return PinnedDecision("witness", None, result, flex)
    return PinnedDecision("undecided", None, None, None, result)
