"""Independent re-verification of report payloads.

Deliberately isolated from the optimizer: only core and linear-algebra
modules are imported, and every quantity is recomputed from the serialized
framework and stress.  Each check is the cheap side of the analysis
(residuals, eigenvalues, ranks) with the tolerances pinned by the report
schema.
"""
from __future__ import annotations

import numpy as np

from .certificates import COORDINATE, VELOCITY
from .core import Framework, framework_from_dict
from .linalg import (
    NONTRIVIAL_QUOTIENT,
    StressVector,
    equilibrium_residuals,
    find_conic_at_infinity,
    flex_space,
    is_infinitesimally_rigid,
    kernel_basis,
    orthonormal_columns,
    rigidity_form,
    rigidity_matrix,
    stress_matrix_entries,
    stress_space_matrix,
)

LAMBDA_SLACK = 1e-8
PD_FLOOR = 1e-7
RESIDUAL_TOL = 1e-8
WITNESS_PSD_TOL = 1e-9
WITNESS_COLSPAN_TOL = 1e-7


def _target_vectors(f: Framework, target_doc: dict) -> np.ndarray:
    """Rebuild the canonical target subspace from its tag (tamper-resistant:
    the subspace is recomputed, never trusted from the report)."""
    tag = target_doc.get("tag", "")
    pins = frozenset(int(i) for i in target_doc.get("pins", []))
    if tag == "pinned_coordinates":
        free = [i for i in range(f.n) if i not in pins]
        vecs = np.zeros((f.n, len(free)))
        for k, i in enumerate(free):
            vecs[i, k] = 1.0
        return vecs
    if tag == "affine_complement":
        coords = f.configuration.span_coordinates()
        gen = np.hstack([coords, np.ones((f.n, 1))])
        return kernel_basis(orthonormal_columns(gen).T)
    if tag == NONTRIVIAL_QUOTIENT:
        return flex_space(f, NONTRIVIAL_QUOTIENT).vectors
    raise ValueError(f"unknown target tag {tag!r}")


def _reduced_eigs(f: Framework, omega: np.ndarray, target_doc: dict) -> np.ndarray:
    vecs = _target_vectors(f, target_doc)
    if vecs.shape[1] == 0:
        return np.array([])
    omega_mat = stress_matrix_entries(f.n, f.edges, omega)
    if target_doc["kind"] == COORDINATE:
        reduced = vecs.T @ omega_mat @ vecs
    else:
        d = int(target_doc["dimension"])
        t = vecs.shape[1]
        cols = [vecs[:, a].reshape(f.n, d) for a in range(t)]
        reduced = np.zeros((t, t))
        for a in range(t):
            oa = omega_mat @ cols[a]
            for b in range(a, t):
                val = float(np.sum(oa * cols[b]))
                reduced[a, b] = reduced[b, a] = val
    return np.linalg.eigvalsh(reduced)


def verify_pd_certificate(f: Framework, payload: dict) -> dict:
    """Equilibrium residual and reduced-form eigenvalues, recomputed."""
    report = {"ok": True, "failures": [], "recomputed": {}}
    omega = np.asarray(payload["stress"], dtype=float)
    sv = StressVector(omega, f.edges)
    resid = float(equilibrium_residuals(f, sv).max())
    scale = (float(np.abs(omega).max()) + 1.0) * (float(np.abs(f.points).max()) + 1.0)
    report["recomputed"]["equilibrium_residual"] = resid
    if resid > RESIDUAL_TOL * scale:
        report["ok"] = False
        report["failures"].append(f"equilibrium residual {resid:.3e} above tolerance")
    eigs = _reduced_eigs(f, omega, payload["target"])
    if payload.get("vacuous", False) and eigs.size == 0:
        return report
    if eigs.size == 0:
        report["ok"] = False
        report["failures"].append("certificate claims a nonempty target but it is empty")
        return report
    lam = float(eigs[0])
    report["recomputed"]["lambda_min"] = lam
    omega_scale = float(
        np.linalg.norm(stress_matrix_entries(f.n, f.edges, omega), 2)
    ) + 1e-300
    if lam < payload["lambda_min"] - LAMBDA_SLACK * max(1.0, omega_scale):
        report["ok"] = False
        report["failures"].append(
            f"recomputed lambda_min {lam:.3e} below recorded {payload['lambda_min']:.3e}"
        )
    if lam <= PD_FLOOR * omega_scale:
        report["ok"] = False
        report["failures"].append(f"lambda_min {lam:.3e} not above the PD floor")
    return report


def verify_super_certificate(f: Framework, payload: dict) -> dict:
    report = verify_pd_certificate(
        f,
        {
            "stress": payload["stress"],
            "target": {"kind": COORDINATE, "tag": "affine_complement", "pins": [], "dimension": 1},
            "lambda_min": payload["lambda_min"],
            "vacuous": f.n - f.configuration.span_dim - 1 == 0,
        },
    )
    omega = np.asarray(payload["stress"], dtype=float)
    omega_mat = stress_matrix_entries(f.n, f.edges, omega)
    eigs = np.linalg.eigvalsh(omega_mat)
    scale = float(np.abs(eigs).max()) + 1e-300
    want_rank = f.n - f.configuration.span_dim - 1
    rank = int(np.sum(eigs > 1e-9 * scale)) if want_rank > 0 else 0
    report["recomputed"]["omega_eigenvalues"] = eigs.tolist()
    report["recomputed"]["rank"] = rank
    if want_rank > 0 and eigs.min() < -1e-9 * scale:
        report["ok"] = False
        report["failures"].append("stress matrix not PSD")
    if rank != want_rank:
        report["ok"] = False
        report["failures"].append(f"rank {rank} != n-d-1 = {want_rank}")
    if find_conic_at_infinity(f) is not None:
        report["ok"] = False
        report["failures"].append("edge directions lie on a conic at infinity")
    return report


def verify_witness(f: Framework, payload: dict) -> dict:
    """PSD-ness, pin support, and the column-span residual of the edge image."""
    report = {"ok": True, "failures": [], "recomputed": {}}
    gram = np.asarray(payload["gram"], dtype=float)
    pins = [int(i) for i in payload.get("pins", [])]
    gnorm = float(np.linalg.norm(gram, 2))
    if gnorm <= 0:
        report["ok"] = False
        report["failures"].append("witness gram matrix is zero")
        return report
    eigs = np.linalg.eigvalsh(0.5 * (gram + gram.T))
    report["recomputed"]["gram_min_eig"] = float(eigs.min())
    if eigs.min() < -WITNESS_PSD_TOL * gnorm:
        report["ok"] = False
        report["failures"].append("gram matrix not PSD within tolerance")
    if pins:
        support = float(np.abs(gram[pins, :]).max())
        if support > 1e-9 * gnorm:
            report["ok"] = False
            report["failures"].append("gram matrix not supported off the pinned vertices")
    image = np.array([gram[i, i] - 2 * gram[i, j] + gram[j, j] for i, j in f.edges])
    s_basis = stress_space_matrix(f)
    inorm = float(np.linalg.norm(image))
    if inorm <= 1e-14 * gnorm or s_basis.shape[1] == 0:
        residual = 0.0
    else:
        residual = float(np.linalg.norm(s_basis.T @ image)) / inorm
    report["recomputed"]["colspan_residual"] = residual
    if residual > WITNESS_COLSPAN_TOL:
        report["ok"] = False
        report["failures"].append(f"edge image leaves the rigidity column span ({residual:.3e})")
    return report


def verify_second_order(f: Framework, payload: dict) -> dict:
    """Both residual identities of a second-order flex, in the embedded dimension."""
    report = {"ok": True, "failures": [], "recomputed": {}}
    p1 = np.asarray(payload["p_prime"], dtype=float)
    p2 = np.asarray(payload["p_double_prime"], dtype=float)
    big = p1.shape[1]
    pts = np.zeros((f.n, big))
    pts[:, : f.dimension] = f.points
    pscale = float(np.abs(pts).max()) + 1.0
    r1 = float(np.linalg.norm(rigidity_form(pts, p1, f.edges)))
    n1 = r1 / (pscale * (np.linalg.norm(p1) + 1e-300))
    rhs = rigidity_form(p1, p1, f.edges)
    r2vec = rigidity_form(pts, p2, f.edges) + rhs
    n2 = float(np.linalg.norm(r2vec)) / (float(np.linalg.norm(rhs)) + 1e-300)
    report["recomputed"]["first_residual"] = n1
    report["recomputed"]["second_residual"] = n2
    if n1 > 1e-9:
        report["ok"] = False
        report["failures"].append(f"first-order residual {n1:.3e} too large")
    if n2 > 1e-8:
        report["ok"] = False
        report["failures"].append(f"second-order residual {n2:.3e} too large")
    if float(np.linalg.norm(p1)) <= 0:
        report["ok"] = False
        report["failures"].append("first-order part is zero")
    return report


def verify_rank(f: Framework, payload: dict) -> dict:
    report = {"ok": True, "failures": [], "recomputed": {}}
    rigid, rr = is_infinitesimally_rigid(f)
    report["recomputed"]["rank"] = rr.rank
    report["recomputed"]["nontrivial_dim"] = rr.nontrivial_dim
    if rr.rank != int(payload["rank"]):
        report["ok"] = False
        report["failures"].append(f"rank mismatch: {rr.rank} != {payload['rank']}")
    claimed_rigid = payload["kind"] == "infinitesimally_rigid"
    if rigid != claimed_rigid:
        report["ok"] = False
        report["failures"].append("rigidity verdict mismatch")
    return report


def verify_report(report_doc: dict) -> dict:
    """Re-verify a full report; exit-code semantics are left to the CLI."""
    out = {"ok": True, "failures": [], "checks": {}}
    payload = report_doc.get("payload", {})
    kind = payload.get("kind")
    fw_doc = report_doc.get("framework")
    if fw_doc is None:
        out["ok"] = False
        out["failures"].append("report has no framework to verify against")
        return out
    f = framework_from_dict(fw_doc)
    if kind == "pd_stress":
        res = verify_pd_certificate(f, payload)
    elif kind == "super_stable":
        res = verify_super_certificate(f, payload)
    elif kind == "farkas_witness":
        res = verify_witness(f, payload)
        flex_doc = report_doc.get("second_order")
        if flex_doc is not None:
            res2 = verify_second_order(f, flex_doc)
            out["checks"]["second_order"] = res2
            if not res2["ok"]:
                out["ok"] = False
                out["failures"].extend(res2["failures"])
    elif kind == "second_order_witness":
        res = verify_second_order(f, payload)
    elif kind in ("infinitesimally_rigid", "infinitesimally_flexible"):
        res = verify_rank(f, payload)
    elif kind in ("refuted", "undecided", "no_witness_found", "holeyhedron_diagnostic"):
        res = {"ok": True, "failures": [], "recomputed": {}}
        if "witness" in payload:
            res = verify_witness(f, payload["witness"])
    else:
        res = {"ok": False, "failures": [f"unknown payload kind {kind!r}"], "recomputed": {}}
    out["checks"]["payload"] = res
    if not res["ok"]:
        out["ok"] = False
        out["failures"].extend(res["failures"])
    return out
