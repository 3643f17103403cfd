"""Analysis reports: serializable payloads for every certificate kind.

Reports are deterministic for a given input and seed: canonical JSON with
sorted keys, wall-clock times quarantined in a separate "timing" field that
comparisons may strip.
"""
from __future__ import annotations

import json
from typing import Any

import numpy as np

from .certificates import (
    COORDINATE,
    FarkasWitness,
    PDStressCertificate,
    RefutationReport,
    SecondOrderFlex,
    SuperStabilityCertificate,
    TargetSubspace,
    Undecided,
)
from .core import Framework, framework_to_dict
from .linalg import RankReport

SCHEMA_VERSION = "1"

KIND_PD = "pd_stress"
KIND_SUPER = "super_stable"
KIND_WITNESS = "farkas_witness"
KIND_UNDECIDED = "undecided"
KIND_RIGID = "infinitesimally_rigid"
KIND_FLEXIBLE = "infinitesimally_flexible"
KIND_REFUTED = "refuted"
KIND_SECOND_ORDER = "second_order_witness"
KIND_NO_WITNESS = "no_witness_found"
KIND_HOLEYHEDRON_FAIL = "holeyhedron_diagnostic"

CERTIFIED_KINDS = {KIND_PD, KIND_SUPER, KIND_RIGID}
REFUTED_KINDS = {KIND_WITNESS, KIND_REFUTED, KIND_FLEXIBLE, KIND_SECOND_ORDER, KIND_HOLEYHEDRON_FAIL}


def _floats(arr) -> list:
    return np.asarray(arr, dtype=float).tolist()


def target_to_dict(target: TargetSubspace) -> dict:
    return {
        "kind": target.kind,
        "tag": target.tag,
        "pins": sorted(target.pin_set),
        "dim": int(target.dim),
        "dimension": int(target.dimension),
    }


def pd_certificate_payload(cert: PDStressCertificate) -> dict:
    return {
        "kind": KIND_PD,
        "stress": _floats(cert.stress),
        "target": target_to_dict(cert.target),
        "lambda_min": float(cert.lambda_min),
        "equilibrium_residual": float(cert.equilibrium_residual),
        "vacuous": bool(cert.vacuous),
    }


def super_certificate_payload(cert: SuperStabilityCertificate) -> dict:
    return {
        "kind": KIND_SUPER,
        "stress": _floats(cert.stress),
        "eigenvalues": _floats(cert.omega_eigenvalues),
        "rank": int(cert.rank),
        "lambda_min": float(cert.lambda_min),
        "equilibrium_residual": float(cert.equilibrium_residual),
    }


def witness_payload(w: FarkasWitness) -> dict:
    return {
        "kind": KIND_WITNESS,
        "gram": _floats(w.gram),
        "edge_image": _floats(w.edge_image),
        "flex_factor": _floats(w.flex_factor),
        "colspan_residual": float(w.colspan_residual),
        "psd_defect": float(w.psd_defect),
        "pins": sorted(w.pin_set),
    }


def second_order_payload(flex: SecondOrderFlex) -> dict:
    return {
        "kind": KIND_SECOND_ORDER,
        "p_prime": _floats(flex.first),
        "p_double_prime": _floats(flex.second),
        "first_residual": float(flex.first_residual),
        "second_residual": float(flex.second_residual),
    }


def rank_payload(report: RankReport, rigid: bool, mechanism=None) -> dict:
    doc = {
        "kind": KIND_RIGID if rigid else KIND_FLEXIBLE,
        "rank": int(report.rank),
        "flex_dim": int(report.flex_dim),
        "trivial_dim": int(report.trivial_dim),
        "nontrivial_dim": int(report.nontrivial_dim),
        "edge_count": int(report.edge_count),
    }
    if mechanism is not None:
        doc["mechanism"] = _floats(mechanism)
    return doc


def undecided_payload(u: Undecided) -> dict:
    return {
        "kind": KIND_UNDECIDED,
        "reason": u.reason,
        "best_lambda": float(u.best_lambda),
        "best_witness_residual": float(u.best_witness_residual)
        if np.isfinite(u.best_witness_residual)
        else None,
    }


def refutation_payload(r: RefutationReport) -> dict:
    doc: dict[str, Any] = {"kind": KIND_REFUTED, "reason": r.reason, "details": r.details}
    if r.witness is not None:
        doc["witness"] = witness_payload(r.witness)
    return doc


def build_report(
    fixture: str,
    analysis: str,
    payload: dict,
    framework: Framework | None,
    seed: int,
    tol: float,
    timing: dict | None = None,
) -> dict:
    report = {
        "schema_version": SCHEMA_VERSION,
        "fixture": fixture,
        "analysis": analysis,
        "verdict": payload.get("kind", "unknown"),
        "payload": payload,
        "seed": int(seed),
        "tolerances": {
            "rank_tol": tol,
            "pd_threshold": 1e-7,
            "witness_tol": 1e-7,
            "equilibrium_tol": 1e-8,
        },
    }
    if framework is not None:
        report["framework"] = framework_to_dict(framework)
    report["timing"] = timing or {}
    return report


def dumps_report(report: dict) -> str:
    return json.dumps(report, sort_keys=True, allow_nan=False, indent=1) + "\n"


def strip_timing(report: dict) -> dict:
    return {k: v for k, v in report.items() if k != "timing"}
