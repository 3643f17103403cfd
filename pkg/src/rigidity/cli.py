"""Command-line entry points.

Exit codes: 0 certified, 2 refuted/witness, 3 undecided, 1 input error.
The verdict is decided by the analysis pipeline; `verify` re-checks report
payloads through the independent verifier only.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
import time
from pathlib import Path

import numpy as np

from . import report as rep
from .certificates import FarkasWitness, PDStressCertificate, RefutationReport, SuperStabilityCertificate, Undecided
from .core import DEFAULT_TOL, FrameworkError, load_framework
from .fixtures import fixture_names, make_example
from .linalg import flex_space, is_infinitesimally_rigid, NONTRIVIAL_QUOTIENT
from .render import render_svg
from .second_order import pinned_u2r_decide, second_order_falsify
from .synthesis import (
    SolverOptions,
    prestress_stability_certificate,
    super_stability_certificate,
)
from .verify import verify_report

EXIT_CERTIFIED = 0
EXIT_INPUT_ERROR = 1
EXIT_REFUTED = 2
EXIT_UNDECIDED = 3

CERTIFY_CHOICES = (
    "infinitesimal",
    "prestress",
    "super",
    "pinned-u2r",
    "second-order-falsify",
    "holeyhedron",
)


def _parse_params(items) -> dict:
    out = {}
    for item in items or []:
        if "=" not in item:
            raise FrameworkError("schema", f"--param expects key=value, got {item!r}")
        key, value = item.split("=", 1)
        try:
            out[key] = json.loads(value)
        except json.JSONDecodeError:
            out[key] = value
    return out


def _resolve_framework(name: str, params: dict):
    if name in fixture_names():
        return make_example(name, params), name
    path = Path(name)
    if path.exists():
        return load_framework(path.read_bytes()), path.name
    raise FrameworkError("input", f"{name!r} is neither a fixture nor an existing file")


def _analyze_framework(args, f, tol, opts):
    if args.certify == "infinitesimal":
        rigid, rank_report = is_infinitesimally_rigid(f, tol)
        mech = None
        if not rigid:
            quotient = flex_space(f, NONTRIVIAL_QUOTIENT, tol)
            if quotient.dim:
                mech = quotient.vectors[:, 0].reshape(f.n, f.dimension)
        payload = rep.rank_payload(rank_report, rigid, mech)
        extra = {}
    elif args.certify == "prestress":
        result = prestress_stability_certificate(f, opts, tol)
        payload, extra = _payload_for(result)
    elif args.certify == "super":
        result = super_stability_certificate(f, opts, tol)
        payload, extra = _payload_for(result)
    elif args.certify == "pinned-u2r":
        pins = f.pins
        if args.pins:
            pins = frozenset(int(x) for x in args.pins.split(","))
        decision = pinned_u2r_decide(f, pins, opts, tol)
        if decision.verdict == "certificate":
            payload, extra = rep.pd_certificate_payload(decision.certificate), {}
        elif decision.verdict == "witness":
            payload = rep.witness_payload(decision.witness)
            extra = {"second_order": rep.second_order_payload(decision.flex)}
        else:
            payload, extra = rep.undecided_payload(decision.undecided), {}
    elif args.certify == "second-order-falsify":
        dim = args.dimension or f.dimension
        witness = second_order_falsify(f, dim=dim, budget=args.budget, seed=opts.seed)
        if witness is None:
            payload = {"kind": rep.KIND_NO_WITNESS, "budget": args.budget, "dimension": dim}
        else:
            payload = rep.second_order_payload(witness)
        extra = {}
    else:  # pragma: no cover
        raise FrameworkError("input", f"unhandled analysis {args.certify}")
    return payload, extra


def _payload_for(result):
    if isinstance(result, PDStressCertificate):
        return rep.pd_certificate_payload(result), {}
    if isinstance(result, SuperStabilityCertificate):
        return rep.super_certificate_payload(result), {}
    if isinstance(result, FarkasWitness):
        return rep.witness_payload(result), {}
    if isinstance(result, RefutationReport):
        return rep.refutation_payload(result), {}
    if isinstance(result, Undecided):
        return rep.undecided_payload(result), {}
    raise FrameworkError("internal", f"unknown result type {type(result).__name__}")


def _analyze_holeyhedron(args, opts):
    from .holeyhedron import (
        certify_prestress_3d,
        holeyhedron_from_dict,
        make_holeyhedron_example,
        triangulate_surface,
        validate_holeyhedron,
    )

    name = args.input
    path = Path(name)
    if path.exists():
        doc = json.loads(path.read_text())
        h = holeyhedron_from_dict(doc)
        t = triangulate_surface(h, steiner={k: "center" for k in range(len(h.polytope.faces))}, seed=opts.seed)
        fixture = path.name
    else:
        try:
            h, t = make_holeyhedron_example(name)
            fixture = name
        except FrameworkError:
            raise FrameworkError("input", f"{name!r} is neither a holeyhedron fixture nor a file")
    validation = validate_holeyhedron(h, t, opts)
    if not validation["ok"]:
        payload = {
            "kind": rep.KIND_HOLEYHEDRON_FAIL,
            "validation": {k: validation[k] for k in ("a", "b", "c", "warnings", "ok")},
        }
        return payload, {}, t.framework, fixture
    result = certify_prestress_3d(h, t, opts)
    if result["verdict"] == "certificate":
        payload = rep.pd_certificate_payload(result["certificate"])
        payload["assembly"] = result["assembly"]
        payload["validation_warnings"] = validation["warnings"]
        return payload, {}, t.framework, fixture
    payload = {
        "kind": rep.KIND_HOLEYHEDRON_FAIL,
        "stage": result.get("stage"),
        "detail": result.get("detail"),
    }
    return payload, {}, t.framework, fixture


def cmd_analyze(args) -> int:
    tol = float(os.environ.get("RIGIDITY_TOL", DEFAULT_TOL))
    if args.tol is not None:
        tol = args.tol
    opts = SolverOptions(seed=args.seed)
    t0 = time.perf_counter()
    try:
        if args.certify == "holeyhedron":
            payload, extra, framework, fixture = _analyze_holeyhedron(args, opts)
        else:
            framework, fixture = _resolve_framework(args.input, _parse_params(args.param))
            payload, extra = _analyze_framework(args, framework, tol, opts)
    except FrameworkError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT_ERROR
    elapsed = time.perf_counter() - t0
    doc = rep.build_report(
        fixture,
        args.certify,
        payload,
        framework,
        args.seed,
        tol,
        timing={"analyze_seconds": elapsed},
    )
    doc.update(extra)
    text = rep.dumps_report(doc)
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    kind = payload.get("kind")
    if kind in rep.CERTIFIED_KINDS:
        return EXIT_CERTIFIED
    if kind in rep.REFUTED_KINDS:
        return EXIT_REFUTED
    return EXIT_UNDECIDED


def cmd_verify(args) -> int:
    path = Path(args.report)
    if not path.exists():
        print(f"error: no report at {path}", file=sys.stderr)
        return EXIT_INPUT_ERROR
    try:
        doc = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        print(f"error: invalid report JSON: {exc}", file=sys.stderr)
        return EXIT_INPUT_ERROR
    result = verify_report(doc)
    sys.stdout.write(json.dumps(result, indent=1, default=float) + "\n")
    return EXIT_CERTIFIED if result["ok"] else EXIT_REFUTED


def cmd_render(args) -> int:
    try:
        stress = None
        if args.input == "frustum_spider":
            from .lift import frustum_lift, mc_project

            spider = mc_project(frustum_lift())
            f = spider.framework
            stress = spider.stress.values
        else:
            f, _ = _resolve_framework(args.input, _parse_params(args.param))
        svg = render_svg(f, stress=stress, project=args.project)
    except FrameworkError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT_ERROR
    if args.out:
        Path(args.out).write_text(svg)
    else:
        sys.stdout.write(svg)
    return EXIT_CERTIFIED


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="rigidity",
        description="Decide and certify rigidity properties of bar frameworks.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    pa = sub.add_parser("analyze", help="run a certification pipeline")
    pa.add_argument("--input", required=True, help="fixture name or framework JSON file")
    pa.add_argument("--certify", required=True, choices=CERTIFY_CHOICES)
    pa.add_argument("--tol", type=float, default=None, help="rank tolerance (overrides RIGIDITY_TOL)")
    pa.add_argument("--seed", type=int, default=0)
    pa.add_argument("--out", default=None, help="report file (stdout otherwise)")
    pa.add_argument("--dimension", type=int, default=None, help="analysis dimension for the falsifier")
    pa.add_argument("--budget", type=int, default=50, help="falsifier restarts")
    pa.add_argument("--pins", default=None, help="comma-separated pin override for pinned-u2r")
    pa.add_argument("--param", action="append", help="fixture parameter key=value")
    pa.set_defaults(func=cmd_analyze)

    pv = sub.add_parser("verify", help="re-verify a report with the independent checker")
    pv.add_argument("report")
    pv.set_defaults(func=cmd_verify)

    pr = sub.add_parser("render", help="render a framework or face diagram to SVG")
    pr.add_argument("--input", required=True)
    pr.add_argument("--out", default=None)
    pr.add_argument("--project", default=None, choices=("xy", "iso"))
    pr.add_argument("--param", action="append")
    pr.set_defaults(func=cmd_render)

    pf = sub.add_parser("fixtures", help="list the fixture catalog")
    pf.set_defaults(func=lambda args: (print("\n".join(fixture_names())), 0)[1])
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
