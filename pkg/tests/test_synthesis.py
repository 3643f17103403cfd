import numpy as np
import pytest

from rigidity.certificates import FarkasWitness, PDStressCertificate, RefutationReport, SuperStabilityCertificate
from rigidity.core import FrameworkError
from rigidity.fixtures import make_example
from rigidity.linalg import stress_space_matrix, stress_matrix_entries
from rigidity.report import pd_certificate_payload, super_certificate_payload, witness_payload
from rigidity.synthesis import (
    SolverOptions,
    affine_complement_target,
    coordinate_target,
    prestress_stability_certificate,
    roth_whiteley_check,
    spider_face_prestress,
    super_stability_certificate,
    synthesize_pd_stress,
    universal_second_order_to_prestress,
)
from rigidity.verify import verify_pd_certificate, verify_super_certificate, verify_witness

OUTER_TT = {(0, 1), (1, 2), (0, 2)}


def test_vacuous_certificate_when_target_empty():
    f = make_example("octahedron")
    target = coordinate_target(f, range(6))
    result = synthesize_pd_stress(f, target)
    assert isinstance(result, PDStressCertificate)
    assert result.vacuous
    assert np.all(result.stress == 0.0)


def test_empty_stress_space_goes_to_witness():
    f = make_example("y_pinned")
    result = synthesize_pd_stress(f, coordinate_target(f, f.pins))
    assert isinstance(result, FarkasWitness)
    # p' is supported on the center vertex only
    gram = result.gram
    assert abs(gram[3, 3] - 1.0) < 1e-12
    assert np.abs(gram).sum() == pytest.approx(1.0)
    assert result.colspan_residual <= 1e-7


def test_y_pinned_with_bars_certifies():
    for params in ({"with_pin_bars": True}, {"subdivide_pin_bars": True}):
        f = make_example("y_pinned", params)
        result = synthesize_pd_stress(f, coordinate_target(f, f.pins))
        assert isinstance(result, PDStressCertificate)
        assert result.lambda_min > 1e-7
        check = verify_pd_certificate(f, pd_certificate_payload(result))
        assert check["ok"], check["failures"]


def test_twisted_triangle_certificate_has_negative_interior_stress():
    f = make_example("twisted_triangle")
    result = synthesize_pd_stress(f, coordinate_target(f, f.pins))
    assert isinstance(result, PDStressCertificate)
    assert result.lambda_min > 1e-7
    scale = np.abs(result.stress).max()
    interior = np.array(
        [w for e, w in zip(f.edges, result.stress) if e not in OUTER_TT]
    )
    assert interior.min() < -1e-6 * scale


def test_prestress_octahedron_vacuous():
    result = prestress_stability_certificate(make_example("octahedron"))
    assert isinstance(result, PDStressCertificate)
    assert result.vacuous


def test_prestress_cube_one_center_nonzero_stress():
    f = make_example("cube_one_center")
    result = prestress_stability_certificate(f)
    assert isinstance(result, PDStressCertificate)
    assert not result.vacuous
    assert np.abs(result.stress).max() > 0
    assert result.lambda_min > 1e-7
    check = verify_pd_certificate(f, pd_certificate_payload(result))
    assert check["ok"], check["failures"]


def test_prestress_four_cycle_refuted():
    result = prestress_stability_certificate(make_example("four_cycle"))
    assert isinstance(result, RefutationReport)
    assert "stress space is {0}" in result.reason


def test_super_stability_square_with_diagonals():
    f = make_example("square_with_diagonals")
    result = super_stability_certificate(f)
    assert isinstance(result, SuperStabilityCertificate)
    assert result.rank == 1
    eigs = np.asarray(result.omega_eigenvalues)
    assert eigs.min() >= -1e-9 * np.abs(eigs).max()
    check = verify_super_certificate(f, super_certificate_payload(result))
    assert check["ok"], check["failures"]


def test_super_stability_four_cycle_refuted_for_both_reasons():
    result = super_stability_certificate(make_example("four_cycle"))
    assert isinstance(result, RefutationReport)
    assert "conic" in result.reason


def test_super_stability_segment_vacuous_rank_zero():
    result = super_stability_certificate(make_example("segment"))
    assert isinstance(result, SuperStabilityCertificate)
    assert result.rank == 0


def test_super_implies_prestress_nesting():
    f = make_example("square_with_diagonals")
    assert isinstance(super_stability_certificate(f), SuperStabilityCertificate)
    assert isinstance(prestress_stability_certificate(f), PDStressCertificate)


def test_universal_second_order_to_prestress_chain():
    f = make_example("square_with_diagonals")
    rep = universal_second_order_to_prestress(f, [0, 1, 2])
    assert rep["verdict"] == "super stable / universally prestress stable"
    assert rep["rank"] == 1 and rep["psd"] and rep["conic"]
    omega = rep["certificate"].stress
    gen = stress_space_matrix(f)[:, 0]
    cos = abs(float(omega @ gen)) / (np.linalg.norm(omega) * np.linalg.norm(gen))
    assert cos >= 1.0 - 1e-8


def test_universal_second_order_four_cycle_fails_with_witness():
    rep = universal_second_order_to_prestress(make_example("four_cycle"), [0, 1, 2])
    assert rep["verdict"] == "refuted"
    assert isinstance(rep["witness"], FarkasWitness)


def test_universal_second_order_octahedron_is_refuted():
    # The regular octahedron is isostatic: its stress space is {0}, so no PSD
    # stress of rank n-d-1 can exist and the pinned search must fail.
    f = make_example("octahedron")
    assert stress_space_matrix(f).shape[1] == 0
    rep = universal_second_order_to_prestress(f, [0, 2, 4, 1])
    assert rep["verdict"] == "refuted"
    check = verify_witness(f, witness_payload(rep["witness"]))
    assert check["ok"], check["failures"]


def test_pin_set_must_span():
    f = make_example("octahedron")
    with pytest.raises(FrameworkError):
        universal_second_order_to_prestress(f, [0, 1, 2])  # collinear-through-origin picks a plane
        # (0, 1 are antipodal on the x-axis; with 2 they span only a plane)


def test_scale_invariance_of_certificate_verdict():
    f = make_example("twisted_triangle")
    result = synthesize_pd_stress(f, coordinate_target(f, f.pins))
    payload = pd_certificate_payload(result)
    for c in (10.0, 0.01):
        scaled = dict(payload)
        scaled["stress"] = [c * v for v in payload["stress"]]
        scaled["lambda_min"] = c * payload["lambda_min"]
        check = verify_pd_certificate(f, scaled)
        assert check["ok"], (c, check["failures"])
        assert check["recomputed"]["lambda_min"] == pytest.approx(
            c * payload["lambda_min"], rel=1e-6
        )


def test_roth_whiteley_cable_web():
    ok, rep = roth_whiteley_check(make_example("cable_web"))
    assert ok and rep["bar_rigid"] and rep["proper_stress_found"]


def test_roth_whiteley_square_with_diagonals_variants():
    import rigidity.core as core

    f = make_example("square_with_diagonals")
    tags = []
    for (i, j) in f.edges:
        diagonal = (i, j) in {(0, 2), (1, 3)}
        tags.append(core.CABLE if diagonal else core.STRUT)
    g = core.Framework(f.graph, f.configuration, f.pins, tuple(tags))
    ok, _ = roth_whiteley_check(g)
    assert not ok  # the stress ray has positive sides and negative diagonals

    tags2 = [core.STRUT if t == core.CABLE else core.CABLE for t in tags]
    g2 = core.Framework(f.graph, f.configuration, f.pins, tuple(tags2))
    ok2, rep2 = roth_whiteley_check(g2)
    assert ok2, rep2

    all_cables = core.Framework(
        f.graph, f.configuration, f.pins, tuple(core.CABLE for _ in f.edges)
    )
    ok3, _ = roth_whiteley_check(all_cables)
    assert not ok3


def test_roth_whiteley_requires_members():
    with pytest.raises(FrameworkError):
        roth_whiteley_check(make_example("square_with_diagonals"))


def test_spider_face_prestress_ring_fixture():
    f = make_example("ring_spider")
    spider_edges = [e for e in f.edges if e not in {(0, 2), (1, 3)}]
    result = spider_face_prestress(f, spider_edges, [0, 1, 2, 3])
    assert isinstance(result, PDStressCertificate)
    assert result.lambda_min > 1e-7


def test_spider_face_prestress_octahedron_degenerate():
    f = make_example("octahedron")
    result = spider_face_prestress(f, f.edges, range(6))
    assert isinstance(result, PDStressCertificate)
    assert result.vacuous


def test_spider_face_prestress_rejects_flexible_subgraph():
    f = make_example("frustum_spider")
    with pytest.raises(FrameworkError) as err:
        spider_face_prestress(f, f.edges, [0, 1, 2, 3])
    assert err.value.code == "subgraph_not_rigid"
