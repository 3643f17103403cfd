import numpy as np
import pytest

from rigidity.core import Configuration, Framework, FrameworkError, Graph
from rigidity.fixtures import make_example
from rigidity.linalg import (
    AFFINE_NONTRIVIAL,
    ALL_FLEXES,
    NONTRIVIAL_QUOTIENT,
    PINNED_FLEXES,
    TRIVIAL,
    StressVector,
    classify_flex,
    equilibrium_residuals,
    find_conic_at_infinity,
    flex_space,
    is_infinitesimally_rigid,
    rigidity_form,
    rigidity_matrix,
    stress_energy,
    stress_matrix,
    stress_space,
    trivial_flex_basis,
)

from oracles import gauss_rank, kernel_dim, random_trivial_flex


def test_segment_rigidity_matrix_row():
    f = make_example("segment")
    r = rigidity_matrix(f)
    assert np.allclose(r.entries, [[-1.0, 1.0]])


def test_triangle_rank_matches_gauss_oracle():
    f = make_example("triangle")
    r = rigidity_matrix(f)
    assert r.rank == gauss_rank(r.entries) == 3


def test_octahedron_rank_is_maximal():
    f = make_example("octahedron")
    r = rigidity_matrix(f)
    assert r.rank == gauss_rank(r.entries) == 12 == 3 * f.n - 6


def test_rigidity_form_values_and_symmetry():
    f = make_example("octahedron")
    assert np.allclose(
        rigidity_form(f.configuration, f.points, f.edges), f.edge_lengths() ** 2
    )
    trans = np.tile([1.0, 2.0, 3.0], (f.n, 1))
    assert np.abs(rigidity_form(f.configuration, trans, f.edges)).max() == 0.0
    rng = np.random.default_rng(1)
    for _ in range(100):
        p = rng.standard_normal((f.n, 3))
        q = rng.standard_normal((f.n, 3))
        a = rigidity_form(p, q, f.edges)
        b = rigidity_form(q, p, f.edges)
        assert np.abs(a - b).max() < 1e-12 * max(1.0, np.abs(a).max())


def test_trivial_basis_dimensions():
    tri = Configuration(2, np.array([[0.0, 0], [1, 0], [0, 1]]))
    assert trivial_flex_basis(tri).dim == 3
    octa = make_example("octahedron").configuration
    assert trivial_flex_basis(octa).dim == 6
    two = Configuration(3, np.array([[0.0, 0, 0], [1, 0, 0]]))
    assert trivial_flex_basis(two).dim == 5


def test_flex_space_dimensions_match_kernel_oracle():
    fc = make_example("four_cycle")
    r = rigidity_matrix(fc)
    assert flex_space(fc, ALL_FLEXES).dim == kernel_dim(r.entries) == 4
    assert flex_space(fc, NONTRIVIAL_QUOTIENT).dim == 1

    octa = make_example("octahedron")
    assert flex_space(octa, NONTRIVIAL_QUOTIENT).dim == 0

    yp = make_example("y_pinned")
    assert flex_space(yp, PINNED_FLEXES).dim == 0


def test_flex_basis_vectors_are_flexes():
    f = make_example("four_cycle")
    r = rigidity_matrix(f)
    basis = flex_space(f, ALL_FLEXES)
    for k in range(basis.dim):
        v = basis.vectors[:, k]
        assert np.linalg.norm(r.apply(v)) <= 1e-9 * np.linalg.norm(r.entries)


def test_infinitesimal_rigidity_verdicts():
    rigid, rep = is_infinitesimally_rigid(make_example("octahedron"))
    assert rigid and rep.rank == 12
    rigid, rep = is_infinitesimally_rigid(make_example("four_cycle"))
    assert not rigid and rep.nontrivial_dim == 1
    rigid, _ = is_infinitesimally_rigid(make_example("point"))
    assert rigid


def test_stress_space_dimensions():
    assert len(stress_space(make_example("y_pinned"))) == 0
    assert len(stress_space(make_example("four_cycle"))) == 0
    basis = stress_space(make_example("square_with_diagonals"))
    assert len(basis) == 1
    f = make_example("square_with_diagonals")
    assert equilibrium_residuals(f, basis[0]).max() < 1e-12


def test_stress_matrix_properties():
    seg = make_example("segment")
    omega = stress_matrix(seg, StressVector(np.array([1.0]), seg.edges))
    assert np.allclose(omega.entries, [[1, -1], [-1, 1]])

    swd = make_example("square_with_diagonals")
    w = stress_space(swd)[0]
    om = stress_matrix(swd, w)
    assert np.abs(om.entries @ np.ones(4)).max() < 1e-12
    assert om.rank() == 1 == swd.n - 2 - 1
    # kernel contains the configuration coordinates (Prop-style invariant)
    assert np.abs(om.entries @ swd.points).max() < 1e-10


def test_stress_energy_identities():
    seg = make_example("segment")
    w = StressVector(np.array([1.0]), seg.edges)
    q = np.array([[0.0, 0.0], [0.0, 2.0]])
    assert stress_energy(w, q) == pytest.approx(4.0)
    assert stress_energy(w, np.array([[5.0], [5.0]])) == 0.0

    swd = make_example("square_with_diagonals")
    ws = stress_space(swd)[0]
    rng = np.random.default_rng(2)
    for _ in range(100):
        q = rng.standard_normal((4, 2))
        direct = stress_energy(ws, q)
        via_form = float(ws.values @ rigidity_form(q, q, swd.edges))
        assert abs(direct - via_form) < 1e-12 * max(1.0, abs(direct))


def test_energy_vanishes_on_trivial_flexes_for_equilibrium_stress():
    swd = make_example("square_with_diagonals")
    w = stress_space(swd)[0]
    rng = np.random.default_rng(3)
    for _ in range(50):
        v = random_trivial_flex(rng, swd.points)
        assert abs(stress_energy(w, v)) < 1e-10 * max(1.0, np.abs(v).max() ** 2)


def test_cokernel_orthogonal_to_column_space():
    swd = make_example("square_with_diagonals")
    w = stress_space(swd)[0]
    r = rigidity_matrix(swd)
    rng = np.random.default_rng(4)
    for _ in range(50):
        q = rng.standard_normal(8)
        assert abs(w.values @ (r.entries @ q)) < 1e-10 * np.linalg.norm(q)


def test_rank_nullity_identity():
    for name in ("four_cycle", "octahedron", "twisted_triangle", "cube_face_centers"):
        f = make_example(name)
        r = rigidity_matrix(f)
        assert r.rank + flex_space(f, ALL_FLEXES).dim == f.n * f.dimension


def test_conic_four_cycle_matches_closed_form():
    f = make_example("four_cycle")
    w = find_conic_at_infinity(f)
    assert w is not None
    expected = np.array([[0.0, 1.0], [1.0, 0.0]]) / np.sqrt(2.0)
    # span frame may flip axes; compare in the original coordinates up to sign
    q_world = w.frame @ w.q @ w.frame.T
    assert min(
        np.abs(q_world - expected).max(), np.abs(q_world + expected).max()
    ) < 1e-9
    assert w.violated_pair in {(0, 2), (1, 3)}


def test_conic_none_cases():
    assert find_conic_at_infinity(make_example("triangle")) is None
    assert find_conic_at_infinity(make_example("square_with_diagonals")) is None


def test_classify_trivial_flexes_and_mechanism():
    f = make_example("four_cycle")
    rng = np.random.default_rng(5)
    for _ in range(200):
        v = random_trivial_flex(rng, f.points)
        cls = classify_flex(f, v)
        assert cls.label == TRIVIAL
        assert not cls.effective
    mech = flex_space(f, NONTRIVIAL_QUOTIENT).vectors[:, 0]
    cls = classify_flex(f, mech)
    assert cls.label == AFFINE_NONTRIVIAL
    assert cls.effective


def test_classify_rejects_non_flex():
    f = make_example("triangle")
    with pytest.raises(FrameworkError):
        classify_flex(f, np.array([[1.0, 0], [0, 0], [0, 0]]))
