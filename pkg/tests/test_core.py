import json

import numpy as np
import pytest

from rigidity.core import (
    Configuration,
    Framework,
    FrameworkError,
    Graph,
    TrivialFlex,
    dump_framework,
    evaluate_trivial_flex,
    load_framework,
)
from rigidity.fixtures import fixture_names, make_example
from rigidity.linalg import rigidity_form

from oracles import gauss_rank, random_trivial_flex


def test_load_minimal_segment():
    raw = b'{"dimension": 1, "points": [[0.0], [1.0]], "edges": [[0, 1]]}'
    f = load_framework(raw)
    assert f.n == 2
    assert f.graph.edge_count == 1
    assert f.configuration.span_dim == 1


def test_load_octahedron_span_matches_gauss_oracle():
    f = make_example("octahedron")
    data = dump_framework(f)
    g = load_framework(data)
    assert g.n == 6 and g.graph.edge_count == 12
    centered = g.points - g.points.mean(axis=0)
    assert g.configuration.span_dim == gauss_rank(centered) == 3


@pytest.mark.parametrize(
    "doc,code",
    [
        ({"dimension": 2, "points": [[0, 0], [1, 0]], "edges": [[0, 0]]}, "self_loop"),
        ({"dimension": 2, "points": [[0, 0], [1, 0]], "edges": [[0, 1], [1, 0]]}, "duplicate_edge"),
        ({"dimension": 2, "points": [[0, 0], [1, 0]], "edges": [[0, 5]]}, "index_range"),
        ({"dimension": 2, "points": [[0, 0], [0, 0]], "edges": [[0, 1]]}, "zero_length"),
        ({"dimension": 2, "points": [[0, 0], [1]], "edges": [[0, 1]]}, "dimension_mismatch"),
        ({"points": [[0, 0]], "edges": []}, "schema"),
    ],
)
def test_load_errors_have_distinct_codes(doc, code):
    with pytest.raises(FrameworkError) as err:
        load_framework(json.dumps(doc))
    assert err.value.code == code


def test_round_trip_is_byte_identical():
    for name in ("octahedron", "y_pinned", "cable_web", "twisted_triangle"):
        f = make_example(name)
        data = dump_framework(f)
        again = dump_framework(load_framework(data))
        assert data == again


def test_edges_canonicalized():
    g = Graph(4, ((3, 1), (2, 0)))
    assert g.edges == ((0, 2), (1, 3))


def test_evaluate_trivial_flex_translation_and_rotation():
    c = Configuration(2, np.array([[1.0, 0.0], [0.0, 2.0]]))
    t = TrivialFlex(np.zeros((2, 2)), np.array([1.0, 0.0]))
    v = evaluate_trivial_flex(t, c)
    assert np.allclose(v, [[1, 0], [1, 0]])
    rot = TrivialFlex(np.array([[0.0, -1.0], [1.0, 0.0]]), np.zeros(2))
    v = evaluate_trivial_flex(rot, Configuration(2, np.array([[1.0, 0.0]])))
    assert np.allclose(v, [[0.0, 1.0]])


def test_trivial_flex_kills_rigidity_form_on_octahedron():
    f = make_example("octahedron")
    rng = np.random.default_rng(0)
    for _ in range(25):
        v = random_trivial_flex(rng, f.points)
        r = rigidity_form(f.configuration, v, f.edges)
        assert np.abs(r).max() < 1e-12 * max(1.0, np.abs(v).max())


def test_skew_storage_is_exactly_antisymmetric():
    a = np.array([[0.3, 1.0], [2.0, -0.5]])
    t = TrivialFlex(a, np.zeros(2))
    assert np.array_equal(t.skew, -t.skew.T)


def test_fixtures_are_deterministic_and_valid():
    for name in fixture_names():
        f1 = make_example(name)
        f2 = make_example(name)
        assert np.array_equal(f1.points, f2.points)
        assert f1.edges == f2.edges
        assert f1.pins == f2.pins


def test_unknown_fixture_and_bad_params():
    with pytest.raises(FrameworkError):
        make_example("no_such_fixture")
    with pytest.raises(FrameworkError):
        make_example("twisted_triangle", {"twist": "not-a-number"})


def test_y_pinned_geometry_matches_spec():
    f = make_example("y_pinned")
    assert f.pins == {0, 1, 2}
    assert np.allclose(f.points[3], [0, 0])
    radii = np.linalg.norm(f.points[:3], axis=1)
    assert np.allclose(radii, 1.0)
    assert f.edges == ((0, 3), (1, 3), (2, 3))


def test_members_round_trip():
    f = make_example("cable_web")
    g = load_framework(dump_framework(f))
    assert g.members == f.members
