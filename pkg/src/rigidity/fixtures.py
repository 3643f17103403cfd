"""Deterministic example frameworks.

Every fixture is a pure function of (name, params) with documented
coordinates, so tests and the CLI can refer to them by name.
"""
from __future__ import annotations

import numpy as np

from .core import BAR, CABLE, STRUT, Configuration, Framework, FrameworkError, Graph


def _framework(dim, points, edges, pins=(), members=None):
    return Framework(
        Graph(len(points), tuple(tuple(e) for e in edges)),
        Configuration(dim, np.array(points, dtype=float)),
        frozenset(pins),
        members,
    )


def _unit_circle(angles_deg):
    ang = np.deg2rad(np.asarray(angles_deg, dtype=float))
    return np.stack([np.cos(ang), np.sin(ang)], axis=1)


def _segment(params):
    return _framework(1, [[0.0], [1.0]], [(0, 1)])


def _point(params):
    return _framework(3, [[0.0, 0.0, 0.0]], [])


def _triangle(params):
    return _framework(2, [[0, 0], [1, 0], [0, 1]], [(0, 1), (1, 2), (0, 2)])


def _four_cycle(params):
    return _framework(2, [[0, 0], [1, 0], [1, 1], [0, 1]], [(0, 1), (1, 2), (2, 3), (0, 3)])


def _square_with_diagonals(params):
    return _framework(
        2,
        [[0, 0], [1, 0], [1, 1], [0, 1]],
        [(0, 1), (1, 2), (2, 3), (0, 3), (0, 2), (1, 3)],
    )


def _octahedron(params):
    pts = [[1, 0, 0], [-1, 0, 0], [0, 1, 0], [0, -1, 0], [0, 0, 1], [0, 0, -1]]
    antipodal = {(0, 1), (2, 3), (4, 5)}
    edges = [
        (i, j) for i in range(6) for j in range(i + 1, 6) if (i, j) not in antipodal
    ]
    return _framework(3, pts, edges)


CUBE_POINTS = [
    [-1, -1, -1], [-1, -1, 1], [-1, 1, -1], [-1, 1, 1],
    [1, -1, -1], [1, -1, 1], [1, 1, -1], [1, 1, 1],
]
CUBE_EDGES = [
    (0, 1), (0, 2), (0, 4), (1, 3), (1, 5), (2, 3),
    (2, 6), (3, 7), (4, 5), (4, 6), (5, 7), (6, 7),
]
# Faces listed with outward-oriented cyclic vertex order.
CUBE_FACES = [
    (0, 1, 3, 2),   # x = -1
    (4, 6, 7, 5),   # x = +1
    (0, 4, 5, 1),   # y = -1
    (2, 3, 7, 6),   # y = +1
    (0, 2, 6, 4),   # z = -1
    (1, 5, 7, 3),   # z = +1
]


def _cube(params):
    return _framework(3, CUBE_POINTS, CUBE_EDGES)


def _cube_face_centers(params):
    pts = [list(map(float, p)) for p in CUBE_POINTS]
    edges = list(CUBE_EDGES)
    for face in CUBE_FACES:
        center = np.mean([CUBE_POINTS[v] for v in face], axis=0)
        c = len(pts)
        pts.append(list(center))
        edges += [(v, c) for v in face]
    return _framework(3, pts, edges)


def _cube_one_center(params):
    # Cube with a single Steiner vertex at the z=+1 face center; the other
    # five faces get one diagonal each.
    pts = [list(map(float, p)) for p in CUBE_POINTS] + [[0.0, 0.0, 1.0]]
    edges = list(CUBE_EDGES) + [(1, 8), (5, 8), (7, 8), (3, 8)]
    edges += [(0, 3), (4, 7), (0, 5), (2, 7), (0, 6)]
    return _framework(3, pts, edges)


def _y_pinned(params):
    with_bars = bool(params.get("with_pin_bars", False))
    subdivide = bool(params.get("subdivide_pin_bars", False))
    outer = _unit_circle([90, 210, 330])
    pts = [list(outer[0]), list(outer[1]), list(outer[2]), [0.0, 0.0]]
    edges = [(0, 3), (1, 3), (2, 3)]
    pins = {0, 1, 2}
    if subdivide:
        for a, b in [(0, 1), (1, 2), (2, 0)]:
            m = len(pts)
            pts.append(list(0.5 * (outer[a] + outer[b])))
            edges += [(a, m), (b, m)]
            pins.add(m)
    elif with_bars:
        edges += [(0, 1), (1, 2), (0, 2)]
    return _framework(2, pts, edges, pins)


def _twisted_triangle(params):
    # The twist is applied clockwise, against the cross-edge pattern below:
    # there no equilibrium stress is positive on all interior edges, and the
    # drawing stays an embedded triangulation up to twist ~0.33.
    theta = -float(params.get("twist", 0.3))
    scale = float(params.get("scale", 0.4))
    outer = _unit_circle([90, 210, 330])
    rot = np.array(
        [[np.cos(theta), -np.sin(theta)], [np.sin(theta), np.cos(theta)]]
    )
    inner = outer @ (scale * rot).T
    pts = [list(p) for p in outer] + [list(q) for q in inner]
    edges = [
        (0, 1), (1, 2), (0, 2),          # pinned outer triangle
        (3, 4), (4, 5), (3, 5),          # inner triangle
        (0, 3), (1, 3), (1, 4), (2, 4), (2, 5), (0, 5),
    ]
    return _framework(2, pts, edges, pins={0, 1, 2})


SQUARE_OUTER = [[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]]
SQUARE_HOLE = [[0.3, 0.3], [0.7, 0.3], [0.7, 0.7], [0.3, 0.7]]


def _holey_square(params):
    if bool(params.get("bad_hole", False)):
        # Hole edge lying along the outer boundary (improper placement),
        # with the boundary filament subdivided at its midpoint.
        pts = SQUARE_OUTER + [[0.3, 0.0], [0.7, 0.0], [0.7, 0.4], [0.3, 0.4], [0.5, 0.0]]
        c0, c1, c2, c3, h0, h1, h2, h3, z = range(9)
        edges = [
            (c0, h0), (h0, h3), (c0, h3), (c0, c3), (c3, h3), (h3, h2),
            (c3, h2), (c2, c3), (c2, h2), (h2, h1), (c2, h1), (c1, c2),
            (c1, h1), (h0, z), (z, h1),
        ]
        return _framework(2, pts, edges, pins={c0, c1, c2, c3})
    pts = SQUARE_OUTER + SQUARE_HOLE
    edges = [
        (0, 1), (1, 2), (2, 3), (0, 3),
        (4, 5), (5, 6), (6, 7), (4, 7),
        (0, 4), (1, 5), (2, 6), (3, 7),
        (0, 5), (1, 6), (2, 7), (3, 4),
    ]
    return _framework(2, pts, edges, pins={0, 1, 2, 3})


SPIDER_EDGES = [
    (0, 1), (1, 2), (2, 3), (0, 3),
    (4, 5), (5, 6), (6, 7), (4, 7),
    (0, 4), (1, 5), (2, 6), (3, 7),
]


def _frustum_spider(params):
    pins = {0, 1, 2, 3} if params.get("pin_boundary", False) else set()
    return _framework(2, SQUARE_OUTER + SQUARE_HOLE, SPIDER_EDGES, pins)


def _cable_web(params):
    # Interior cable web on a first-order rigid boundary block (square with
    # both diagonals); outer square members act as struts.
    edges = SPIDER_EDGES + [(0, 2), (1, 3)]
    f = _framework(2, SQUARE_OUTER + SQUARE_HOLE, edges)
    tag = {}
    for e in [(0, 1), (1, 2), (2, 3), (0, 3)]:
        tag[e] = STRUT
    for e in [(4, 5), (5, 6), (6, 7), (4, 7), (0, 4), (1, 5), (2, 6), (3, 7)]:
        tag[e] = CABLE
    for e in [(0, 2), (1, 3)]:
        tag[e] = BAR
    members = tuple(tag[e] for e in f.edges)
    return Framework(f.graph, f.configuration, f.pins, members)


def _ring_spider(params):
    # Frustum spider on a rigid boundary, with one spoke subdivided at its
    # midpoint so the full framework is not first-order rigid.
    pts = SQUARE_OUTER + SQUARE_HOLE + [[0.15, 0.15]]
    edges = [
        (0, 1), (1, 2), (2, 3), (0, 3),
        (4, 5), (5, 6), (6, 7), (4, 7),
        (1, 5), (2, 6), (3, 7),
        (0, 8), (8, 4),
        (0, 2), (1, 3),
    ]
    return _framework(2, pts, edges)


def _slit_tetrahedron(params):
    # Tetrahedron whose bottom face carries a slit hole along the full
    # natural edge A-B; that edge is subdivided at its midpoint, which ends
    # up hinged to the opposite face only.
    a, b = [0.0, 0.0, 0.0], [1.0, 0.0, 0.0]
    c, d = [0.5, 0.9, 0.0], [0.5, 0.3, 0.8]
    a2, b2 = [0.2, 0.1, 0.0], [0.8, 0.1, 0.0]
    z = [0.5, 0.0, 0.0]
    pts = [a, b, c, d, z, a2, b2]
    edges = [
        (0, 5), (5, 2), (5, 6), (6, 2), (6, 1), (1, 2), (0, 2),  # holed face
        (0, 4), (4, 1), (0, 3), (4, 3), (1, 3),                   # face ABD fan
        (2, 3),                                                   # faces ACD/BCD
    ]
    return _framework(3, pts, edges)


_CATALOG = {
    "segment": _segment,
    "point": _point,
    "triangle": _triangle,
    "four_cycle": _four_cycle,
    "square_with_diagonals": _square_with_diagonals,
    "octahedron": _octahedron,
    "cube": _cube,
    "cube_face_centers": _cube_face_centers,
    "cube_one_center": _cube_one_center,
    "y_pinned": _y_pinned,
    "twisted_triangle": _twisted_triangle,
    "holey_square": _holey_square,
    "frustum_spider": _frustum_spider,
    "cable_web": _cable_web,
    "ring_spider": _ring_spider,
    "slit_tetrahedron": _slit_tetrahedron,
}


def fixture_names() -> list[str]:
    return sorted(_CATALOG)


def make_example(name: str, params: dict | None = None) -> Framework:
    if name not in _CATALOG:
        raise FrameworkError("unknown_fixture", f"no fixture named {name!r}")
    params = dict(params or {})
    try:
        return _CATALOG[name](params)
    except FrameworkError:
        raise
    except (TypeError, ValueError) as exc:
        raise FrameworkError("invalid_params", f"{name}: {exc}") from exc
