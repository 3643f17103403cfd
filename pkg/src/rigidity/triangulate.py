"""Constrained Delaunay triangulation of polygons with holes.

Incremental Bowyer-Watson insertion, constraint recovery by edge flips, and
region classification by centroid containment.  Deterministic given the seed
(the seed only drives optional random Steiner points).  Desk-scale only: a
few hundred points, double precision with explicit epsilons.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .core import FrameworkError

EPS = 1e-12


def _orient(a, b, c) -> float:
    return (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])


def _polygon_area(poly: np.ndarray) -> float:
    x, y = poly[:, 0], poly[:, 1]
    return 0.5 * float(np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y))


def _point_in_polygon(pt, poly: np.ndarray) -> bool:
    # Crossing-number test; boundary points are classified loosely, callers
    # only probe well-interior points.
    x, y = pt
    inside = False
    m = len(poly)
    for i in range(m):
        x1, y1 = poly[i]
        x2, y2 = poly[(i + 1) % m]
        if (y1 > y) != (y2 > y):
            xs = x1 + (y - y1) / (y2 - y1) * (x2 - x1)
            if xs > x:
                inside = not inside
    return inside


def _segments_properly_cross(p1, p2, p3, p4) -> bool:
    d1 = _orient(p3, p4, p1)
    d2 = _orient(p3, p4, p2)
    d3 = _orient(p1, p2, p3)
    d4 = _orient(p1, p2, p4)
    return (
        ((d1 > EPS and d2 < -EPS) or (d1 < -EPS and d2 > EPS))
        and ((d3 > EPS and d4 < -EPS) or (d3 < -EPS and d4 > EPS))
    )


def _point_segment_distance(pt, a, b) -> float:
    ab = b - a
    t = float(np.dot(pt - a, ab)) / (float(np.dot(ab, ab)) + 1e-300)
    t = min(1.0, max(0.0, t))
    return float(np.linalg.norm(pt - (a + t * ab)))


@dataclass(frozen=True)
class Region:
    """Simple polygon (CCW) with disjoint holes (any orientation)."""

    outer: np.ndarray
    holes: tuple[np.ndarray, ...] = ()

    def __post_init__(self):
        outer = np.asarray(self.outer, dtype=float)
        if _polygon_area(outer) < 0:
            outer = outer[::-1].copy()
        object.__setattr__(self, "outer", outer)
        object.__setattr__(
            self, "holes", tuple(np.asarray(h, dtype=float) for h in self.holes)
        )

    def area(self) -> float:
        return _polygon_area(self.outer) - sum(
            abs(_polygon_area(h)) for h in self.holes
        )

    def contains(self, pt) -> bool:
        if not _point_in_polygon(pt, self.outer):
            return False
        return not any(_point_in_polygon(pt, h) for h in self.holes)


@dataclass
class PlanarTriangulation:
    """Positively oriented triangles covering a region minus its holes."""

    vertices: np.ndarray                     # (k, 2)
    triangles: np.ndarray                    # (m, 3)
    constrained_edges: frozenset[tuple[int, int]]
    region: Region
    boundary_vertices: frozenset[int] = field(default_factory=frozenset)

    def edge_set(self) -> set[tuple[int, int]]:
        out = set()
        for t in self.triangles:
            for a, b in ((t[0], t[1]), (t[1], t[2]), (t[0], t[2])):
                out.add((min(a, b), max(a, b)))
        return out

    def framework_edges(self) -> list[tuple[int, int]]:
        return sorted(self.edge_set())

    def triangle_area(self, k: int) -> float:
        a, b, c = self.vertices[self.triangles[k]]
        return 0.5 * _orient(a, b, c)


class _Delaunay:
    def __init__(self, points: np.ndarray):
        self.pts = list(points)
        span = points.max(axis=0) - points.min(axis=0)
        center = points.mean(axis=0)
        r = float(max(span.max(), 1.0)) * 50.0
        self.super_ids = []
        for ang in (90, 210, 330):
            a = np.deg2rad(ang)
            self.super_ids.append(len(self.pts))
            self.pts.append(center + r * np.array([np.cos(a), np.sin(a)]))
        s = self.super_ids
        self.tris: list[tuple[int, int, int]] = [(s[0], s[1], s[2])]
        self._fix_orientation(0)
        for i in range(len(points)):
            self._insert(i)

    def _fix_orientation(self, k: int):
        a, b, c = self.tris[k]
        if _orient(self.pts[a], self.pts[b], self.pts[c]) < 0:
            self.tris[k] = (a, c, b)

    def _in_circumcircle(self, tri, idx: int) -> bool:
        a, b, c = (self.pts[v] for v in tri)
        d = self.pts[idx]
        m = np.array(
            [
                [a[0] - d[0], a[1] - d[1], (a[0] - d[0]) ** 2 + (a[1] - d[1]) ** 2],
                [b[0] - d[0], b[1] - d[1], (b[0] - d[0]) ** 2 + (b[1] - d[1]) ** 2],
                [c[0] - d[0], c[1] - d[1], (c[0] - d[0]) ** 2 + (c[1] - d[1]) ** 2],
            ]
        )
        return float(np.linalg.det(m)) > EPS

    def _insert(self, idx: int):
        bad = [k for k, t in enumerate(self.tris) if self._in_circumcircle(t, idx)]
        if not bad:
            # Point on/outside every circumcircle boundary: nudge search by
            # picking the triangle containing it.
            for k, t in enumerate(self.tris):
                a, b, c = (self.pts[v] for v in t)
                p = self.pts[idx]
                if (
                    _orient(a, b, p) >= -EPS
                    and _orient(b, c, p) >= -EPS
                    and _orient(c, a, p) >= -EPS
                ):
                    bad = [k]
                    break
        boundary: dict[tuple[int, int], int] = {}
        for k in bad:
            t = self.tris[k]
            for a, b in ((t[0], t[1]), (t[1], t[2]), (t[2], t[0])):
                key = (min(a, b), max(a, b))
                boundary[key] = boundary.get(key, 0) + 1
        cavity = [e for e, cnt in boundary.items() if cnt == 1]
        for k in sorted(bad, reverse=True):
            del self.tris[k]
        for a, b in cavity:
            if a == idx or b == idx:
                continue
            self.tris.append((a, b, idx))
            self._fix_orientation(len(self.tris) - 1)

    # -- constraint recovery ------------------------------------------------
    def _edge_map(self) -> dict[tuple[int, int], list[int]]:
        m: dict[tuple[int, int], list[int]] = {}
        for k, t in enumerate(self.tris):
            for a, b in ((t[0], t[1]), (t[1], t[2]), (t[0], t[2])):
                m.setdefault((min(a, b), max(a, b)), []).append(k)
        return m

    def _flip(self, edge: tuple[int, int]) -> tuple[int, int] | None:
        m = self._edge_map()
        owners = m.get(edge, [])
        if len(owners) != 2:
            return None
        k1, k2 = owners
        t1, t2 = self.tris[k1], self.tris[k2]
        x = next(v for v in t1 if v not in edge)
        y = next(v for v in t2 if v not in edge)
        a, b = edge
        # Flip only strictly convex quads.
        if not (
            _segments_properly_cross(self.pts[a], self.pts[b], self.pts[x], self.pts[y])
        ):
            return None
        self.tris[k1] = (x, y, a)
        self.tris[k2] = (y, x, b)
        self._fix_orientation(k1)
        self._fix_orientation(k2)
        return (min(x, y), max(x, y))

    def recover(self, a: int, b: int):
        key = (min(a, b), max(a, b))
        for _ in range(2000):
            edges = self._edge_map()
            if key in edges:
                return
            crossing = [
                e
                for e in edges
                if a not in e
                and b not in e
                and _segments_properly_cross(
                    self.pts[a], self.pts[b], self.pts[e[0]], self.pts[e[1]]
                )
            ]
            if not crossing:
                raise FrameworkError(
                    "triangulation",
                    f"constraint ({a},{b}) missing and nothing left to flip",
                )
            progressed = False
            for e in crossing:
                if self._flip(e) is not None:
                    progressed = True
                    break
            if not progressed:
                raise FrameworkError(
                    "triangulation", f"cannot recover constraint ({a},{b})"
                )
        raise FrameworkError("triangulation", f"flip limit hit for ({a},{b})")


def _chain_segments(start: int, count: int) -> list[tuple[int, int]]:
    return [(start + i, start + (i + 1) % count) for i in range(count)]


def triangulate_region(
    region: Region,
    steiner: np.ndarray | int | None = None,
    seed: int = 0,
) -> PlanarTriangulation:
    """Constrained Delaunay triangulation containing all boundary/hole edges.

    steiner: explicit (k, 2) interior points, or an integer count of random
    interior points drawn deterministically from the seed.
    """
    outer = region.outer
    if abs(_polygon_area(outer)) <= EPS:
        raise FrameworkError("triangulation", "degenerate outer polygon")
    for i in range(len(outer)):
        a, b = outer[i], outer[(i + 1) % len(outer)]
        for j in range(i + 1, len(outer)):
            c, d = outer[j], outer[(j + 1) % len(outer)]
            if _segments_properly_cross(a, b, c, d):
                raise FrameworkError("triangulation", "self-intersecting outer polygon")
    for h in region.holes:
        inner_pt = h.mean(axis=0)
        if not _point_in_polygon(inner_pt, outer):
            raise FrameworkError("triangulation", "hole outside region")

    points = [tuple(p) for p in outer]
    constraints = _chain_segments(0, len(outer))
    for h in region.holes:
        start = len(points)
        points += [tuple(p) for p in h]
        constraints += _chain_segments(start, len(h))

    pts = np.array(points, dtype=float)
    if len(np.unique(np.round(pts, 9), axis=0)) != len(pts):
        raise FrameworkError("triangulation", "duplicate boundary points")
    boundary_count = len(pts)

    extra: list[np.ndarray] = []
    if isinstance(steiner, (int, np.integer)):
        rng = np.random.default_rng(seed)
        lo, hi = outer.min(axis=0), outer.max(axis=0)
        guard = 0
        while len(extra) < int(steiner) and guard < 10000:
            guard += 1
            cand = lo + rng.random(2) * (hi - lo)
            if not region.contains(cand):
                continue
            near_constraint = any(
                _point_segment_distance(cand, pts[i], pts[j]) < 0.03
                for i, j in constraints
            )
            near_point = any(
                np.linalg.norm(cand - q) < 0.03
                for q in list(pts) + extra
            )
            if not near_constraint and not near_point:
                extra.append(cand)
    elif steiner is not None:
        extra = [np.asarray(p, dtype=float) for p in np.atleast_2d(steiner)]

    all_pts = np.vstack([pts] + [np.array(extra)]) if extra else pts
    tri = _Delaunay(all_pts)
    for a, b in constraints:
        tri.recover(a, b)

    keep = []
    npts = len(all_pts)
    for t in tri.tris:
        if any(v >= npts for v in t):
            continue
        centroid = np.mean([tri.pts[v] for v in t], axis=0)
        if region.contains(centroid):
            keep.append(tuple(int(v) for v in t))

    used = sorted({v for t in keep for v in t} | set(range(boundary_count)))
    remap = {v: i for i, v in enumerate(used)}
    vertices = all_pts[used]
    triangles = np.array([[remap[v] for v in t] for t in keep], dtype=int)
    constrained = frozenset(
        (min(remap[a], remap[b]), max(remap[a], remap[b])) for a, b in constraints
    )
    result = PlanarTriangulation(
        vertices,
        triangles,
        constrained,
        region,
        frozenset(range(boundary_count)),
    )
    report = validate_triangulation(result)
    if not report["ok"]:
        raise FrameworkError("triangulation", f"invalid triangulation: {report}")
    return result


def validate_triangulation(t: PlanarTriangulation, rel_tol: float = 1e-9) -> dict:
    """Orientation, coverage area, constraint presence, and edge-use counts."""
    areas = np.array([t.triangle_area(k) for k in range(len(t.triangles))])
    orientation_ok = bool(np.all(areas > EPS))
    target = t.region.area()
    area_ok = abs(float(areas.sum()) - target) <= rel_tol * max(abs(target), 1.0)
    edges = t.edge_set()
    constraints_ok = all(e in edges for e in t.constrained_edges)
    use: dict[tuple[int, int], int] = {}
    for tr in t.triangles:
        for a, b in ((tr[0], tr[1]), (tr[1], tr[2]), (tr[0], tr[2])):
            key = (min(a, b), max(a, b))
            use[key] = use.get(key, 0) + 1
    manifold_ok = all(cnt <= 2 for cnt in use.values()) and all(
        use.get(e, 0) >= 1 for e in t.constrained_edges
    )
    return {
        "ok": orientation_ok and area_ok and constraints_ok and manifold_ok,
        "orientation_ok": orientation_ok,
        "coverage_area": float(areas.sum()),
        "expected_area": target,
        "area_ok": area_ok,
        "constraints_ok": constraints_ok,
        "manifold_ok": manifold_ok,
    }


def cotangent_weights(t: PlanarTriangulation, min_angle: float = 1e-6) -> np.ndarray:
    """Per-edge cot(theta_ij) + cot(theta_ji) over the 1 or 2 opposite angles.

    Returns weights aligned with t.framework_edges().  In equilibrium at every
    interior vertex; nothing is asserted at boundary vertices.
    """
    edges = t.framework_edges()
    idx = {e: k for k, e in enumerate(edges)}
    w = np.zeros(len(edges))
    for tr in t.triangles:
        pts = t.vertices[tr]
        for local in range(3):
            opp = tr[local]
            i, j = tr[(local + 1) % 3], tr[(local + 2) % 3]
            u = t.vertices[i] - pts[local]
            v = t.vertices[j] - pts[local]
            cross = abs(_orient((0, 0), u, v))
            ang = np.arctan2(cross, float(np.dot(u, v)))
            if ang < min_angle or ang > np.pi - min_angle:
                raise FrameworkError("degenerate_triangle", f"triangle {tr} has angle {ang}")
            w[idx[(min(i, j), max(i, j))]] += 1.0 / np.tan(ang)
    return w


def interior_vertices(t: PlanarTriangulation) -> list[int]:
    """Vertices not on any constrained edge."""
    on_boundary = {v for e in t.constrained_edges for v in e}
    return [v for v in range(len(t.vertices)) if v not in on_boundary]
