"""Maxwell-Cremona projection of lifted convex polytopes into spider
tensegrities, spider-point constructions, overlay subdivision, and the random
lift generator used by the property tests.

A LiftedFace is a convex polytope given face-explicitly whose bottom face is
the base polygon at z = 0; every other face is strictly upward-sloping (no
vertical faces), so its height function is a concave piecewise-linear
envelope over the base.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import Configuration, Framework, FrameworkError, Graph
from .linalg import StressVector, equilibrium_residuals
from .triangulate import (
    EPS,
    PlanarTriangulation,
    _orient,
    _point_in_polygon,
    _point_segment_distance,
    _polygon_area,
    _segments_properly_cross,
)

PLANARITY_TOL = 1e-9


def _rot90(v: np.ndarray) -> np.ndarray:
    return np.array([-v[1], v[0]])


@dataclass(frozen=True)
class SpiderTensegrity:
    """Planar framework + equilibrium stress positive off the boundary set."""

    framework: Framework
    boundary_set: frozenset[int]
    stress: StressVector

    def interior_edge_mask(self) -> np.ndarray:
        return np.array(
            [
                not (i in self.boundary_set and j in self.boundary_set)
                for i, j in self.framework.edges
            ]
        )


def verify_spider(s: SpiderTensegrity, residual_tol: float = 1e-10) -> dict:
    """Recompute equilibrium and positivity margins; independent of mc_project."""
    lengths = s.framework.edge_lengths()
    scale = float(np.abs(s.stress.values).max() + 1.0) * float(lengths.max() + 1.0)
    residuals = equilibrium_residuals(s.framework, s.stress)
    interior = s.interior_edge_mask()
    interior_vals = s.stress.values[interior]
    min_margin = float(interior_vals.min()) if interior_vals.size else np.inf
    zero_len = float(lengths.min()) <= 0.0
    ok = (
        float(residuals.max()) <= residual_tol * scale
        and (interior_vals.size == 0 or min_margin > 0.0)
        and not zero_len
    )
    return {
        "ok": bool(ok),
        "max_equilibrium_residual": float(residuals.max()),
        "residual_scale": scale,
        "min_interior_stress": min_margin,
        "boundary_stresses": s.stress.values[~interior].tolist(),
        "zero_length_edges": zero_len,
    }


@dataclass(frozen=True)
class LiftedFace:
    """Convex lift polytope over a convex base polygon.

    base: (m, 2) CCW polygon; lift_vertices: (M, 3); lift_faces: cyclic index
    tuples; hole_faces: indices of upper faces whose projections are the holes.
    """

    base: np.ndarray
    lift_vertices: np.ndarray
    lift_faces: tuple[tuple[int, ...], ...]
    hole_faces: tuple[int, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "base", np.asarray(self.base, dtype=float))
        object.__setattr__(
            self, "lift_vertices", np.asarray(self.lift_vertices, dtype=float)
        )
        object.__setattr__(
            self,
            "lift_faces",
            tuple(tuple(int(v) for v in f) for f in self.lift_faces),
        )
        object.__setattr__(self, "hole_faces", tuple(int(h) for h in self.hole_faces))

    @classmethod
    def flat(cls, base) -> "LiftedFace":
        base = np.asarray(base, dtype=float)
        verts = np.hstack([base, np.zeros((len(base), 1))])
        return cls(base, verts, (tuple(range(len(base))),), ())

    @property
    def is_flat(self) -> bool:
        return len(self.lift_faces) == 1

    def bottom_face_index(self) -> int:
        for k, face in enumerate(self.lift_faces):
            pts = self.lift_vertices[list(face)]
            if np.max(np.abs(pts[:, 2])) <= PLANARITY_TOL:
                return k
        raise FrameworkError("lift", "no bottom face at z = 0")

    def face_plane(self, k: int) -> tuple[np.ndarray, float]:
        """Heights z = a . (x, y) + b over the projection; rejects vertical faces."""
        pts = self.lift_vertices[list(self.lift_faces[k])]
        design = np.hstack([pts[:, :2], np.ones((len(pts), 1))])
        sol, res, rank, sv = np.linalg.lstsq(design, pts[:, 2], rcond=None)
        fit = design @ sol - pts[:, 2]
        if rank < 3 or float(np.abs(fit).max()) > 1e-7 * (1.0 + np.abs(pts).max()):
            raise FrameworkError("vertical_face", f"face {k} is vertical or non-planar")
        return sol[:2], float(sol[2])

    def hole_polygons(self) -> list[np.ndarray]:
        return [self.lift_vertices[list(self.lift_faces[h])][:, :2] for h in self.hole_faces]

    def edges_with_faces(self) -> dict[tuple[int, int], list[int]]:
        out: dict[tuple[int, int], list[int]] = {}
        for k, face in enumerate(self.lift_faces):
            m = len(face)
            for t in range(m):
                a, b = face[t], face[(t + 1) % m]
                out.setdefault((min(a, b), max(a, b)), []).append(k)
        return out


def validate_lifted_face(lift: LiftedFace) -> dict:
    """Planarity, convexity, bottom-face match, and hole placement checks."""
    issues: list[str] = []
    v = lift.lift_vertices
    # Face planarity via best-fit plane residual.
    for k, face in enumerate(lift.lift_faces):
        pts = v[list(face)]
        centered = pts - pts.mean(axis=0)
        if len(face) >= 4:
            sv = np.linalg.svd(centered, compute_uv=False)
            if sv[-1] > PLANARITY_TOL * (1.0 + sv[0]):
                issues.append(f"face {k} not planar")
    # Convexity: all vertices weakly inside every face halfspace.
    interior = v.mean(axis=0)
    for k, face in enumerate(lift.lift_faces):
        pts = v[list(face)]
        centered = pts - pts.mean(axis=0)
        if len(face) < 3:
            issues.append(f"face {k} degenerate")
            continue
        normal = np.cross(pts[1] - pts[0], pts[2] - pts[0])
        nn = np.linalg.norm(normal)
        if nn <= 1e-14:
            issues.append(f"face {k} degenerate")
            continue
        normal = normal / nn
        if np.dot(normal, interior - pts[0]) > 0:
            normal = -normal
        slack = (v - pts[0]) @ normal
        if float(slack.max()) > 1e-7 * (1.0 + np.abs(v).max()):
            issues.append(f"face {k} violates convexity")
    # Bottom face must project to the base polygon.
    try:
        bottom = lift.bottom_face_index()
        proj = v[list(lift.lift_faces[bottom])][:, :2]
        if len(proj) != len(lift.base):
            issues.append("bottom face vertex count != base")
        else:
            base = lift.base
            m = len(base)
            matched = False
            for shift in range(m):
                for order in (1, -1):
                    cand = np.roll(proj[::order], shift, axis=0)
                    if np.allclose(cand, base, atol=1e-9):
                        matched = True
            if not matched:
                issues.append("bottom face does not project onto the base polygon")
    except FrameworkError:
        issues.append("no bottom face at z = 0")
    # Holes: each hole-face projection strictly inside the base, or touching
    # only natural vertices of the base.
    base = lift.base
    m = len(base)
    for h, poly in zip(lift.hole_faces, lift.hole_polygons()):
        for pt in poly:
            on_vertex = any(np.linalg.norm(pt - bv) <= 1e-9 for bv in base)
            if on_vertex:
                continue
            on_edge = any(
                _point_segment_distance(pt, base[i], base[(i + 1) % m]) <= 1e-9
                for i in range(m)
            )
            if on_edge or not _point_in_polygon(pt, base):
                issues.append(
                    f"hole face {h} has a vertex on the base boundary (not a natural vertex)"
                )
                break
    return {"ok": not issues, "issues": issues}


def mc_project(lift: LiftedFace, residual_tol: float = 1e-10) -> SpiderTensegrity:
    """Project the 1-skeleton; stresses come from face-gradient differences.

    For the edge {i, j} shared by faces f and g, with f on the left of the
    projected direction i -> j, the stress is the scalar with
    a_g - a_f = omega * rot90_ccw(p_j - p_i).  Interior edges of a strictly
    convex lift come out positive; base boundary edges carry the balancing
    stress of whatever sign equilibrium requires.
    """
    if lift.is_flat:
        raise FrameworkError("lift", "flat face has no lift skeleton; use spider_for_point")
    grads = {}
    for k in range(len(lift.lift_faces)):
        grads[k] = lift.face_plane(k)[0]
    proj = lift.lift_vertices[:, :2]
    edge_faces = lift.edges_with_faces()
    for e, faces in edge_faces.items():
        if len(faces) != 2:
            raise FrameworkError("lift", f"edge {e} belongs to {len(faces)} faces")

    # The upper faces tile the base injectively in projection, so "left of a
    # directed edge" is well defined among them once each projected cycle is
    # oriented CCW.  The bottom face plays the role of the outer face: it
    # claims whichever direction of a boundary edge is left unclaimed.
    bottom = lift.bottom_face_index()
    left_face: dict[tuple[int, int], int] = {}
    for k, face in enumerate(lift.lift_faces):
        if k == bottom:
            continue
        cyc = list(face)
        if _polygon_area(proj[cyc]) < 0:
            cyc = cyc[::-1]
        m = len(cyc)
        for t in range(m):
            left_face[(cyc[t], cyc[(t + 1) % m])] = k

    edges = sorted(edge_faces)
    values = np.zeros(len(edges))
    for idx, (i, j) in enumerate(edges):
        d = proj[j] - proj[i]
        if float(np.linalg.norm(d)) <= 1e-12:
            raise FrameworkError("zero_length", f"edge {(i, j)} projects to a point")
        f = left_face.get((i, j), bottom)
        g = left_face.get((j, i), bottom)
        if f == g:
            raise FrameworkError("lift", f"inconsistent face orientation at edge {(i, j)}")
        r = _rot90(d)
        values[idx] = float(np.dot(grads[g] - grads[f], r)) / float(np.dot(r, r))

    bottom = lift.bottom_face_index()
    boundary = frozenset(lift.lift_faces[bottom])
    framework = Framework(
        Graph(len(proj), tuple(edges)), Configuration(2, proj.copy())
    )
    spider = SpiderTensegrity(framework, boundary, StressVector(values, framework.edges))
    report = verify_spider(spider, residual_tol)
    if not report["ok"]:
        raise FrameworkError("lift", f"projection failed verification: {report}")
    return spider


def _locate_face(lift: LiftedFace, x: np.ndarray) -> int:
    """Upper face whose projection contains x (interior)."""
    for k, face in enumerate(lift.lift_faces):
        if k == lift.bottom_face_index():
            continue
        poly = lift.lift_vertices[list(face)][:, :2]
        if _point_in_polygon(x, poly):
            return k
    raise FrameworkError("lift", f"point {x} is not interior to any upper face projection")


def spider_for_point(lift: LiftedFace, x, residual_tol: float = 1e-10) -> SpiderTensegrity:
    """Spider tensegrity containing x as a vertex.

    Projected vertex -> the plain projection; interior of a projected face ->
    raise the preimage by half its convexity margin; interior of a projected
    edge -> subdivide the edge, both halves keep the parent stress.
    """
    x = np.asarray(x, dtype=float)
    base = lift.base
    m = len(base)
    on_boundary = any(
        _point_segment_distance(x, base[i], base[(i + 1) % m]) <= 1e-9 for i in range(m)
    )
    if on_boundary:
        raise FrameworkError("lift", "point lies on the boundary set; no spider needed")
    if not _point_in_polygon(x, base):
        raise FrameworkError("lift", "point outside the base polygon")
    for poly in lift.hole_polygons():
        strict_inside = _point_in_polygon(x, poly) and all(
            _point_segment_distance(x, poly[i], poly[(i + 1) % len(poly)]) > 1e-9
            for i in range(len(poly))
        )
        if strict_inside:
            raise FrameworkError("lift", "point lies inside a hole")

    if lift.is_flat:
        # Pyramid with apex over x; height tied to the distance to the
        # boundary for conditioning.
        dist = min(
            _point_segment_distance(x, base[i], base[(i + 1) % m]) for i in range(m)
        )
        apex_h = 0.5 * dist
        verts = np.vstack(
            [np.hstack([base, np.zeros((m, 1))]), [[x[0], x[1], apex_h]]]
        )
        faces = [tuple(range(m))] + [(i, (i + 1) % m, m) for i in range(m)]
        return mc_project(LiftedFace(base, verts, tuple(faces)), residual_tol)

    proj = lift.lift_vertices[:, :2]
    # Existing projected vertex?
    for idx in range(len(proj)):
        if np.linalg.norm(proj[idx] - x) <= 1e-9:
            return mc_project(lift, residual_tol)

    # Interior of a projected edge: subdivide.  A piece of length l inherits
    # omega * L / l, which keeps the force on the far endpoints identical and
    # balances at the collinear subdivision point.
    spider = mc_project(lift, residual_tol)
    for k, (i, j) in enumerate(spider.framework.edges):
        a, b = proj[i], proj[j]
        if (
            _point_segment_distance(x, a, b) <= 1e-9
            and np.linalg.norm(x - a) > 1e-9
            and np.linalg.norm(x - b) > 1e-9
        ):
            pts = np.vstack([proj, x])
            new = len(proj)
            full = float(np.linalg.norm(b - a))
            omega = float(spider.stress.values[k])
            edges = [e for t, e in enumerate(spider.framework.edges) if t != k]
            values = [float(v) for t, v in enumerate(spider.stress.values) if t != k]
            edges += [(i, new), (j, new)]
            values += [
                omega * full / float(np.linalg.norm(x - a)),
                omega * full / float(np.linalg.norm(x - b)),
            ]
            fw = Framework(Graph(len(pts), tuple(edges)), Configuration(2, pts))
            aligned = StressVector(
                np.array([values[edges.index(e)] for e in fw.edges]), fw.edges
            )
            out = SpiderTensegrity(fw, spider.boundary_set, aligned)
            report = verify_spider(out, residual_tol)
            if not report["ok"]:
                raise FrameworkError("lift", f"subdivided spider failed: {report}")
            return out

    # Interior of a face: lift x onto the face plane and raise it by half the
    # slack against all non-incident face planes.
    k = _locate_face(lift, x)
    a_k, b_k = lift.face_plane(k)
    z0 = float(a_k @ x + b_k)
    slack = np.inf
    for f in range(len(lift.lift_faces)):
        if f == k or f == lift.bottom_face_index():
            continue
        a_f, b_f = lift.face_plane(f)
        slack = min(slack, float(a_f @ x + b_f) - z0)
    if not np.isfinite(slack):
        slack = z0  # only the bottom face constrains; cap by the height itself
    eps = 0.5 * min(slack, z0) if slack > 0 else -1.0
    if eps <= 1e-9:
        raise FrameworkError("lift", "convexity margin too small to raise the point")
    new_vertex = np.array([x[0], x[1], z0 + eps])
    verts = np.vstack([lift.lift_vertices, new_vertex])
    new_idx = len(lift.lift_vertices)
    faces = []
    for f, cyc in enumerate(lift.lift_faces):
        if f == k:
            mlen = len(cyc)
            for t in range(mlen):
                faces.append((cyc[t], cyc[(t + 1) % mlen], new_idx))
        else:
            faces.append(cyc)
    new_holes = []
    for h in lift.hole_faces:
        shift = 0 if h < k else (len(lift.lift_faces[k]) - 1 if h > k else 0)
        new_holes.append(h + (len(lift.lift_faces[k]) - 1 if h > k else 0))
    raised = LiftedFace(lift.base, verts, tuple(faces), tuple(new_holes))
    return mc_project(raised, residual_tol)


def overlay_subdivide(
    s: SpiderTensegrity, t: PlanarTriangulation, tol: float = 1e-12
) -> SpiderTensegrity:
    """Split every spider edge at its crossings with the triangulation edges.

    A sub-segment of length l on a parent edge of length L and stress omega
    carries omega * L / l: endpoint forces are preserved exactly and the
    collinear subdivision points balance.  New points on the base boundary
    join the boundary set.
    """
    pts = [p.copy() for p in s.framework.points]

    def vertex_id(p: np.ndarray) -> int:
        for k, q in enumerate(pts):
            if np.linalg.norm(p - q) <= 1e-9:
                return k
        pts.append(p.copy())
        return len(pts) - 1

    tri_edges = [
        (t.vertices[i], t.vertices[j]) for i, j in t.framework_edges()
    ]
    new_edges: list[tuple[int, int]] = []
    new_values: list[float] = []
    for (i, j), omega in zip(s.framework.edges, s.stress.values):
        a, b = s.framework.points[i], s.framework.points[j]
        params = {0.0, 1.0}
        ab = b - a
        ab2 = float(np.dot(ab, ab))
        for c, d in tri_edges:
            if _segments_properly_cross(a, b, c, d):
                cd = d - c
                denom = float(ab[0] * cd[1] - ab[1] * cd[0])
                if abs(denom) <= tol:
                    raise FrameworkError(
                        "predicate", f"near-degenerate crossing on edge {(i, j)}"
                    )
                u = ((c[0] - a[0]) * cd[1] - (c[1] - a[1]) * cd[0]) / denom
                params.add(float(u))
            else:
                for q in (c, d):
                    if _point_segment_distance(q, a, b) <= 1e-9:
                        u = float(np.dot(q - a, ab)) / ab2
                        if tol < u < 1.0 - tol:
                            params.add(u)
        ordered = sorted(params)
        merged = [ordered[0]]
        for u in ordered[1:]:
            if u - merged[-1] > 1e-9:
                merged.append(u)
        ids = [vertex_id(a + u * ab) for u in merged]
        full = float(np.linalg.norm(ab))
        for (t0, t1), (u0, u1) in zip(zip(merged[:-1], merged[1:]), zip(ids[:-1], ids[1:])):
            piece = (t1 - t0) * full
            new_edges.append((min(u0, u1), max(u0, u1)))
            new_values.append(float(omega) * full / piece)

    coords = np.array(pts)
    fw = Framework(Graph(len(coords), tuple(new_edges)), Configuration(2, coords))
    aligned = np.zeros(len(fw.edges))
    lookup = {}
    for e, v in zip(new_edges, new_values):
        lookup[e] = v
    for k, e in enumerate(fw.edges):
        aligned[k] = lookup[e]

    boundary = set(s.boundary_set)
    base_pts = s.framework.points[sorted(s.boundary_set)]
    hull = _ccw_hull(base_pts)
    for k in range(len(coords)):
        if k in boundary:
            continue
        onb = any(
            _point_segment_distance(coords[k], hull[i], hull[(i + 1) % len(hull)]) <= 1e-9
            for i in range(len(hull))
        )
        if onb:
            boundary.add(k)
    return SpiderTensegrity(fw, frozenset(boundary), StressVector(aligned, fw.edges))


def _ccw_hull(points: np.ndarray) -> np.ndarray:
    """Andrew's monotone chain; input points need not be sorted."""
    pts = sorted(map(tuple, points))
    if len(pts) <= 2:
        return np.array(pts, dtype=float)

    def half(seq):
        out = []
        for p in seq:
            while len(out) >= 2 and _orient(out[-2], out[-1], p) <= EPS:
                out.pop()
            out.append(p)
        return out

    lower = half(pts)
    upper = half(reversed(pts))
    return np.array(lower[:-1] + upper[:-1], dtype=float)


def random_convex_lift(seed: int) -> LiftedFace:
    """Random strictly convex lift: convex-hull polygon base with a pyramid or
    frustum cap from a cone truncation (side faces exactly planar)."""
    rng = np.random.default_rng(seed)
    for _ in range(200):
        raw = rng.standard_normal((rng.integers(5, 12), 2))
        hull = _ccw_hull(raw)
        if len(hull) >= 3 and abs(_polygon_area(hull)) > 0.3:
            base = hull
            break
    else:
        raise FrameworkError("lift", "failed to sample a base polygon")
    m = len(base)
    centroid = base.mean(axis=0)
    interior = centroid + 0.3 * rng.standard_normal(2) * 0.2
    if not _point_in_polygon(interior, base):
        interior = centroid
    height = float(rng.uniform(0.5, 2.0))
    apex = np.array([interior[0], interior[1], height])
    bottom3 = np.hstack([base, np.zeros((m, 1))])
    if rng.random() < 0.4:
        verts = np.vstack([bottom3, apex])
        faces = [tuple(range(m))] + [(i, (i + 1) % m, m) for i in range(m)]
        return LiftedFace(base, verts, tuple(faces))
    tcut = float(rng.uniform(0.3, 0.75))
    top = bottom3 + tcut * (apex - bottom3)
    verts = np.vstack([bottom3, top])
    faces = [tuple(range(m)), tuple(range(2 * m - 1, m - 1, -1))]
    for i in range(m):
        j = (i + 1) % m
        faces.append((i, j, m + j, m + i))
    return LiftedFace(base, verts, tuple(faces), hole_faces=(1,))


def frustum_lift() -> LiftedFace:
    """Unit-square frustum: base [0,1]^2, top face [0.3,0.7]^2 at height 1."""
    base = np.array([[0, 0], [1, 0], [1, 1], [0, 1]], dtype=float)
    top = np.array([[0.3, 0.3], [0.7, 0.3], [0.7, 0.7], [0.3, 0.7]], dtype=float)
    verts = np.vstack(
        [np.hstack([base, np.zeros((4, 1))]), np.hstack([top, np.ones((4, 1))])]
    )
    faces = [
        (0, 1, 2, 3),
        (7, 6, 5, 4),
        (0, 1, 5, 4),
        (1, 2, 6, 5),
        (2, 3, 7, 6),
        (3, 0, 4, 7),
    ]
    return LiftedFace(base, verts, tuple(faces), hole_faces=(1,))


def lifted_face_to_dict(lift: LiftedFace) -> dict:
    return {
        "base": [[float(x) for x in p] for p in lift.base],
        "lift_vertices": [[float(x) for x in p] for p in lift.lift_vertices],
        "lift_faces": [list(f) for f in lift.lift_faces],
        "hole_faces": list(lift.hole_faces),
    }


def lifted_face_from_dict(doc: dict) -> LiftedFace:
    for key in ("base", "lift_vertices", "lift_faces"):
        if key not in doc:
            raise FrameworkError("schema", f"lifted face missing {key!r}")
    return LiftedFace(
        np.array(doc["base"], dtype=float),
        np.array(doc["lift_vertices"], dtype=float),
        tuple(tuple(f) for f in doc["lift_faces"]),
        tuple(doc.get("hole_faces", [])),
    )
