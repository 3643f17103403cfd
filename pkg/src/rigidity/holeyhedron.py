"""Holeyhedra: convex 3-polytopes with per-face lift-defined holes.

Validates the holeyhedron conditions on a given surface triangulation,
triangulates the holed surface with exact stitching along natural edges,
assembles the global prestress from per-face syntheses, and certifies
prestress stability in R^3.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .certificates import PDStressCertificate, TargetSubspace, VELOCITY
from .core import Configuration, Framework, FrameworkError, Graph
from .lift import (
    LiftedFace,
    lifted_face_from_dict,
    lifted_face_to_dict,
    mc_project,
    spider_for_point,
    validate_lifted_face,
    verify_spider,
)
from .linalg import (
    NONTRIVIAL_QUOTIENT,
    StressVector,
    equilibrium_residuals,
    flex_space,
    kernel_basis,
    stress_matrix_entries,
    trivial_flex_basis,
)
from .synthesis import SolverOptions, coordinate_target, synthesize_pd_stress
from .triangulate import (
    PlanarTriangulation,
    Region,
    _point_in_polygon,
    _point_segment_distance,
    _polygon_area,
    triangulate_region,
)

PLANE_TOL = 1e-9


@dataclass(frozen=True)
class Polytope3:
    """Convex polytope with outward-oriented cyclic faces."""

    vertices: np.ndarray
    faces: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        object.__setattr__(self, "vertices", np.asarray(self.vertices, dtype=float))
        object.__setattr__(
            self, "faces", tuple(tuple(int(v) for v in f) for f in self.faces)
        )
        self._validate()

    def _validate(self):
        v = self.vertices
        centroid = v.mean(axis=0)
        for k, face in enumerate(self.faces):
            pts = v[list(face)]
            if len(face) < 3:
                raise FrameworkError("polytope", f"face {k} has <3 vertices")
            normal = self.face_normal(k)
            heights = (v - pts[0]) @ normal
            if float(heights.max()) > 1e-7 * (1.0 + np.abs(v).max()):
                raise FrameworkError("polytope", f"face {k} is not a supporting plane")
            planar = (pts - pts[0]) @ normal
            if float(np.abs(planar).max()) > PLANE_TOL * (1.0 + np.abs(pts).max()):
                raise FrameworkError("polytope", f"face {k} not planar")
            # Convexity of the face polygon in its plane.
            frame = self.face_frame(k)
            poly = frame.to_2d(pts)
            m = len(poly)
            for i in range(m):
                a, b, c = poly[i], poly[(i + 1) % m], poly[(i + 2) % m]
                cross = (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])
                if cross < -1e-9:
                    raise FrameworkError("polytope", f"face {k} polygon not convex/CCW")
        ne = len(self.edges())
        euler = len(v) - ne + len(self.faces)
        if euler != 2:
            raise FrameworkError("polytope", f"Euler relation violated: V-E+F={euler}")

    def edges(self) -> list[tuple[int, int]]:
        out = set()
        for face in self.faces:
            m = len(face)
            for t in range(m):
                a, b = face[t], face[(t + 1) % m]
                out.add((min(a, b), max(a, b)))
        return sorted(out)

    def face_normal(self, k: int) -> np.ndarray:
        face = self.faces[k]
        pts = self.vertices[list(face)]
        normal = np.zeros(3)
        m = len(face)
        for i in range(m):  # Newell's formula
            a, b = pts[i], pts[(i + 1) % m]
            normal += np.cross(a, b)
        nn = float(np.linalg.norm(normal))
        if nn <= 1e-14:
            raise FrameworkError("polytope", f"face {k} degenerate")
        normal = normal / nn
        centroid = self.vertices.mean(axis=0)
        if float(np.dot(normal, pts[0] - centroid)) < 0:
            normal = -normal
        return normal

    def face_frame(self, k: int) -> "FaceFrame":
        face = self.faces[k]
        origin = self.vertices[face[0]]
        u = self.vertices[face[1]] - origin
        u = u / np.linalg.norm(u)
        normal = self.face_normal(k)
        v = np.cross(normal, u)
        return FaceFrame(origin, u, v, normal)

    def face_polygon_2d(self, k: int) -> np.ndarray:
        frame = self.face_frame(k)
        poly = frame.to_2d(self.vertices[list(self.faces[k])])
        if _polygon_area(poly) < 0:
            raise FrameworkError("polytope", f"face {k} traversal is clockwise from outside")
        return poly


@dataclass(frozen=True)
class FaceFrame:
    origin: np.ndarray
    u: np.ndarray
    v: np.ndarray
    normal: np.ndarray

    def to_2d(self, pts3: np.ndarray) -> np.ndarray:
        rel = np.atleast_2d(pts3) - self.origin
        return np.stack([rel @ self.u, rel @ self.v], axis=-1)

    def to_3d(self, pts2: np.ndarray) -> np.ndarray:
        pts2 = np.atleast_2d(pts2)
        return self.origin + np.outer(pts2[:, 0], self.u) + np.outer(pts2[:, 1], self.v)


@dataclass(frozen=True)
class Holeyhedron:
    """Polytope plus per-face lifts; a flat lift means a hole-free face."""

    polytope: Polytope3
    face_lifts: dict[int, LiftedFace] = field(default_factory=dict)

    def lift_for(self, k: int) -> LiftedFace:
        if k in self.face_lifts:
            return self.face_lifts[k]
        return LiftedFace.flat(self.polytope.face_polygon_2d(k))

    def hole_polygons_2d(self, k: int) -> list[np.ndarray]:
        return self.lift_for(k).hole_polygons()


@dataclass
class FaceTriangulationData:
    face_index: int
    planar: PlanarTriangulation          # in the face frame
    global_ids: list[int]                # local vertex -> global vertex
    skeleton_local: frozenset[int]       # locals on P^(1) (face boundary chain)


@dataclass
class SurfaceTriangulation:
    framework: Framework
    faces: list[FaceTriangulationData]
    skeleton_vertices: frozenset[int]
    vertex_keys: list[tuple] = field(default_factory=list)

    def face_assignment(self) -> list[list[int]]:
        """Per-face triangle lists in global vertex ids."""
        out = []
        for fd in self.faces:
            out.append(
                [[fd.global_ids[v] for v in tri] for tri in fd.planar.triangles.tolist()]
            )
        return out


def _edge_key(i: int, j: int) -> tuple[int, int]:
    return (min(i, j), max(i, j))


def triangulate_surface(
    h: Holeyhedron,
    steiner: dict[int, object] | None = None,
    edge_subdivisions: dict[tuple[int, int], list[float]] | None = None,
    seed: int = 0,
) -> SurfaceTriangulation:
    """Per-face constrained triangulations stitched along natural edges.

    Shared subdivision points are generated once per natural edge (symbolic
    keys), so stitching is exact by construction.  steiner maps face index to
    "center", an integer count of seeded random points, or explicit 2-D
    points in the face frame.
    """
    steiner = dict(steiner or {})
    edge_subdivisions = {
        _edge_key(*e): sorted(float(t) for t in ts)
        for e, ts in (edge_subdivisions or {}).items()
    }
    poly = h.polytope
    coords: list[np.ndarray] = []
    keys: list[tuple] = []
    index: dict[tuple, int] = {}

    def global_id(key: tuple, pos3: np.ndarray) -> int:
        if key in index:
            return index[key]
        index[key] = len(coords)
        coords.append(np.asarray(pos3, dtype=float))
        keys.append(key)
        return index[key]

    for i in range(len(poly.vertices)):
        global_id(("v", i), poly.vertices[i])

    all_edges: set[tuple[int, int]] = set()
    face_data: list[FaceTriangulationData] = []
    for k in range(len(poly.faces)):
        face = poly.faces[k]
        frame = poly.face_frame(k)
        lift = h.lift_for(k)
        m = len(face)
        chain_pts: list[np.ndarray] = []
        chain_keys: list[tuple] = []
        for t in range(m):
            a, b = face[t], face[(t + 1) % m]
            chain_pts.append(poly.vertices[a])
            chain_keys.append(("v", a))
            key = _edge_key(a, b)
            params = edge_subdivisions.get(key, [])
            ordered = params if a < b else [1.0 - s for s in reversed(params)]
            for s in ordered:
                i0, j0 = key
                frac = s if a < b else 1.0 - s
                # position measured along the canonical orientation
                pos = (1.0 - s) * poly.vertices[i0] + s * poly.vertices[j0]
                chain_pts.append(pos)
                chain_keys.append(("e", i0, j0, s))
        outer2d = frame.to_2d(np.array(chain_pts))
        holes = tuple(np.asarray(hp, dtype=float) for hp in h.hole_polygons_2d(k))
        region = Region(outer2d, holes)

        st = steiner.get(k)
        st_arg: object = None
        if st == "center":
            st_arg = np.array([region.outer.mean(axis=0)])
        elif st is not None:
            st_arg = st
        tri = triangulate_region(region, steiner=st_arg, seed=seed + 104729 * k)

        boundary_n = len(chain_pts)
        gids: list[int] = []
        skeleton_local = set()
        hole_offset = boundary_n
        for local in range(len(tri.vertices)):
            if local < boundary_n:
                gid = global_id(chain_keys[local], chain_pts[local])
                skeleton_local.add(local)
            elif local < boundary_n + sum(len(hp) for hp in holes):
                # hole chain vertices, per-face ownership
                gid = global_id(
                    ("h", k, local - hole_offset),
                    frame.to_3d(tri.vertices[local])[0],
                )
            else:
                gid = global_id(("f", k, local), frame.to_3d(tri.vertices[local])[0])
            gids.append(gid)
        for (a, b) in tri.framework_edges():
            all_edges.add(_edge_key(gids[a], gids[b]))
        face_data.append(
            FaceTriangulationData(k, tri, gids, frozenset(skeleton_local))
        )

    framework = Framework(
        Graph(len(coords), tuple(sorted(all_edges))),
        Configuration(3, np.array(coords)),
    )
    skeleton = frozenset(
        i for i, key in enumerate(keys) if key[0] in ("v", "e")
    )
    return SurfaceTriangulation(framework, face_data, skeleton, keys)


# ---------------------------------------------------------------------------
# Validation of Definition (a)/(b)/(c)


def _face_restriction(
    t: SurfaceTriangulation, poly: Polytope3, k: int
) -> tuple[list[int], list[tuple[int, int]], np.ndarray]:
    """Global vertices/edges lying in face k's plane, with 2-D coordinates."""
    frame = poly.face_frame(k)
    pts = t.framework.points
    heights = (pts - frame.origin) @ frame.normal
    scale = 1.0 + float(np.abs(pts).max())
    in_plane = [i for i in range(len(pts)) if abs(heights[i]) <= PLANE_TOL * scale]
    chosen = set(in_plane)
    edges = [
        (i, j) for (i, j) in t.framework.edges if i in chosen and j in chosen
    ]
    coords = frame.to_2d(pts[in_plane])
    return in_plane, edges, coords


def _fit_trivial_2d(coords: np.ndarray, flex: np.ndarray) -> float:
    """Residual of the best planar rigid-motion fit on the given vertices."""
    n = len(coords)
    design = np.zeros((2 * n, 3))
    design[0::2, 0] = 1.0
    design[1::2, 1] = 1.0
    design[0::2, 2] = -coords[:, 1]
    design[1::2, 2] = coords[:, 0]
    rhs = flex.reshape(-1)
    sol, *_ = np.linalg.lstsq(design, rhs, rcond=None)
    return float(np.linalg.norm(design @ sol - rhs))


def validate_holeyhedron(
    h: Holeyhedron,
    t: SurfaceTriangulation,
    opts: SolverOptions = SolverOptions(),
    retriangulation_seeds: int = 0,
    probe_count: int = 4,
) -> dict:
    """Report on the three holeyhedron conditions for this triangulation.

    (a) hole placement keeps the one-skeleton inside the surface, (b) the
    in-plane flex space of every face restriction is trivial on skeleton
    vertices, (c) spider witnesses exist at probe points of every face.
    A flange warning lists natural edges that border a hole on either side.
    """
    poly = h.polytope
    report: dict = {"a": [], "b": [], "c": [], "warnings": [], "per_face": {}}

    # --- (a): hole placement against the face boundary -----------------
    for k in range(len(poly.faces)):
        base = poly.face_polygon_2d(k)
        m = len(base)
        for hole in h.hole_polygons_2d(k):
            hm = len(hole)
            for idx in range(hm):
                pt = hole[idx]
                at_vertex = any(np.linalg.norm(pt - bv) <= 1e-9 for bv in base)
                on_edge = any(
                    _point_segment_distance(pt, base[i], base[(i + 1) % m]) <= 1e-9
                    for i in range(m)
                )
                if on_edge and not at_vertex:
                    report["a"].append(
                        f"face {k}: hole vertex {pt.tolist()} interior to a natural edge"
                    )
                mid = 0.5 * (pt + hole[(idx + 1) % hm])
                mid_on_edge = any(
                    _point_segment_distance(mid, base[i], base[(i + 1) % m]) <= 1e-9
                    for i in range(m)
                )
                if mid_on_edge:
                    report["a"].append(
                        f"face {k}: hole edge lies along a natural edge"
                    )
    # Flange warning: any hole side touching the one-skeleton.
    for k in range(len(poly.faces)):
        base = poly.face_polygon_2d(k)
        if any(
            _point_segment_distance(pt, base[i], base[(i + 1) % len(base)]) <= 1e-6
            for hole in h.hole_polygons_2d(k)
            for pt in hole
            for i in range(len(base))
        ):
            report["warnings"].append(
                f"face {k}: hole touches a natural edge; flanges on both sides "
                "of each natural edge are recommended for all-triangulation stability"
            )

    # --- (b): in-plane rigidity on the skeleton ------------------------
    for k in range(len(poly.faces)):
        verts, edges, coords = _face_restriction(t, poly, k)
        local = {g: i for i, g in enumerate(verts)}
        fw = Framework(
            Graph(len(verts), tuple((local[i], local[j]) for i, j in edges)),
            Configuration(2, coords),
        )
        basis = flex_space(fw)
        skel_local = [local[g] for g in verts if g in t.skeleton_vertices]
        sk_coords = coords[skel_local]
        bad = 0.0
        for col in range(basis.dim):
            v = basis.vectors[:, col].reshape(len(verts), 2)
            resid = _fit_trivial_2d(sk_coords, v[skel_local])
            bad = max(bad, resid)
        ok = bad <= 1e-7
        report["per_face"].setdefault(k, {})["b_residual"] = bad
        if not ok:
            report["b"].append(
                f"face {k}: in-plane flex nontrivial on skeleton (residual {bad:.3e})"
            )

    # --- (b) battery: random re-triangulations -------------------------
    rng = np.random.default_rng(opts.seed)
    for trial in range(retriangulation_seeds):
        try:
            t2 = triangulate_surface(
                h,
                steiner={k: 2 for k in range(len(poly.faces))},
                seed=int(rng.integers(0, 2**31)),
            )
        except FrameworkError:
            report["warnings"].append("re-triangulation battery skipped a seed")
            continue
        for k in range(len(poly.faces)):
            verts, edges, coords = _face_restriction(t2, poly, k)
            local = {g: i for i, g in enumerate(verts)}
            fw = Framework(
                Graph(len(verts), tuple((local[i], local[j]) for i, j in edges)),
                Configuration(2, coords),
            )
            basis = flex_space(fw)
            skel_local = [local[g] for g in verts if g in t2.skeleton_vertices]
            for col in range(basis.dim):
                v = basis.vectors[:, col].reshape(len(verts), 2)
                if _fit_trivial_2d(coords[skel_local], v[skel_local]) > 1e-7:
                    report["b"].append(
                        f"face {k}: re-triangulation seed trial {trial} violates (b)"
                    )
                    break

    # --- (c): spider witnesses ------------------------------------------
    for k in range(len(poly.faces)):
        lift = h.lift_for(k)
        vreport = validate_lifted_face(lift)
        if not vreport["ok"]:
            report["c"].append(f"face {k}: lift invalid: {vreport['issues']}")
        base = poly.face_polygon_2d(k)
        frame = poly.face_frame(k)
        probes: list[np.ndarray] = []
        fd = t.faces[k]
        for local in range(len(fd.planar.vertices)):
            if local in fd.skeleton_local:
                continue
            probes.append(fd.planar.vertices[local])
        # Hole-boundary midpoints stress the placement rules.
        for hole in h.hole_polygons_2d(k):
            hm = len(hole)
            for i in range(hm):
                probes.append(0.5 * (hole[i] + hole[(i + 1) % hm]))
        rng_k = np.random.default_rng(opts.seed + 7 * k)
        region = Region(base, tuple(h.hole_polygons_2d(k)))
        guard = 0
        while len(probes) < probe_count and guard < 200:
            guard += 1
            lo, hi = base.min(axis=0), base.max(axis=0)
            cand = lo + rng_k.random(2) * (hi - lo)
            boundary_dist = min(
                _point_segment_distance(cand, base[i], base[(i + 1) % len(base)])
                for i in range(len(base))
            )
            if region.contains(cand) and boundary_dist > 1e-3:
                probes.append(cand)
        failures = []
        for pt in probes:
            try:
                spider = spider_for_point(lift, pt)
                rep = verify_spider(spider)
                if not rep["ok"]:
                    failures.append((pt.tolist(), "verify failed"))
            except FrameworkError as exc:
                failures.append((np.asarray(pt).tolist(), str(exc)))
        report["per_face"].setdefault(k, {})["c_probes"] = len(probes)
        if failures:
            report["c"].append(f"face {k}: spider probes failed: {failures[:3]}")

    report["ok"] = not (report["a"] or report["b"] or report["c"])
    return report


# ---------------------------------------------------------------------------
# Stress assembly and the 3-D certificate


def assemble_face_stresses(
    h: Holeyhedron,
    t: SurfaceTriangulation,
    opts: SolverOptions = SolverOptions(),
) -> tuple[StressVector, dict]:
    """Per-face PD stresses on C(1, interior-of-face), summed globally.

    Raises naming the face if any per-face synthesis fails; the summed vector
    is verified to be a global 3-D equilibrium stress.
    """
    fw = t.framework
    edge_index = fw.graph.edge_index()
    total = np.zeros(fw.graph.edge_count)
    info: dict = {"faces": {}}
    for fd in t.faces:
        k = fd.face_index
        tri = fd.planar
        local_edges = tri.framework_edges()
        lf = Framework(
            Graph(len(tri.vertices), tuple(local_edges)),
            Configuration(2, tri.vertices),
        )
        pins = sorted(fd.skeleton_local)
        target = coordinate_target(lf, pins)
        result = synthesize_pd_stress(lf, target, opts)
        if not isinstance(result, PDStressCertificate):
            raise FrameworkError(
                "face_synthesis",
                f"face {k}: no PD stress on its interior vertices "
                f"({type(result).__name__}); holeyhedron validation may be too weak",
            )
        info["faces"][k] = {
            "lambda_min": result.lambda_min,
            "vacuous": result.vacuous,
            "interior_dim": target.dim,
        }
        for (a, b), omega in zip(lf.edges, result.stress):
            ge = _edge_key(fd.global_ids[a], fd.global_ids[b])
            total[edge_index[ge]] += float(omega)
    sv = StressVector(total, fw.edges)
    resid = float(equilibrium_residuals(fw, sv).max())
    scale = (float(np.abs(total).max()) + 1.0) * (float(np.abs(fw.points).max()) + 1.0)
    info["global_equilibrium_residual"] = resid
    if resid > 1e-8 * scale:
        raise FrameworkError("assembly", f"assembled stress residual {resid} too large")
    return sv, info


def certify_prestress_3d(
    h: Holeyhedron,
    t: SurfaceTriangulation,
    opts: SolverOptions = SolverOptions(),
):
    """Theorem-style 3-D prestress certificate for a triangulated holeyhedron.

    First verifies numerically that every flex is trivial on the skeleton
    (else a non-holeyhedron input or numerics are flagged), then checks the
    assembled stress energy on the nontrivial flex quotient.
    """
    omega, info = assemble_face_stresses(h, t, opts)
    fw = t.framework
    quotient = flex_space(fw, NONTRIVIAL_QUOTIENT)
    skel = sorted(t.skeleton_vertices)
    pts = fw.points
    triv = trivial_flex_basis(fw.configuration)
    # Restriction of the trivial space to skeleton coordinates.
    rows = []
    for i in skel:
        rows.extend([3 * i, 3 * i + 1, 3 * i + 2])
    triv_sk = triv.vectors[rows, :]
    for col in range(quotient.dim):
        v = quotient.vectors[:, col]
        v_sk = v[rows]
        sol, *_ = np.linalg.lstsq(triv_sk, v_sk, rcond=None)
        resid = float(np.linalg.norm(triv_sk @ sol - v_sk))
        if resid > 1e-7:
            return {
                "verdict": "diagnostic",
                "stage": "skeleton_triviality",
                "residual": resid,
                "flex_index": col,
                "detail": "a flex is nontrivial on the one-skeleton; "
                "input is not a holeyhedron or numerics failed",
            }
    omega_mat = stress_matrix_entries(fw.n, fw.edges, omega.values)
    tdim = quotient.dim
    reduced = np.zeros((tdim, tdim))
    cols = [quotient.vectors[:, a].reshape(fw.n, 3) for a in range(tdim)]
    for a in range(tdim):
        oa = omega_mat @ cols[a]
        for b in range(a, tdim):
            val = float(np.sum(oa * cols[b]))
            reduced[a, b] = reduced[b, a] = val
    if tdim == 0:
        lam = 0.0
        vacuous = True
    else:
        lam = float(np.linalg.eigvalsh(reduced)[0])
        vacuous = False
    scale = float(np.linalg.norm(omega_mat, 2)) + 1e-300
    if not vacuous and lam <= opts.pd_threshold * scale:
        eigvals, eigvecs = np.linalg.eigh(reduced)
        return {
            "verdict": "diagnostic",
            "stage": "energy",
            "lambda_min": lam,
            "offending_flex": (quotient.vectors @ eigvecs[:, 0]).reshape(fw.n, 3),
            "detail": "assembled stress energy not PD on the flex quotient",
        }
    target = TargetSubspace(VELOCITY, quotient.vectors, 3, frozenset(), NONTRIVIAL_QUOTIENT)
    cert = PDStressCertificate(
        omega.values,
        target,
        lam,
        float(equilibrium_residuals(fw, omega).max()),
        vacuous=vacuous,
    )
    return {"verdict": "certificate", "certificate": cert, "assembly": info}


# ---------------------------------------------------------------------------
# Fixtures and serialization

CUBE_VERTS = np.array(
    [
        [-1, -1, -1], [-1, -1, 1], [-1, 1, -1], [-1, 1, 1],
        [1, -1, -1], [1, -1, 1], [1, 1, -1], [1, 1, 1],
    ],
    dtype=float,
)
CUBE_FACES_ORIENTED = (
    (0, 1, 3, 2),
    (4, 6, 7, 5),
    (0, 4, 5, 1),
    (2, 3, 7, 6),
    (0, 2, 6, 4),
    (1, 5, 7, 3),
)

TETRA_VERTS = np.array(
    [[0, 0, 0], [1, 0, 0], [0.5, 0.9, 0], [0.5, 0.3, 0.8]], dtype=float
)
TETRA_FACES = ((0, 2, 1), (0, 1, 3), (1, 2, 3), (2, 0, 3))


def _frustum_over(base: np.ndarray, scale: float = 0.4, height: float = 1.0) -> LiftedFace:
    """Cone-truncation frustum over a convex polygon (planar side faces)."""
    m = len(base)
    center = base.mean(axis=0)
    tcut = 1.0 - scale
    apex_h = height / tcut
    bottom = np.hstack([base, np.zeros((m, 1))])
    apex = np.array([center[0], center[1], apex_h])
    top = bottom + tcut * (apex - bottom)
    verts = np.vstack([bottom, top])
    faces = [tuple(range(m)), tuple(range(2 * m - 1, m - 1, -1))]
    for i in range(m):
        j = (i + 1) % m
        faces.append((i, j, m + j, m + i))
    return LiftedFace(base, verts, tuple(faces), hole_faces=(1,))


def make_holeyhedron_example(name: str) -> tuple[Holeyhedron, SurfaceTriangulation]:
    """Catalog of holeyhedron fixtures with matched surface triangulations."""
    if name == "cube":
        h = Holeyhedron(Polytope3(CUBE_VERTS, CUBE_FACES_ORIENTED))
        t = triangulate_surface(h, steiner={k: "center" for k in range(6)})
        return h, t
    if name == "cube_plain":
        h = Holeyhedron(Polytope3(CUBE_VERTS, CUBE_FACES_ORIENTED))
        t = triangulate_surface(h)
        return h, t
    if name == "cube_frustum_hole":
        poly = Polytope3(CUBE_VERTS, CUBE_FACES_ORIENTED)
        base = poly.face_polygon_2d(5)
        h = Holeyhedron(poly, {5: _frustum_over(base)})
        t = triangulate_surface(h, steiner={k: "center" for k in range(5)})
        return h, t
    if name == "tetra_slit":
        return _tetra_slit()
    if name == "tetra_fig7":
        return _tetra_fig7()
    raise FrameworkError("unknown_fixture", f"no holeyhedron fixture named {name!r}")


def _tetra_slit() -> tuple[Holeyhedron, SurfaceTriangulation]:
    """Slit hole covering the whole natural edge A-B of the bottom face; the
    edge is subdivided at its midpoint.  Violates (b)."""
    poly = Polytope3(TETRA_VERTS, TETRA_FACES)
    # Bottom face (0, 2, 1) in its frame; hole trapezoid with the long side on
    # the natural edge A-B.
    frame = poly.face_frame(0)
    base = poly.face_polygon_2d(0)
    hole3 = np.array(
        [[0, 0, 0], [1, 0, 0], [0.8, 0.1, 0], [0.2, 0.1, 0]], dtype=float
    )
    hole2 = frame.to_2d(hole3)
    # Lift with a vertical slab over the hole: intentionally invalid as a
    # spider lift; used only as a negative fixture.
    lift_verts = np.vstack(
        [np.hstack([base, np.zeros((3, 1))]), np.hstack([hole2, 0.2 * np.ones((4, 1))])]
    )
    lift = LiftedFace(
        base,
        lift_verts,
        ((0, 1, 2), (3, 4, 5, 6), (0, 3, 6), (0, 1, 4, 3), (1, 5, 4), (1, 2, 6, 5)),
        hole_faces=(1,),
    )
    h = Holeyhedron(poly, {0: lift})

    # Hand-stitched triangulation: pentagon part of the bottom face plus the
    # fan over the subdivided edge on face ABD.
    coords: list[np.ndarray] = [v for v in TETRA_VERTS]
    keys: list[tuple] = [("v", i) for i in range(4)]

    def add(key, pos):
        keys.append(key)
        coords.append(np.asarray(pos, dtype=float))
        return len(coords) - 1

    z = add(("e", 0, 1, 0.5), [0.5, 0, 0])
    a2 = add(("h", 0, 0), [0.2, 0.1, 0])
    b2 = add(("h", 0, 1), [0.8, 0.1, 0])

    def planar(face_k, tris, gids):
        # Hand-built planar triangulation; region metadata is a placeholder.
        fr = poly.face_frame(face_k)
        pts2 = fr.to_2d(np.array([coords[g] for g in gids]))
        fixed = []
        for tri in np.array(tris, dtype=int):
            a, b, c = pts2[tri]
            area = (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])
            fixed.append(tri if area > 0 else tri[::-1])
        return PlanarTriangulation(
            pts2,
            np.array(fixed, dtype=int),
            frozenset(),
            Region(np.array([[0, 0], [1, 0], [0, 1]], float)),
        )

    faces = []
    # Face 0 (bottom, holed): pentagon A, A2, B2, B, C -> locals
    g0 = [0, a2, b2, 1, 2]
    tris0 = [[0, 1, 4], [1, 2, 4], [2, 3, 4]]  # (A,A2,C),(A2,B2,C),(B2,B,C)
    skel0 = frozenset({0, 3, 4})
    faces.append(FaceTriangulationData(0, planar(0, tris0, g0), g0, skel0))
    # Face 1 (A,B,D) with z subdividing A-B: fan from D
    g1 = [0, z, 1, 3]
    tris1 = [[0, 1, 3], [1, 2, 3]]
    faces.append(FaceTriangulationData(1, planar(1, tris1, g1), g1, frozenset({0, 1, 2, 3})))
    # Faces 2,3: natural triangles
    g2 = [1, 2, 3]
    faces.append(FaceTriangulationData(2, planar(2, [[0, 1, 2]], g2), g2, frozenset({0, 1, 2})))
    g3 = [2, 0, 3]
    faces.append(FaceTriangulationData(3, planar(3, [[0, 1, 2]], g3), g3, frozenset({0, 1, 2})))

    edges = set()
    for fd in faces:
        for tri in fd.planar.triangles:
            for aa, bb in ((tri[0], tri[1]), (tri[1], tri[2]), (tri[0], tri[2])):
                edges.add(_edge_key(fd.global_ids[aa], fd.global_ids[bb]))
    fw = Framework(
        Graph(len(coords), tuple(sorted(edges))), Configuration(3, np.array(coords))
    )
    skeleton = frozenset(i for i, key in enumerate(keys) if key[0] in ("v", "e"))
    return h, SurfaceTriangulation(fw, faces, skeleton, keys)


def _tetra_fig7() -> tuple[Holeyhedron, SurfaceTriangulation]:
    """Hole with one vertex interior to a natural edge: the hole side [x, y]
    admits no spider, so (c) fails."""
    poly = Polytope3(TETRA_VERTS, TETRA_FACES)
    frame = poly.face_frame(0)
    base = poly.face_polygon_2d(0)
    # Hole triangle with vertex x on the interior of natural edge A-B.
    hole3 = np.array([[0.4, 0.0, 0], [0.65, 0.25, 0], [0.3, 0.3, 0]], dtype=float)
    hole2 = frame.to_2d(hole3)
    lift_verts = np.vstack(
        [np.hstack([base, np.zeros((3, 1))]), np.hstack([hole2, 0.25 * np.ones((3, 1))])]
    )
    lift = LiftedFace(
        base,
        lift_verts,
        ((0, 1, 2), (3, 4, 5), (0, 1, 4, 3), (1, 2, 5, 4), (2, 0, 3, 5)),
        hole_faces=(1,),
    )
    h = Holeyhedron(poly, {0: lift})
    t = _fig7_triangulation(h)
    return h, t


def _fig7_triangulation(h: Holeyhedron) -> SurfaceTriangulation:
    poly = h.polytope
    coords: list[np.ndarray] = [v for v in TETRA_VERTS]
    keys: list[tuple] = [("v", i) for i in range(4)]

    def add(key, pos):
        keys.append(key)
        coords.append(np.asarray(pos, dtype=float))
        return len(coords) - 1

    x = add(("e", 0, 1, 0.4), [0.4, 0.0, 0.0])
    y = add(("h", 0, 1), [0.65, 0.25, 0.0])
    w = add(("h", 0, 2), [0.3, 0.3, 0.0])

    def planar(face_k, tris, gids):
        fr = poly.face_frame(face_k)
        pts2 = fr.to_2d(np.array([coords[g] for g in gids]))
        fixed = []
        for tri in np.array(tris, dtype=int):
            a, b, c = pts2[tri]
            area = (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])
            fixed.append(tri if area > 0 else tri[::-1])
        return PlanarTriangulation(
            pts2,
            np.array(fixed, dtype=int),
            frozenset(),
            Region(np.array([[0, 0], [1, 0], [0, 1]], float)),
        )

    faces = []
    # Bottom face: A, B, C, x on AB, hole (x, y, w).
    g0 = [0, x, 1, 2, y, w]
    tris0 = [[0, 1, 5], [0, 5, 3], [5, 4, 3], [1, 4, 5], [1, 2, 4], [2, 3, 4]]
    faces.append(FaceTriangulationData(0, planar(0, tris0, g0), g0, frozenset({0, 1, 2, 3})))
    g1 = [0, x, 1, 3]
    faces.append(FaceTriangulationData(1, planar(1, [[0, 1, 3], [1, 2, 3]], g1), g1, frozenset({0, 1, 2, 3})))
    g2 = [1, 2, 3]
    faces.append(FaceTriangulationData(2, planar(2, [[0, 1, 2]], g2), g2, frozenset({0, 1, 2})))
    g3 = [2, 0, 3]
    faces.append(FaceTriangulationData(3, planar(3, [[0, 1, 2]], g3), g3, frozenset({0, 1, 2})))

    edges = set()
    for fd in faces:
        for tri in fd.planar.triangles:
            for aa, bb in ((tri[0], tri[1]), (tri[1], tri[2]), (tri[0], tri[2])):
                edges.add(_edge_key(fd.global_ids[aa], fd.global_ids[bb]))
    fw = Framework(
        Graph(len(coords), tuple(sorted(edges))), Configuration(3, np.array(coords))
    )
    skeleton = frozenset(i for i, key in enumerate(keys) if key[0] in ("v", "e"))
    return SurfaceTriangulation(fw, faces, skeleton, keys)


def holeyhedron_to_dict(h: Holeyhedron) -> dict:
    return {
        "polytope": {
            "vertices": [[float(x) for x in v] for v in h.polytope.vertices],
            "faces": [list(f) for f in h.polytope.faces],
        },
        "face_lifts": {
            str(k): lifted_face_to_dict(lift) for k, lift in h.face_lifts.items()
        },
    }


def holeyhedron_from_dict(doc: dict) -> Holeyhedron:
    if "polytope" not in doc:
        raise FrameworkError("schema", "holeyhedron missing polytope")
    poly = Polytope3(
        np.array(doc["polytope"]["vertices"], dtype=float),
        tuple(tuple(f) for f in doc["polytope"]["faces"]),
    )
    lifts = {
        int(k): lifted_face_from_dict(v) for k, v in doc.get("face_lifts", {}).items()
    }
    return Holeyhedron(poly, lifts)
