"""Canonical data model: graphs, configurations, frameworks, pins, member signs.

All types are immutable after validation and safe to share across threads.
Coordinates are 64-bit floats; there is no exact-rational mode, so every
geometric decision elsewhere carries an explicit tolerance.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

# Relative singular-value threshold used for every rank decision in the
# package.  Desk-scale fixtures are O(1)-conditioned, so one knob suffices.
DEFAULT_TOL = 1e-9

BAR = "bar"
CABLE = "cable"
STRUT = "strut"


class FrameworkError(ValueError):
    """Input or construction error with a stable diagnostic code."""

    def __init__(self, code: str, message: str):
        super().__init__(f"{code}: {message}")
        self.code = code


def _check(cond: bool, code: str, message: str) -> None:
    if not cond:
        raise FrameworkError(code, message)


@dataclass(frozen=True)
class Graph:
    """Undirected graph on vertices 0..n-1 with a canonical edge order.

    Edges are stored sorted (i < j, lexicographic); construction rejects
    self-loops, duplicates and out-of-range indices.
    """

    vertex_count: int
    edges: tuple[tuple[int, int], ...]

    def __post_init__(self):
        _check(self.vertex_count >= 1, "schema", "vertex_count must be positive")
        seen = set()
        canon = []
        for e in self.edges:
            _check(len(e) == 2, "schema", f"edge {e!r} is not a pair")
            i, j = int(e[0]), int(e[1])
            _check(i != j, "self_loop", f"edge ({i},{j}) is a self-loop")
            _check(
                0 <= i < self.vertex_count and 0 <= j < self.vertex_count,
                "index_range",
                f"edge ({i},{j}) out of range for n={self.vertex_count}",
            )
            key = (min(i, j), max(i, j))
            _check(key not in seen, "duplicate_edge", f"edge {key} listed twice")
            seen.add(key)
            canon.append(key)
        object.__setattr__(self, "edges", tuple(sorted(canon)))

    @property
    def edge_count(self) -> int:
        return len(self.edges)

    def edge_index(self) -> dict[tuple[int, int], int]:
        return {e: k for k, e in enumerate(self.edges)}

    def has_edge(self, i: int, j: int) -> bool:
        return (min(i, j), max(i, j)) in set(self.edges)

    def non_edges(self) -> list[tuple[int, int]]:
        present = set(self.edges)
        n = self.vertex_count
        return [
            (i, j)
            for i in range(n)
            for j in range(i + 1, n)
            if (i, j) not in present
        ]


@dataclass(frozen=True)
class Configuration:
    """n points in R^d.  The affine-span dimension is computed once and cached."""

    dimension: int
    points: np.ndarray  # (n, d)
    tol: float = DEFAULT_TOL
    span_dim: int = field(init=False)

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float)
        _check(pts.ndim == 2, "schema", "points must be a 2-d array")
        _check(
            pts.shape[1] == self.dimension,
            "dimension_mismatch",
            f"points have {pts.shape[1]} coordinates, expected {self.dimension}",
        )
        _check(np.all(np.isfinite(pts)), "schema", "points contain NaN/Inf")
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "span_dim", self._affine_span_dim())
        self.points.setflags(write=False)

    def _affine_span_dim(self) -> int:
        centered = self.points - self.points.mean(axis=0)
        if centered.shape[0] == 1:
            return 0
        s = np.linalg.svd(centered, compute_uv=False)
        if s.size == 0 or s[0] == 0.0:
            return 0
        return int(np.sum(s > self.tol * s[0]))

    @property
    def count(self) -> int:
        return self.points.shape[0]

    def span_frame(self) -> tuple[np.ndarray, np.ndarray]:
        """Orthonormal basis (d, k) of the affine span plus the centroid."""
        centroid = self.points.mean(axis=0)
        centered = self.points - centroid
        _, s, vt = np.linalg.svd(centered, full_matrices=False)
        k = self.span_dim
        return vt[:k].T, centroid

    def span_coordinates(self) -> np.ndarray:
        """Points expressed in span-frame coordinates, shape (n, span_dim)."""
        frame, centroid = self.span_frame()
        return (self.points - centroid) @ frame


@dataclass(frozen=True)
class Framework:
    """Graph + configuration, optional first-order pins and member signs."""

    graph: Graph
    configuration: Configuration
    pins: frozenset[int] = frozenset()
    members: tuple[str, ...] | None = None  # per-edge, canonical order

    def __post_init__(self):
        n = self.graph.vertex_count
        _check(
            self.configuration.count == n,
            "dimension_mismatch",
            f"{self.configuration.count} points for {n} vertices",
        )
        pins = frozenset(int(i) for i in self.pins)
        _check(
            all(0 <= i < n for i in pins),
            "index_range",
            "pinned vertex out of range",
        )
        object.__setattr__(self, "pins", pins)
        if self.members is not None:
            _check(
                len(self.members) == self.graph.edge_count,
                "schema",
                "member tags do not match edge count",
            )
            _check(
                all(m in (BAR, CABLE, STRUT) for m in self.members),
                "schema",
                "member tags must be bar/cable/strut",
            )
            object.__setattr__(self, "members", tuple(self.members))
        for (i, j) in self.graph.edges:
            d = self.configuration.points[i] - self.configuration.points[j]
            _check(
                float(np.linalg.norm(d)) > 0.0,
                "zero_length",
                f"edge ({i},{j}) has zero length",
            )

    @property
    def n(self) -> int:
        return self.graph.vertex_count

    @property
    def dimension(self) -> int:
        return self.configuration.dimension

    @property
    def points(self) -> np.ndarray:
        return self.configuration.points

    @property
    def edges(self) -> tuple[tuple[int, int], ...]:
        return self.graph.edges

    def edge_vectors(self) -> np.ndarray:
        p = self.points
        return np.array([p[i] - p[j] for i, j in self.edges])

    def edge_lengths(self) -> np.ndarray:
        return np.linalg.norm(self.edge_vectors(), axis=1)

    def with_edges_added(self, new_edges) -> "Framework":
        edges = list(self.graph.edges) + [tuple(e) for e in new_edges]
        return Framework(
            Graph(self.n, tuple(edges)), self.configuration, self.pins
        )


@dataclass(frozen=True)
class TrivialFlex:
    """Infinitesimal rigid motion p'_i = A p_i + b with A skew-symmetric."""

    skew: np.ndarray  # (d, d), strictly upper triangle is authoritative
    translation: np.ndarray  # (d,)

    def __post_init__(self):
        a = np.asarray(self.skew, dtype=float)
        b = np.asarray(self.translation, dtype=float)
        _check(a.ndim == 2 and a.shape[0] == a.shape[1], "schema", "skew must be square")
        _check(b.shape == (a.shape[0],), "dimension_mismatch", "translation size mismatch")
        # Rebuild from the strict upper triangle so skew^T == -skew exactly.
        upper = np.triu(a, k=1)
        object.__setattr__(self, "skew", upper - upper.T)
        object.__setattr__(self, "translation", b)
        self.skew.setflags(write=False)
        self.translation.setflags(write=False)


def evaluate_trivial_flex(flex: TrivialFlex, config: Configuration) -> np.ndarray:
    """Velocities p'_i = A p_i + b, shape (n, d)."""
    if flex.skew.shape[0] != config.dimension:
        raise FrameworkError("dimension_mismatch", "flex dimension != configuration dimension")
    return config.points @ flex.skew.T + flex.translation


# ---------------------------------------------------------------------------
# JSON serialization.
#
# Schema: {"dimension": int, "points": [[...]], "edges": [[i,j],...],
#          "pins": [...] (optional), "cables": [[i,j],...] (optional),
#          "struts": [[i,j],...] (optional)}.  Edges listed with i<j, UTF-8,
# no NaN/Inf.


def framework_to_dict(f: Framework) -> dict:
    doc: dict = {
        "dimension": f.dimension,
        "points": [[float(x) for x in row] for row in f.points],
        "edges": [[i, j] for i, j in f.edges],
    }
    if f.pins:
        doc["pins"] = sorted(f.pins)
    if f.members is not None:
        cables = [[i, j] for (i, j), m in zip(f.edges, f.members) if m == CABLE]
        struts = [[i, j] for (i, j), m in zip(f.edges, f.members) if m == STRUT]
        if cables:
            doc["cables"] = cables
        if struts:
            doc["struts"] = struts
    return doc


def dump_framework(f: Framework) -> bytes:
    return (
        json.dumps(framework_to_dict(f), allow_nan=False, separators=(", ", ": "))
        + "\n"
    ).encode("utf-8")


def framework_from_dict(doc: dict) -> Framework:
    _check(isinstance(doc, dict), "schema", "top level must be an object")
    for key in ("dimension", "points", "edges"):
        _check(key in doc, "schema", f"missing required key {key!r}")
    unknown = set(doc) - {"dimension", "points", "edges", "pins", "cables", "struts"}
    _check(not unknown, "schema", f"unknown keys {sorted(unknown)}")
    dim = doc["dimension"]
    _check(isinstance(dim, int) and dim >= 1, "schema", "dimension must be a positive integer")
    pts = doc["points"]
    _check(isinstance(pts, list) and pts, "schema", "points must be a non-empty list")
    for row in pts:
        _check(
            isinstance(row, list) and len(row) == dim,
            "dimension_mismatch",
            f"point {row!r} does not have {dim} coordinates",
        )
        _check(
            all(isinstance(x, (int, float)) and np.isfinite(x) for x in row),
            "schema",
            f"non-finite coordinate in {row!r}",
        )
    edges = doc["edges"]
    _check(isinstance(edges, list), "schema", "edges must be a list")
    graph = Graph(len(pts), tuple(tuple(int(v) for v in e) for e in edges))
    config = Configuration(dim, np.array(pts, dtype=float))
    pins = frozenset(int(i) for i in doc.get("pins", []))

    members = None
    if "cables" in doc or "struts" in doc:
        idx = graph.edge_index()
        tags = [BAR] * graph.edge_count

        def apply(tag: str, pairs):
            for e in pairs:
                key = (min(int(e[0]), int(e[1])), max(int(e[0]), int(e[1])))
                _check(key in idx, "schema", f"{tag} {key} is not an edge")
                tags[idx[key]] = tag

        apply(CABLE, doc.get("cables", []))
        apply(STRUT, doc.get("struts", []))
        members = tuple(tags)

    return Framework(graph, config, pins, members)


def load_framework(data: bytes | str) -> Framework:
    """Parse and validate a serialized framework.

    Distinct error codes: schema, self_loop, duplicate_edge, index_range,
    zero_length, dimension_mismatch.
    """
    if isinstance(data, bytes):
        data = data.decode("utf-8")
    try:
        doc = json.loads(data)
    except json.JSONDecodeError as exc:
        raise FrameworkError("schema", f"invalid JSON: {exc}") from exc
    return framework_from_dict(doc)
