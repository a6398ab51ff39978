"""Discrete metric: per-edge lengths over a triangulation that supports
intrinsic Delaunay edge flips, with curvature and cotangent-weight queries.

The triangulation carried here is deliberately decoupled from any embedded
mesh: flips rewire connectivity while the surface (as a metric space) stays
the same. Every flip is logged so callers can replay connectivity changes
onto an embedded mesh.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass
from typing import Callable, NamedTuple

import numpy as np

from .errors import (
    DegenerateMetricError,
    FlipLimitError,
    NonFlippableError,
)
from .mesh import TriangleMesh

TRIANGLE_SLACK = 1e-12  # strictness margin for the triangle inequality
ACOS_BAND = 1e-9  # how far outside [-1, 1] a cosine may stray before erroring
DELAUNAY_EPS = -1e-10  # weights above this count as Delaunay (ties not flipped)


class FlipRecord(NamedTuple):
    """One edge flip: faces [a,b,c],[b,a,d] became [c,d,b],[d,c,a]."""

    a: int
    b: int
    c: int
    d: int
    new_length: float


@dataclass
class CurvatureField:
    """Per-vertex angle deficit (2*pi interior, pi boundary)."""

    values: np.ndarray
    is_boundary: np.ndarray


def gauss_bonnet_residual(field: CurvatureField, chi: int) -> float:
    """Total curvature minus 2*pi*chi; zero for any consistent metric."""
    return float(field.values.sum() - 2.0 * math.pi * chi)


def _edge_key(i: int, j: int) -> tuple[int, int]:
    return (i, j) if i < j else (j, i)


class DiscreteMetric:
    """Edge-length function over a mutable triangulation.

    ``lengths`` and ``beta`` (the lengths captured at construction) are
    arrays aligned with ``edges``. Flips reuse the replaced edge's slot so
    alignment survives connectivity changes. Reads are cheap and
    vectorized; flips take exclusive access.
    """

    def __init__(self, faces, lengths: dict, vertex_count: int | None = None):
        self.faces: list[tuple[int, int, int]] = [
            (int(a), int(b), int(c)) for a, b, c in faces
        ]
        if not self.faces:
            raise DegenerateMetricError("metric needs at least one face")
        if vertex_count is None:
            vertex_count = 1 + max(max(f) for f in self.faces)
        self.vertex_count = vertex_count

        edge_index: dict[tuple[int, int], int] = {}
        edge_list: list[tuple[int, int]] = []
        edge_faces: list[list[int]] = []
        for fid, (a, b, c) in enumerate(self.faces):
            for i, j in ((a, b), (b, c), (c, a)):
                key = _edge_key(i, j)
                e = edge_index.get(key)
                if e is None:
                    e = len(edge_list)
                    edge_index[key] = e
                    edge_list.append(key)
                    edge_faces.append([fid])
                else:
                    edge_faces[e].append(fid)
        self.edges = edge_list
        self._edge_index = edge_index
        self._edge_faces = edge_faces

        vals = np.empty(len(edge_list))
        for e, key in enumerate(edge_list):
            try:
                vals[e] = lengths[key]
            except KeyError:
                raise DegenerateMetricError(f"no length provided for edge {key}")
        if np.any(vals <= 0) or not np.all(np.isfinite(vals)):
            raise DegenerateMetricError("edge lengths must be positive and finite")
        self.lengths = vals
        self.beta = vals.copy()
        self.beta_hook: Callable[[int, int, float], float] | None = None
        self.flip_log: list[FlipRecord] = []
        self._edge_array_cache: np.ndarray | None = None

        self._face_edges = self._build_face_edges()
        self._boundary_vertex = np.zeros(vertex_count, dtype=bool)
        for e, fs in enumerate(edge_faces):
            if len(fs) == 1:
                i, j = edge_list[e]
                self._boundary_vertex[i] = True
                self._boundary_vertex[j] = True

        if not self.triangle_inequality_ok(self.lengths):
            raise DegenerateMetricError("triangle inequality violated at construction")

    @classmethod
    def from_mesh(cls, mesh: TriangleMesh) -> "DiscreteMetric":
        lengths = mesh.edge_lengths()
        table = {
            (int(i), int(j)): float(l)
            for (i, j), l in zip(mesh.edges.tolist(), lengths)
        }
        return cls(
            [tuple(f) for f in mesh.faces.tolist()],
            table,
            vertex_count=mesh.vertex_count,
        )

    def copy(self) -> "DiscreteMetric":
        dup = object.__new__(DiscreteMetric)
        dup.faces = list(self.faces)
        dup.vertex_count = self.vertex_count
        dup.edges = list(self.edges)
        dup._edge_index = dict(self._edge_index)
        dup._edge_faces = [list(fs) for fs in self._edge_faces]
        dup.lengths = self.lengths.copy()
        dup.beta = self.beta.copy()
        dup.beta_hook = None
        dup.flip_log = list(self.flip_log)
        dup._edge_array_cache = None
        dup._face_edges = self._face_edges.copy()
        dup._boundary_vertex = self._boundary_vertex.copy()
        return dup

    # -- derived structure -------------------------------------------------

    def _build_face_edges(self) -> np.ndarray:
        fe = np.empty((len(self.faces), 3), dtype=np.int64)
        for fid, (a, b, c) in enumerate(self.faces):
            fe[fid, 0] = self._edge_index[_edge_key(b, c)]
            fe[fid, 1] = self._edge_index[_edge_key(c, a)]
            fe[fid, 2] = self._edge_index[_edge_key(a, b)]
        return fe

    @property
    def face_array(self) -> np.ndarray:
        return np.array(self.faces, dtype=np.int64)

    @property
    def edge_array(self) -> np.ndarray:
        if self._edge_array_cache is None:
            self._edge_array_cache = np.array(self.edges, dtype=np.int64)
        return self._edge_array_cache

    @property
    def boundary_vertex_mask(self) -> np.ndarray:
        return self._boundary_vertex

    def edge_length(self, i: int, j: int) -> float:
        return float(self.lengths[self._edge_index[_edge_key(i, j)]])

    def is_interior_edge(self, key: tuple[int, int]) -> bool:
        return len(self._edge_faces[self._edge_index[key]]) == 2

    def interior_edge_mask(self) -> np.ndarray:
        return np.array([len(fs) == 2 for fs in self._edge_faces])

    def lengths_as_dict(self) -> dict:
        return {key: float(l) for key, l in zip(self.edges, self.lengths)}

    # -- metric quantities ---------------------------------------------------

    def triangle_inequality_ok(self, lengths: np.ndarray | None = None) -> bool:
        L = (self.lengths if lengths is None else lengths)[self._face_edges]
        opp = L[:, [1, 2, 0]] + L[:, [2, 0, 1]]
        return bool(np.all(L < opp - TRIANGLE_SLACK))

    def corner_angles(self, lengths: np.ndarray | None = None) -> np.ndarray:
        """Angle at each face corner via the cosine law, shape (F, 3).

        Column m is the angle at ``faces[f][m]``, opposite edge
        ``_face_edges[f][m]``.
        """
        L = (self.lengths if lengths is None else lengths)[self._face_edges]
        a, b, c = L[:, 0], L[:, 1], L[:, 2]
        cos = np.empty_like(L)
        cos[:, 0] = (b**2 + c**2 - a**2) / (2.0 * b * c)
        cos[:, 1] = (c**2 + a**2 - b**2) / (2.0 * c * a)
        cos[:, 2] = (a**2 + b**2 - c**2) / (2.0 * a * b)
        worst = np.max(np.abs(cos))
        if worst > 1.0 + ACOS_BAND:
            f = int(np.argmax(np.max(np.abs(cos), axis=1)))
            raise DegenerateMetricError(
                f"degenerate corner on face {self.faces[f]}: |cos| = {worst:.12f}"
            )
        return np.arccos(np.clip(cos, -1.0, 1.0))

    def vertex_curvature(self, lengths: np.ndarray | None = None) -> CurvatureField:
        """Angle deficit per vertex: 2*pi interior, pi on the boundary."""
        theta = self.corner_angles(lengths)
        sums = np.zeros(self.vertex_count)
        np.add.at(sums, self.face_array, theta)
        base = np.where(self._boundary_vertex, math.pi, 2.0 * math.pi)
        return CurvatureField(values=base - sums, is_boundary=self._boundary_vertex)

    def cotangent_weights(self, lengths: np.ndarray | None = None) -> np.ndarray:
        """Per-edge cotangent weight: sum of cot of the opposite angle(s)."""
        theta = self.corner_angles(lengths)
        w = np.zeros(len(self.edges))
        np.add.at(w, self._face_edges, 1.0 / np.tan(theta))
        return w

    # -- flips ------------------------------------------------------------------

    def _flip_geometry(self, a: int, b: int, c: int, d: int):
        """Lay faces [a,b,c] and [b,a,d] flat across (a,b).

        Returns (new diagonal length, crossing parameter in (0,1) iff the
        flattened quadrilateral is strictly convex).
        """
        l_ab = self.edge_length(a, b)
        l_ac = self.edge_length(a, c)
        l_bc = self.edge_length(b, c)
        l_ad = self.edge_length(a, d)
        l_bd = self.edge_length(b, d)
        xc = (l_ac**2 + l_ab**2 - l_bc**2) / (2.0 * l_ab)
        yc2 = l_ac**2 - xc**2
        xd = (l_ad**2 + l_ab**2 - l_bd**2) / (2.0 * l_ab)
        yd2 = l_ad**2 - xd**2
        if yc2 <= 0.0 or yd2 <= 0.0:
            raise NonFlippableError("adjacent face degenerates under planar layout")
        yc = math.sqrt(yc2)
        yd = -math.sqrt(yd2)
        new_length = math.hypot(xc - xd, yc - yd)
        cross = (xc + (xd - xc) * yc / (yc - yd)) / l_ab
        return new_length, cross

    def _edge_quad(self, key: tuple[int, int]):
        """Resolve edge (i,j) into (a, b, c, d, f1, f2) with f1 = [a,b,c]
        containing the directed edge a->b and f2 = [b,a,d]."""
        e = self._edge_index.get(key)
        if e is None:
            raise NonFlippableError(f"edge {key} is not in the triangulation")
        fs = self._edge_faces[e]
        if len(fs) != 2:
            raise NonFlippableError(f"edge {key} is a boundary edge")
        i, j = key
        f1 = f2 = None
        for fid in fs:
            fa, fb, fc = self.faces[fid]
            directed = ((fa, fb), (fb, fc), (fc, fa))
            if (i, j) in directed:
                f1 = fid
            else:
                f2 = fid
        if f1 is None or f2 is None:
            raise NonFlippableError(f"edge {key} has inconsistent face orientation")
        a, b = i, j
        c = next(v for v in self.faces[f1] if v != a and v != b)
        d = next(v for v in self.faces[f2] if v != a and v != b)
        return a, b, c, d, f1, f2

    def can_flip(self, key: tuple[int, int], forbidden=frozenset()) -> bool:
        try:
            a, b, c, d, _, _ = self._edge_quad(key)
        except NonFlippableError:
            return False
        if c == d or _edge_key(c, d) in self._edge_index:
            return False
        if _edge_key(c, d) in forbidden:
            return False
        try:
            _, cross = self._flip_geometry(a, b, c, d)
        except NonFlippableError:
            return False
        return 1e-12 < cross < 1.0 - 1e-12

    def flip_edge(self, edge, forbidden=frozenset()) -> FlipRecord:
        """Replace an interior edge by the other diagonal of its flattened
        quadrilateral; the new length comes from the planar layout."""
        key = _edge_key(int(edge[0]), int(edge[1]))
        a, b, c, d, f1, f2 = self._edge_quad(key)
        if c == d:
            raise NonFlippableError(f"flip of {key} would create a loop edge")
        new_key = _edge_key(c, d)
        if new_key in self._edge_index:
            raise NonFlippableError(f"flip of {key} would duplicate edge {new_key}")
        if new_key in forbidden:
            raise NonFlippableError(f"flip of {key} would create forbidden edge {new_key}")
        new_length, cross = self._flip_geometry(a, b, c, d)
        if not (1e-12 < cross < 1.0 - 1e-12):
            raise NonFlippableError(
                f"flattened quadrilateral at {key} is not strictly convex"
            )

        e = self._edge_index.pop(key)
        self._edge_index[new_key] = e
        self.edges[e] = new_key
        self._edge_array_cache = None
        self.lengths[e] = new_length
        if self.beta_hook is not None:
            self.beta[e] = self.beta_hook(c, d, new_length)
        else:
            self.beta[e] = new_length

        self.faces[f1] = (c, d, b)
        self.faces[f2] = (d, c, a)

        # ownerships: (d,b) moves f2 -> f1, (c,a) moves f1 -> f2
        e_db = self._edge_index[_edge_key(d, b)]
        fs = self._edge_faces[e_db]
        fs[fs.index(f2)] = f1
        e_ca = self._edge_index[_edge_key(c, a)]
        fs = self._edge_faces[e_ca]
        fs[fs.index(f1)] = f2

        e_bc = self._edge_index[_edge_key(b, c)]
        e_ad = self._edge_index[_edge_key(a, d)]
        self._face_edges[f1] = (e_db, e_bc, e)  # face (c, d, b)
        self._face_edges[f2] = (e_ca, e_ad, e)  # face (d, c, a)

        rec = FlipRecord(a=a, b=b, c=c, d=d, new_length=new_length)
        self.flip_log.append(rec)
        return rec

    def edge_weight(self, key: tuple[int, int]) -> float:
        """Cotangent weight of one edge, computed locally."""
        e = self._edge_index[key]
        i, j = key
        l_ij = self.lengths[e]
        w = 0.0
        for fid in self._edge_faces[e]:
            k = next(v for v in self.faces[fid] if v != i and v != j)
            l_ki = self.edge_length(k, i)
            l_kj = self.edge_length(k, j)
            cos = (l_ki**2 + l_kj**2 - l_ij**2) / (2.0 * l_ki * l_kj)
            if abs(cos) > 1.0 + ACOS_BAND:
                raise DegenerateMetricError(
                    f"degenerate corner opposite edge {key}"
                )
            cos = min(1.0, max(-1.0, cos))
            sin = math.sqrt(max(1.0 - cos * cos, 0.0))
            if sin == 0.0:
                raise DegenerateMetricError(f"flat corner opposite edge {key}")
            w += cos / sin
        return w

    def make_delaunay(self, forbidden=frozenset()) -> int:
        """Flip until every interior edge has weight >= -1e-10.

        Work queue seeded with all interior edges (sorted); after a flip the
        four quadrilateral boundary edges re-enter the queue. Returns the
        flip count; a hard cap of 50 * E flips guards against cycling.

        Seed weights come from one vectorized pass; only edges whose
        adjacent faces changed since are recomputed locally.
        """
        cap = 50 * len(self.edges)
        seed_w = self.cotangent_weights()
        dirty = np.zeros(len(self.edges), dtype=bool)
        queue = deque(
            key for key in sorted(self.edges) if len(self._edge_faces[self._edge_index[key]]) == 2
        )
        queued = set(queue)
        flips = 0
        while queue:
            key = queue.popleft()
            queued.discard(key)
            e = self._edge_index.get(key)
            if e is None:
                continue  # removed by an earlier flip
            if len(self._edge_faces[e]) != 2:
                continue
            w = self.edge_weight(key) if dirty[e] else seed_w[e]
            if w >= DELAUNAY_EPS:
                continue
            if flips >= cap:
                raise FlipLimitError(
                    f"Delaunay flipping exceeded {cap} flips; metric is pathological"
                )
            try:
                rec = self.flip_edge(key, forbidden=forbidden)
            except NonFlippableError:
                continue
            flips += 1
            dirty[e] = True  # slot now holds the new diagonal
            for i, j in ((rec.b, rec.c), (rec.c, rec.a), (rec.a, rec.d), (rec.d, rec.b)):
                k = _edge_key(i, j)
                dirty[self._edge_index[k]] = True
                if k not in queued:
                    queue.append(k)
                    queued.add(k)
        return flips
