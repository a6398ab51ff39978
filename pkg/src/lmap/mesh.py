"""Triangle mesh container: connectivity, validation, OBJ/OFF io, ROI handling."""

from __future__ import annotations

import heapq
import os
from dataclasses import dataclass

import numpy as np

from .errors import (
    DegenerateFaceError,
    EmptySubmeshError,
    MeshFormatError,
    RoiParseError,
    TopologyError,
)

AREA_FLOOR = 1e-12  # minimum embedded face area accepted at load time


def _fmt(x: float) -> str:
    # 9 significant digits: round-trips exactly through float64 and keeps
    # save -> load -> save byte-stable.
    return format(float(x), ".9g")


class TriangleMesh:
    """Oriented manifold (or manifold-with-boundary) triangle mesh in R^3.

    Positions and faces are immutable after construction; derived
    connectivity is built once. A mesh is safe to share across threads for
    reading. Deformations produce new instances via :meth:`with_positions`
    or :meth:`with_faces`.
    """

    def __init__(self, positions, faces, *, check_areas: bool = True):
        positions = np.array(positions, dtype=np.float64)
        faces = np.array(faces, dtype=np.int64)
        if positions.ndim != 2 or positions.shape[1] != 3:
            raise TopologyError("positions must be an (n, 3) array")
        if faces.ndim != 2 or faces.shape[1] != 3:
            raise TopologyError("faces must be an (m, 3) array of vertex ids")
        if len(faces) == 0:
            raise TopologyError("mesh has no faces")
        self.positions = positions
        self.faces = faces
        self.positions.setflags(write=False)
        self.faces.setflags(write=False)
        self._build_connectivity()
        if check_areas:
            areas = self.face_areas()
            if np.any(areas <= AREA_FLOOR):
                bad = int(np.argmin(areas))
                raise DegenerateFaceError(
                    f"face {bad} has area {areas[bad]:.3e} <= {AREA_FLOOR}"
                )

    # -- construction helpers -------------------------------------------------

    def _build_connectivity(self):
        nv = len(self.positions)
        f = self.faces
        if f.min() < 0 or f.max() >= nv:
            raise TopologyError("face references an out-of-range vertex id")
        if np.any((f[:, 0] == f[:, 1]) | (f[:, 1] == f[:, 2]) | (f[:, 2] == f[:, 0])):
            raise TopologyError("face references a repeated vertex id")

        # Directed halfedges: each may appear at most once for an oriented
        # manifold; a repeat means either a non-manifold edge or two faces
        # traversing an edge in the same direction.
        src = f[:, [0, 1, 2]].reshape(-1)
        dst = f[:, [1, 2, 0]].reshape(-1)
        directed = set()
        for i, j in zip(src.tolist(), dst.tolist()):
            if (i, j) in directed:
                raise TopologyError(
                    f"edge ({i},{j}) traversed twice in the same direction "
                    "(non-manifold or inconsistently oriented)"
                )
            directed.add((i, j))

        edge_index: dict[tuple[int, int], int] = {}
        edge_faces: list[list[int]] = []
        edges: list[tuple[int, int]] = []
        for fid in range(len(f)):
            a, b, c = f[fid]
            for i, j in ((a, b), (b, c), (c, a)):
                key = (int(i), int(j)) if i < j else (int(j), int(i))
                e = edge_index.get(key)
                if e is None:
                    e = len(edges)
                    edge_index[key] = e
                    edges.append(key)
                    edge_faces.append([fid])
                else:
                    edge_faces[e].append(fid)

        self.edges = np.array(edges, dtype=np.int64)
        self.edge_index = edge_index
        self.edge_faces = edge_faces

        counts = np.array([len(fs) for fs in edge_faces])
        if np.any(counts > 2):
            raise TopologyError("non-manifold edge (more than two incident faces)")
        self.boundary_edge_mask = counts == 1

        self.boundary_vertex_mask = np.zeros(nv, dtype=bool)
        if self.boundary_edge_mask.any():
            be = self.edges[self.boundary_edge_mask]
            self.boundary_vertex_mask[be.reshape(-1)] = True

        neighbor_sets: list[set[int]] = [set() for _ in range(nv)]
        for i, j in self.edges.tolist():
            neighbor_sets[i].add(j)
            neighbor_sets[j].add(i)
        self.neighbors = [np.array(sorted(s), dtype=np.int64) for s in neighbor_sets]

    # -- basic queries ---------------------------------------------------------

    @property
    def vertex_count(self) -> int:
        return len(self.positions)

    @property
    def edge_count(self) -> int:
        return len(self.edges)

    @property
    def face_count(self) -> int:
        return len(self.faces)

    def face_areas(self) -> np.ndarray:
        p = self.positions
        u = p[self.faces[:, 1]] - p[self.faces[:, 0]]
        v = p[self.faces[:, 2]] - p[self.faces[:, 0]]
        return 0.5 * np.linalg.norm(np.cross(u, v), axis=1)

    def edge_lengths(self) -> np.ndarray:
        p = self.positions
        return np.linalg.norm(p[self.edges[:, 0]] - p[self.edges[:, 1]], axis=1)

    def boundary_loop_count(self) -> int:
        """Number of connected boundary cycles."""
        be = self.edges[self.boundary_edge_mask]
        if len(be) == 0:
            return 0
        parent: dict[int, int] = {}

        def find(x):
            while parent[x] != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        for i, j in be.tolist():
            parent.setdefault(i, i)
            parent.setdefault(j, j)
            ri, rj = find(i), find(j)
            if ri != rj:
                parent[ri] = rj
        return len({find(v) for v in parent})

    def with_positions(self, positions, *, check_areas: bool = False) -> "TriangleMesh":
        return TriangleMesh(positions, self.faces, check_areas=check_areas)

    def with_faces(self, faces, *, check_areas: bool = False) -> "TriangleMesh":
        return TriangleMesh(self.positions, faces, check_areas=check_areas)


def euler_characteristic(mesh: TriangleMesh) -> int:
    """V - E + F of the mesh."""
    return mesh.vertex_count - mesh.edge_count + mesh.face_count


# -- ROI selections -------------------------------------------------------------


@dataclass(frozen=True)
class RoiSelection:
    """Vertex subset with its derived interior/rim partition.

    ``interior`` holds the selected vertices whose whole one-ring lies in
    the selection; ``rim`` holds the rest. An empty selection is legal here
    and rejected only when a flow is started.
    """

    vertices: frozenset
    interior: frozenset
    rim: frozenset

    @classmethod
    def from_vertices(cls, mesh: TriangleMesh, vertex_ids) -> "RoiSelection":
        ids = set(int(v) for v in vertex_ids)
        for v in ids:
            if v < 0 or v >= mesh.vertex_count:
                raise RoiParseError(
                    f"ROI vertex {v} out of range for mesh with "
                    f"{mesh.vertex_count} vertices"
                )
        interior = {
            v for v in ids if all(int(n) in ids for n in mesh.neighbors[v])
        }
        return cls(
            vertices=frozenset(ids),
            interior=frozenset(interior),
            rim=frozenset(ids - interior),
        )

    def __len__(self) -> int:
        return len(self.vertices)


def load_roi(source, mesh: TriangleMesh) -> RoiSelection:
    """Read a ROI file: one 0-based vertex index per line, ``#`` comments."""
    text = _read_text(source)
    ids = []
    for ln, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        try:
            ids.append(int(line))
        except ValueError:
            raise RoiParseError(f"line {ln}: expected a vertex index, got {raw!r}")
    return RoiSelection.from_vertices(mesh, ids)


def save_roi(vertex_ids, target) -> None:
    text = "".join(f"{v}\n" for v in sorted(int(v) for v in vertex_ids))
    _write_text(target, text)


@dataclass(frozen=True)
class Submesh:
    """ROI-induced submesh plus the vertex-id maps to/from the parent."""

    mesh: TriangleMesh
    to_parent: np.ndarray  # local id -> parent id
    to_local: dict  # parent id -> local id


def extract_roi_submesh(mesh: TriangleMesh, roi: RoiSelection) -> Submesh:
    """Submesh of all faces whose three corners lie in the ROI."""
    if not roi.vertices:
        raise EmptySubmeshError("ROI is empty")
    inside = np.zeros(mesh.vertex_count, dtype=bool)
    inside[list(roi.vertices)] = True
    keep = inside[mesh.faces].all(axis=1)
    if not keep.any():
        raise EmptySubmeshError("ROI spans no complete face")
    faces = mesh.faces[keep]
    used = np.unique(faces)
    to_local = {int(p): i for i, p in enumerate(used)}
    local_faces = np.vectorize(to_local.__getitem__)(faces)
    sub = TriangleMesh(mesh.positions[used], local_faces)
    return Submesh(mesh=sub, to_parent=used, to_local=to_local)


def geodesic_ball(mesh: TriangleMesh, seed: int, radius: float) -> np.ndarray:
    """Vertices within graph-geodesic distance ``radius`` of ``seed``.

    Dijkstra over edge lengths with deterministic index tie-breaking.
    """
    if seed < 0 or seed >= mesh.vertex_count:
        raise RoiParseError(f"seed vertex {seed} out of range")
    if radius < 0:
        raise RoiParseError("radius must be >= 0")
    lengths = mesh.edge_lengths()
    adj: list[list[tuple[int, float]]] = [[] for _ in range(mesh.vertex_count)]
    for e, (i, j) in enumerate(mesh.edges.tolist()):
        adj[i].append((j, float(lengths[e])))
        adj[j].append((i, float(lengths[e])))

    dist = {seed: 0.0}
    heap = [(0.0, seed)]
    selected = []
    while heap:
        d, v = heapq.heappop(heap)
        if d > dist.get(v, np.inf):
            continue
        selected.append(v)
        for w, l in adj[v]:
            nd = d + l
            if nd <= radius and nd < dist.get(w, np.inf):
                dist[w] = nd
                heapq.heappush(heap, (nd, w))
    return np.array(sorted(selected), dtype=np.int64)


# -- file formats ----------------------------------------------------------------


def _read_text(source) -> str:
    if isinstance(source, (str, os.PathLike)):
        with open(source, "rb") as fh:
            return fh.read().decode("utf-8")
    if isinstance(source, bytes):
        return source.decode("utf-8")
    data = source.read()
    return data.decode("utf-8") if isinstance(data, bytes) else data


def _write_text(target, text: str) -> None:
    if isinstance(target, (str, os.PathLike)):
        with open(target, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        target.write(text)


def detect_format(source_name: str | None, text: str) -> str:
    if source_name:
        ext = os.path.splitext(str(source_name))[1].lower()
        if ext == ".obj":
            return "obj"
        if ext == ".off":
            return "off"
    for raw in text.splitlines():
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        return "off" if line.split()[0].upper() == "OFF" else "obj"
    raise MeshFormatError("empty mesh stream")


def load_mesh(source, format: str | None = None) -> TriangleMesh:
    """Load an ASCII OBJ or OFF triangle mesh.

    ``format`` is ``"obj"``, ``"off"``, or None to detect from the file
    extension / content. Texture and normal records are ignored; any
    non-triangle face is a format error.
    """
    text = _read_text(source)
    name = source if isinstance(source, (str, os.PathLike)) else None
    fmt = (format or detect_format(name, text)).lower()
    if fmt == "obj":
        return loads_obj(text)
    if fmt == "off":
        return loads_off(text)
    raise MeshFormatError(f"unknown mesh format {format!r}")


def loads_obj(text: str) -> TriangleMesh:
    positions = []
    faces = []
    for ln, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        tok = line.split()
        if tok[0] == "v":
            if len(tok) < 4:
                raise MeshFormatError(f"line {ln}: vertex needs 3 coordinates")
            try:
                positions.append([float(tok[1]), float(tok[2]), float(tok[3])])
            except ValueError:
                raise MeshFormatError(f"line {ln}: bad vertex coordinate")
        elif tok[0] == "f":
            refs = tok[1:]
            if len(refs) != 3:
                raise MeshFormatError(
                    f"line {ln}: only triangle faces are supported "
                    f"(got {len(refs)} corners)"
                )
            corners = []
            for r in refs:
                head = r.split("/", 1)[0]
                try:
                    idx = int(head)
                except ValueError:
                    raise MeshFormatError(f"line {ln}: bad face index {r!r}")
                if idx <= 0:
                    raise MeshFormatError(
                        f"line {ln}: face indices must be positive 1-based"
                    )
                corners.append(idx - 1)
            faces.append(corners)
        # vt/vn/o/g/s/usemtl/mtllib records carry no geometry we keep
    if not positions:
        raise MeshFormatError("OBJ contains no vertices")
    if not faces:
        raise MeshFormatError("OBJ contains no faces")
    return TriangleMesh(positions, faces)


def loads_off(text: str) -> TriangleMesh:
    lines = []
    for raw in text.splitlines():
        line = raw.split("#", 1)[0].strip()
        if line:
            lines.append(line)
    if not lines:
        raise MeshFormatError("OFF stream is empty")
    head = lines[0].split()
    if head[0].upper() != "OFF":
        raise MeshFormatError("missing OFF header")
    rest = head[1:]
    cursor = 1
    if not rest:
        if len(lines) < 2:
            raise MeshFormatError("missing OFF counts line")
        rest = lines[1].split()
        cursor = 2
    if len(rest) < 3:
        raise MeshFormatError("OFF counts line must be 'V F E'")
    try:
        nv, nf = int(rest[0]), int(rest[1])
    except ValueError:
        raise MeshFormatError("bad OFF counts line")

    if len(lines) < cursor + nv + nf:
        raise MeshFormatError("OFF stream truncated")
    positions = []
    for k in range(nv):
        tok = lines[cursor + k].split()
        if len(tok) < 3:
            raise MeshFormatError(f"OFF vertex {k}: needs 3 coordinates")
        try:
            positions.append([float(tok[0]), float(tok[1]), float(tok[2])])
        except ValueError:
            raise MeshFormatError(f"OFF vertex {k}: bad coordinate")
    faces = []
    for k in range(nf):
        tok = lines[cursor + nv + k].split()
        try:
            arity = int(tok[0])
        except (ValueError, IndexError):
            raise MeshFormatError(f"OFF face {k}: bad record")
        if arity != 3 or len(tok) < 4:
            raise MeshFormatError(f"OFF face {k}: only triangle faces are supported")
        faces.append([int(tok[1]), int(tok[2]), int(tok[3])])
    return TriangleMesh(positions, faces)


def dumps_obj(mesh: TriangleMesh) -> str:
    out = []
    for x, y, z in mesh.positions:
        out.append(f"v {_fmt(x)} {_fmt(y)} {_fmt(z)}\n")
    for a, b, c in mesh.faces:
        out.append(f"f {a + 1} {b + 1} {c + 1}\n")
    return "".join(out)


def dumps_off(mesh: TriangleMesh) -> str:
    out = [
        "OFF\n",
        f"{mesh.vertex_count} {mesh.face_count} {mesh.edge_count}\n",
    ]
    for x, y, z in mesh.positions:
        out.append(f"{_fmt(x)} {_fmt(y)} {_fmt(z)}\n")
    for a, b, c in mesh.faces:
        out.append(f"3 {a} {b} {c}\n")
    return "".join(out)


def save_mesh(mesh: TriangleMesh, target, format: str = "obj") -> None:
    fmt = format.lower()
    if fmt == "obj":
        _write_text(target, dumps_obj(mesh))
    elif fmt == "off":
        _write_text(target, dumps_off(mesh))
    else:
        raise MeshFormatError(f"unknown mesh format {format!r}")
