"""Area and angle distortion of a mapped mesh against the original, plus
fixed-bin histogram export (JSON and CSV).

Both meshes must share vertex and face indexing; when the flow replayed
edge flips, apply the same final connectivity to the original positions
before comparing.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateFaceError, UsageError
from .mesh import RoiSelection, TriangleMesh

AREA_EPS = 1e-15
DEFAULT_BINS = 64
DEFAULT_RANGE = (-2.0, 2.0)


@dataclass
class Histogram:
    edges: np.ndarray  # bin_count + 1 ascending edges
    counts: np.ndarray  # bin_count occupancy


@dataclass
class DistortionReport:
    area_eps: np.ndarray  # per-vertex, NaN outside scope
    angle_eta: np.ndarray  # per-corner (F, 3), NaN outside scope
    area_hist: Histogram
    angle_hist: Histogram


def _check_shared_indexing(original: TriangleMesh, mapped: TriangleMesh) -> None:
    if original.vertex_count != mapped.vertex_count or not np.array_equal(
        original.faces, mapped.faces
    ):
        raise UsageError(
            "distortion needs identical vertex/face indexing on both meshes "
            "(replay connectivity changes onto both before comparing)"
        )


def _face_areas(positions: np.ndarray, faces: np.ndarray) -> np.ndarray:
    u = positions[faces[:, 1]] - positions[faces[:, 0]]
    v = positions[faces[:, 2]] - positions[faces[:, 0]]
    return 0.5 * np.linalg.norm(np.cross(u, v), axis=1)


def _corner_angles(positions: np.ndarray, faces: np.ndarray) -> np.ndarray:
    out = np.empty((len(faces), 3))
    for m in range(3):
        u = positions[faces[:, (m + 1) % 3]] - positions[faces[:, m]]
        v = positions[faces[:, (m + 2) % 3]] - positions[faces[:, m]]
        nu = np.linalg.norm(u, axis=1)
        nv = np.linalg.norm(v, axis=1)
        cosang = np.einsum("ij,ij->i", u, v) / (nu * nv)
        out[:, m] = np.arccos(np.clip(cosang, -1.0, 1.0))
    return out


def area_distortion(
    original: TriangleMesh, mapped: TriangleMesh, scope=None
) -> np.ndarray:
    """Per-vertex log ratio of mapped to original one-ring areas.

    Entries outside ``scope`` (an iterable of vertex ids; default all) are
    NaN.
    """
    _check_shared_indexing(original, mapped)
    faces = original.faces
    a0 = _face_areas(original.positions, faces)
    a1 = _face_areas(mapped.positions, faces)
    n = original.vertex_count
    ring0 = np.zeros(n)
    ring1 = np.zeros(n)
    np.add.at(ring0, faces, a0[:, None])
    np.add.at(ring1, faces, a1[:, None])

    ids = np.arange(n) if scope is None else np.array(sorted(scope), dtype=np.int64)
    if np.any(ring0[ids] <= AREA_EPS) or np.any(ring1[ids] <= AREA_EPS):
        raise DegenerateFaceError("one-ring area vanished inside the scope")
    eps = np.full(n, np.nan)
    # difference of logs so swapping the meshes negates exactly
    eps[ids] = np.log(ring1[ids]) - np.log(ring0[ids])
    return eps


def angle_distortion(
    original: TriangleMesh, mapped: TriangleMesh, scope=None
) -> np.ndarray:
    """Per-corner log ratio of mapped to original angles, shape (F, 3).

    ``scope`` is an iterable of face ids (default all); other rows are NaN.
    """
    _check_shared_indexing(original, mapped)
    faces = original.faces
    fids = (
        np.arange(len(faces))
        if scope is None
        else np.array(sorted(scope), dtype=np.int64)
    )
    if np.any(_face_areas(original.positions, faces)[fids] <= 1e-12) or np.any(
        _face_areas(mapped.positions, faces)[fids] <= 1e-12
    ):
        raise DegenerateFaceError("degenerate face inside the scope")
    t0 = _corner_angles(original.positions, faces[fids])
    t1 = _corner_angles(mapped.positions, faces[fids])
    eta = np.full((len(faces), 3), np.nan)
    eta[fids] = np.log(t1) - np.log(t0)
    return eta


def histogram(
    samples,
    bin_count: int = DEFAULT_BINS,
    lo: float = DEFAULT_RANGE[0],
    hi: float = DEFAULT_RANGE[1],
) -> Histogram:
    """Uniform-bin histogram; out-of-range samples land in the end bins,
    non-finite samples are dropped."""
    if bin_count < 1:
        raise UsageError("bin_count must be >= 1")
    if not lo < hi:
        raise UsageError("histogram range must satisfy lo < hi")
    data = np.asarray(samples, dtype=float).reshape(-1)
    data = data[np.isfinite(data)]
    edges = np.linspace(lo, hi, bin_count + 1)
    counts = np.zeros(bin_count, dtype=np.int64)
    if len(data):
        width = (hi - lo) / bin_count
        # clip before the integer cast; huge samples would overflow int64
        idx = np.clip(np.floor((data - lo) / width), 0, bin_count - 1).astype(np.int64)
        np.add.at(counts, idx, 1)
    return Histogram(edges=edges, counts=counts)


def histogram_json(h: Histogram) -> dict:
    return {"edges": h.edges.tolist(), "counts": h.counts.tolist()}


def histogram_csv(h: Histogram) -> str:
    lines = ["edge_lo,edge_hi,count"]
    for lo, hi, c in zip(h.edges[:-1], h.edges[1:], h.counts):
        lines.append(f"{lo:.9g},{hi:.9g},{int(c)}")
    return "\n".join(lines) + "\n"


def roi_face_scope(mesh: TriangleMesh, roi: RoiSelection) -> np.ndarray:
    """Faces whose three corners lie in the ROI."""
    inside = np.zeros(mesh.vertex_count, dtype=bool)
    inside[sorted(roi.vertices)] = True
    return np.flatnonzero(inside[mesh.faces].all(axis=1))


def build_report(
    original: TriangleMesh,
    mapped: TriangleMesh,
    roi: RoiSelection | None = None,
    bin_count: int = DEFAULT_BINS,
    lo: float = DEFAULT_RANGE[0],
    hi: float = DEFAULT_RANGE[1],
) -> DistortionReport:
    """Distortion metrics scoped to the ROI (or the whole mesh)."""
    if roi is None:
        vscope = None
        fscope = None
    else:
        vscope = sorted(roi.vertices)
        fscope = roi_face_scope(original, roi)
    eps = area_distortion(original, mapped, vscope)
    eta = angle_distortion(original, mapped, fscope)
    return DistortionReport(
        area_eps=eps,
        angle_eta=eta,
        area_hist=histogram(eps, bin_count, lo, hi),
        angle_hist=histogram(eta, bin_count, lo, hi),
    )
