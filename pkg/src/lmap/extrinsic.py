"""Stepwise local flattening: schedule target curvature, solve the
intrinsic flow on the ROI submesh, then reposition embedded vertices along
their normals so edge lengths match the computed targets.

Vertices outside the ROI never move. The intrinsic solve per step runs on
the ROI submesh with rim vertices metric-frozen at u = 0; edge flips
performed by the intrinsic solver are replayed onto the embedded
connectivity so every target length has an embedded edge to realize it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    DegenerateFaceError,
    EmptySubmeshError,
    LineSearchError,
    UsageError,
    ZeroNormalError,
)
from .intrinsic import FlowReport, run_intrinsic_flow
from .mesh import RoiSelection, TriangleMesh
from .metric import DiscreteMetric, FlipRecord

NORMAL_FLOOR = 1e-12


@dataclass
class FlowConfig:
    """Knobs for one extrinsic flow run (defaults match the CLI)."""

    epsilon: float = 1e-6
    max_newton: int = 50
    max_gd: int = 500
    pin_rim: bool = False
    grad_tol_scale: float = 1e-6  # grad_tol = scale * (mean edge length)^2
    armijo_c: float = 1e-4
    backtrack: float = 0.5
    max_backtracks: int = 60
    max_ls_failures: int = 30


@dataclass
class StepReport:
    step: int
    kbar_fraction: float
    intrinsic: FlowReport
    flips_replayed: int
    gd_iterations: int
    energies: list = field(default_factory=list)
    grad_inf_final: float = 0.0


@dataclass
class DeformationState:
    """Embedded state threaded through the steps (mostly for inspection)."""

    positions: np.ndarray
    step_index: int
    total_steps: int
    lam: np.ndarray
    flip_replay_log: list


def schedule_target_curvature(initial_K, roi: RoiSelection, k: int, n: int) -> np.ndarray:
    """Per-vertex target (1 - k/n) * K0 on ROI-interior vertices, NaN
    elsewhere (rim is metric-frozen, exterior is absent from the solve)."""
    values = getattr(initial_K, "values", initial_K)
    values = np.asarray(values, dtype=float)
    if n < 1 or k < 0 or k > n:
        raise UsageError(f"bad schedule step k={k}, n={n}")
    target = np.full(len(values), np.nan)
    ids = sorted(roi.interior)
    target[ids] = (1.0 - k / n) * values[ids]
    return target


def face_area_normal(positions: np.ndarray, face) -> tuple[float, np.ndarray]:
    """Area and unit normal of one face from the cross product."""
    p = np.asarray(positions, dtype=float)
    i, j, k = face
    cross = np.cross(p[j] - p[i], p[k] - p[i])
    area = 0.5 * float(np.linalg.norm(cross))
    if area <= 1e-12:
        raise DegenerateFaceError(f"face {tuple(face)} has area {area:.3e}")
    return area, cross / (2.0 * area)


def vertex_normal(positions: np.ndarray, mesh: TriangleMesh, vertex: int) -> np.ndarray:
    """Area-weighted average of incident face normals, normalized."""
    d = np.zeros(3)
    for f in mesh.faces:
        if vertex in f:
            area, n = face_area_normal(positions, f)
            d += area * n
    norm = float(np.linalg.norm(d))
    if norm <= NORMAL_FLOOR:
        raise ZeroNormalError(f"incident normals cancel at vertex {vertex}")
    return d / norm


def _vertex_normals_all(positions: np.ndarray, faces: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Area-weighted normal sums d and their magnitudes for all vertices."""
    cross = np.cross(
        positions[faces[:, 1]] - positions[faces[:, 0]],
        positions[faces[:, 2]] - positions[faces[:, 0]],
    )
    d = np.zeros_like(positions)
    half = 0.5 * cross
    for m in range(3):
        np.add.at(d, faces[:, m], half)
    return d, np.linalg.norm(d, axis=1)


def deformation_energy(positions, lam, normals, targets, edges) -> float:
    """Sum of squared violations (|p'_i - p'_j|^2 - L)^2 over the edges,
    with p' = p + lam * n."""
    e0, e1 = edges[:, 0], edges[:, 1]
    d = (
        positions[e0]
        - positions[e1]
        + lam[e0, None] * normals[e0]
        - lam[e1, None] * normals[e1]
    )
    viol = np.einsum("ij,ij->i", d, d) - targets
    return float(viol @ viol)


def deformation_gradient(positions, lam, normals, targets, edges) -> np.ndarray:
    """Exact dE/dlam: 4 * (|d|^2 - L) * <d, n_i> gathered per endpoint
    (matches central finite differences; both endpoints contribute)."""
    e0, e1 = edges[:, 0], edges[:, 1]
    d = (
        positions[e0]
        - positions[e1]
        + lam[e0, None] * normals[e0]
        - lam[e1, None] * normals[e1]
    )
    viol = np.einsum("ij,ij->i", d, d) - targets
    c0 = 4.0 * viol * np.einsum("ij,ij->i", d, normals[e0])
    c1 = -4.0 * viol * np.einsum("ij,ij->i", d, normals[e1])
    n = len(positions)
    return np.bincount(e0, weights=c0, minlength=n) + np.bincount(
        e1, weights=c1, minlength=n
    )


def _edge_key(i: int, j: int) -> tuple[int, int]:
    return (i, j) if i < j else (j, i)


def _replay_flips(faces: list, records: list[FlipRecord], to_parent: np.ndarray) -> None:
    """Apply the intrinsic solver's flips to the embedded face list."""
    edge_faces: dict[tuple[int, int], list[int]] = {}
    for fid, (a, b, c) in enumerate(faces):
        for i, j in ((a, b), (b, c), (c, a)):
            edge_faces.setdefault(_edge_key(i, j), []).append(fid)
    for rec in records:
        a, b = int(to_parent[rec.a]), int(to_parent[rec.b])
        c, d = int(to_parent[rec.c]), int(to_parent[rec.d])
        fids = edge_faces.pop(_edge_key(a, b))
        f1 = f2 = None
        for fid in fids:
            fa, fb, fc = faces[fid]
            if (a, b) in ((fa, fb), (fb, fc), (fc, fa)):
                f1 = fid
            else:
                f2 = fid
        if f1 is None or f2 is None:
            raise RuntimeError("flip replay lost track of the embedded faces")
        faces[f1] = (c, d, b)
        faces[f2] = (d, c, a)
        edge_faces[_edge_key(c, d)] = [f1, f2]
        fs = edge_faces[_edge_key(d, b)]
        fs[fs.index(f2)] = f1
        fs = edge_faces[_edge_key(c, a)]
        fs[fs.index(f1)] = f2


def run_extrinsic_flow(
    mesh: TriangleMesh,
    roi: RoiSelection,
    steps: int = 5,
    config: FlowConfig | None = None,
) -> tuple[TriangleMesh, list[StepReport]]:
    """Flatten the ROI in place over ``steps`` curvature stages.

    Returns the deformed mesh (connectivity includes any replayed flips)
    and one report per step. Positions outside the ROI are bit-identical
    to the input.
    """
    config = config or FlowConfig()
    if steps < 1:
        raise UsageError("steps must be >= 1")
    if not roi.interior:
        raise UsageError("ROI interior is empty: nothing can be flattened")

    n_vertices = mesh.vertex_count
    positions = mesh.positions.copy()
    faces: list[tuple[int, int, int]] = [tuple(f) for f in mesh.faces.tolist()]

    omega_mask = np.zeros(n_vertices, dtype=bool)
    omega_mask[sorted(roi.vertices)] = True
    movable_mask = omega_mask.copy()
    if config.pin_rim:
        movable_mask[sorted(roi.rim)] = False

    K0 = DiscreteMetric.from_mesh(mesh).vertex_curvature().values
    grad_tol = config.grad_tol_scale * float(mesh.edge_lengths().mean()) ** 2

    state = DeformationState(
        positions=positions,
        step_index=0,
        total_steps=steps,
        lam=np.zeros(n_vertices),
        flip_replay_log=[],
    )
    reports: list[StepReport] = []

    for k in range(1, steps + 1):
        target_full = schedule_target_curvature(K0, roi, k, steps)

        # ROI submesh on the current connectivity
        sub_faces = [f for f in faces if omega_mask[f[0]] and omega_mask[f[1]] and omega_mask[f[2]]]
        if not sub_faces:
            raise EmptySubmeshError("ROI spans no complete face")
        used = sorted({v for f in sub_faces for v in f})
        to_local = {p: l for l, p in enumerate(used)}
        to_parent = np.array(used, dtype=np.int64)
        local_faces = [(to_local[a], to_local[b], to_local[c]) for a, b, c in sub_faces]

        lengths: dict[tuple[int, int], float] = {}
        for la, lb, lc in local_faces:
            for i, j in ((la, lb), (lb, lc), (lc, la)):
                key = _edge_key(i, j)
                if key not in lengths:
                    pa, pb = used[key[0]], used[key[1]]
                    lengths[key] = float(np.linalg.norm(positions[pa] - positions[pb]))
        metric = DiscreteMetric(local_faces, lengths, vertex_count=len(used))

        frozen_local = np.array([p not in roi.interior for p in used], dtype=bool)
        target_local = target_full[to_parent]

        # parent edges inside the ROI that are not submesh edges must not be
        # recreated by flips (the embedding already uses them elsewhere)
        parent_edges = set()
        for fa, fb, fc in faces:
            for i, j in ((fa, fb), (fb, fc), (fc, fa)):
                parent_edges.add(_edge_key(i, j))
        forbidden = frozenset(
            _edge_key(to_local[i], to_local[j])
            for (i, j) in parent_edges
            if i in to_local and j in to_local
            and _edge_key(to_local[i], to_local[j]) not in metric._edge_index
        )

        lengths_out, factor, flow_report = run_intrinsic_flow(
            metric,
            target_local,
            frozen_local,
            epsilon=config.epsilon,
            max_iters=config.max_newton,
            forbidden_edges=forbidden,
        )

        flips_replayed = len(metric.flip_log)
        if metric.flip_log:
            _replay_flips(faces, metric.flip_log, to_parent)
            state.flip_replay_log.extend(
                (
                    int(to_parent[r.a]),
                    int(to_parent[r.b]),
                    int(to_parent[r.c]),
                    int(to_parent[r.d]),
                )
                for r in metric.flip_log
            )

        # active edges: >= 1 endpoint in the ROI, targets default to the
        # current embedded length, overridden by the intrinsic solution
        target_by_edge: dict[tuple[int, int], float] = {}
        for key, length in zip(metric.edges, lengths_out):
            pkey = _edge_key(int(to_parent[key[0]]), int(to_parent[key[1]]))
            target_by_edge[pkey] = float(length) ** 2

        edge_set = set()
        for fa, fb, fc in faces:
            for i, j in ((fa, fb), (fb, fc), (fc, fa)):
                edge_set.add(_edge_key(i, j))
        active = sorted(
            key for key in edge_set if omega_mask[key[0]] or omega_mask[key[1]]
        )
        edges = np.array(active, dtype=np.int64)
        cur = positions[edges[:, 0]] - positions[edges[:, 1]]
        targets = np.einsum("ij,ij->i", cur, cur)
        for idx, key in enumerate(active):
            hit = target_by_edge.get(key)
            if hit is not None:
                targets[idx] = hit

        # normals for this step, held fixed during the descent
        faces_arr = np.array(faces, dtype=np.int64)
        d_sum, d_norm = _vertex_normals_all(positions, faces_arr)
        bad = (d_norm <= NORMAL_FLOOR) & movable_mask
        if bad.any():
            raise ZeroNormalError(
                f"incident normals cancel at vertex {int(np.flatnonzero(bad)[0])}"
            )
        normals = np.zeros_like(d_sum)
        ok = d_norm > NORMAL_FLOOR
        normals[ok] = d_sum[ok] / d_norm[ok, None]

        # The descent evaluates the energy along a fixed direction as the
        # exact quartic it is: one pass per iteration builds the
        # coefficients, each backtrack then costs O(1).
        e0, e1 = edges[:, 0], edges[:, 1]
        base = positions[e0] - positions[e1]
        n0, n1 = normals[e0], normals[e1]

        lam = np.zeros(n_vertices)
        d = base.copy()
        viol = np.einsum("ij,ij->i", d, d) - targets
        energy = float(viol @ viol)
        energies = [energy]
        failures = 0
        scale = 1.0
        grad_inf = 0.0
        gd_iterations = 0
        for _ in range(config.max_gd):
            c0 = 4.0 * viol * np.einsum("ij,ij->i", d, n0)
            c1 = -4.0 * viol * np.einsum("ij,ij->i", d, n1)
            g = np.bincount(e0, weights=c0, minlength=n_vertices) + np.bincount(
                e1, weights=c1, minlength=n_vertices
            )
            g[~movable_mask] = 0.0
            grad_inf = float(np.max(np.abs(g))) if len(g) else 0.0
            if grad_inf < grad_tol:
                break
            gg = float(g @ g)
            w = -(g[e0, None] * n0 - g[e1, None] * n1)
            lin = 2.0 * np.einsum("ij,ij->i", d, w)
            quad = np.einsum("ij,ij->i", w, w)
            a1 = 2.0 * float(viol @ lin)
            a2 = float(lin @ lin) + 2.0 * float(viol @ quad)
            a3 = 2.0 * float(lin @ quad)
            a4 = float(quad @ quad)

            t = scale / grad_inf
            accepted = False
            for _ in range(config.max_backtracks):
                et = energy + t * (a1 + t * (a2 + t * (a3 + t * a4)))
                if et <= energy - config.armijo_c * t * gg:
                    accepted = True
                    break
                t *= config.backtrack
            if accepted:
                lam = lam - t * g
                d = (
                    base
                    + lam[e0, None] * n0
                    - lam[e1, None] * n1
                )
                viol = np.einsum("ij,ij->i", d, d) - targets
                energy = float(viol @ viol)
                energies.append(energy)
                failures = 0
                gd_iterations += 1
            else:
                failures += 1
                scale *= 0.5
                if failures >= config.max_ls_failures:
                    raise LineSearchError(
                        f"line search failed {failures} times in step {k}"
                    )

        if np.any(lam != 0.0):
            positions[movable_mask] += (
                lam[movable_mask, None] * normals[movable_mask]
            )
        state.lam = lam
        state.step_index = k

        reports.append(
            StepReport(
                step=k,
                kbar_fraction=1.0 - k / steps,
                intrinsic=flow_report,
                flips_replayed=flips_replayed,
                gd_iterations=gd_iterations,
                energies=energies,
                grad_inf_final=grad_inf,
            )
        )

    deformed = TriangleMesh(positions, np.array(faces, dtype=np.int64), check_areas=False)
    return deformed, reports
