"""Newton-iterated dynamic discrete Ricci (Yamabe) flow.

Solves for per-vertex log scale factors u whose conformal edge lengths
l_ij = exp(u_i) * beta_ij * exp(u_j) realize a prescribed vertex curvature,
keeping the triangulation intrinsically Delaunay by edge flipping between
Newton steps.

Sign conventions, fixed by finite differences: the Jacobian of the vertex
curvature with respect to u is the positive-semidefinite cotangent
Laplacian (dK_i/du_j = -w_ij off-diagonal, dK_i/du_i = sum_j w_ij), so a
Newton step solves  H du = (kbar - K)  with that Laplacian as H.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np
from scipy import sparse
from scipy.sparse.linalg import spsolve

from .errors import (
    ConformalOverflowError,
    NonConvergenceError,
    SolveError,
    UsageError,
)
from .metric import DiscreteMetric

U_CAP = 40.0  # |u| beyond this risks overflow in exp(2u)
DEFAULT_EPSILON = 1e-6  # radians
DEFAULT_MAX_ITERS = 50
MAX_HALVINGS = 20
GAUSS_BONNET_TOL = 1e-8


@dataclass
class ConformalFactor:
    """Per-vertex log scale factor; frozen vertices keep u = 0."""

    u: np.ndarray
    frozen: np.ndarray


@dataclass
class FlowReport:
    iterations: int
    max_residual: float
    flips_total: int
    converged: bool
    residual_history: list = field(default_factory=list)


class IntrinsicResult(NamedTuple):
    lengths: np.ndarray
    factor: ConformalFactor
    report: FlowReport


def conformal_lengths(u: np.ndarray, metric: DiscreteMetric) -> np.ndarray:
    """l = exp(u_i) * beta * exp(u_j) for every current edge."""
    worst = float(np.max(np.abs(u))) if len(u) else 0.0
    if worst > U_CAP:
        raise ConformalOverflowError(f"|u| = {worst:.3f} exceeds cap {U_CAP}")
    e = metric.edge_array
    return np.exp(u[e[:, 0]] + u[e[:, 1]]) * metric.beta


def ricci_energy_gradient(
    metric: DiscreteMetric, factor: ConformalFactor, target: np.ndarray
) -> np.ndarray:
    """(kbar - K) on unfrozen vertices, 0 on frozen ones.

    This is the negative energy gradient, i.e. the Newton right-hand side.
    """
    K = metric.vertex_curvature(conformal_lengths(factor.u, metric)).values
    g = np.where(factor.frozen, 0.0, target - K)
    if np.any(~np.isfinite(g)):
        raise UsageError("target curvature must be set on every unfrozen vertex")
    return g


def ricci_hessian(metric: DiscreteMetric, frozen: np.ndarray | None = None):
    """Curvature Jacobian dK/du: the PSD cotangent-weight Laplacian.

    Off-diagonal entries are -w_ij for adjacent vertices, diagonals are
    sum_j w_ij; rows/columns of frozen vertices are removed. Symmetric,
    full-mesh row sums are zero.
    """
    w = metric.cotangent_weights()
    e = metric.edge_array
    i, j = e[:, 0], e[:, 1]
    rows = np.concatenate([i, j, i, j])
    cols = np.concatenate([j, i, i, j])
    vals = np.concatenate([-w, -w, w, w])
    n = metric.vertex_count
    H = sparse.coo_matrix((vals, (rows, cols)), shape=(n, n)).tocsr()
    if frozen is not None and frozen.any():
        keep = np.flatnonzero(~frozen)
        H = H[keep][:, keep]
    return H


def _newton_delta(H, rhs: np.ndarray, gauge: bool) -> np.ndarray:
    """Solve H du = rhs; on closed problems the constant mode is grounded
    and removed afterwards by the caller's mean subtraction."""
    if gauge:
        if H.shape[0] < 2:
            return np.zeros_like(rhs)
        Hg = H[1:][:, 1:].tocsc()
        x = spsolve(Hg, rhs[1:])
        delta = np.concatenate([[0.0], np.atleast_1d(x)])
    else:
        delta = np.atleast_1d(spsolve(H.tocsc(), rhs))
    if not np.all(np.isfinite(delta)):
        raise SolveError("sparse solve produced non-finite Newton step")
    return delta


def run_intrinsic_flow(
    metric: DiscreteMetric,
    target: np.ndarray,
    frozen: np.ndarray | None = None,
    *,
    epsilon: float = DEFAULT_EPSILON,
    max_iters: int = DEFAULT_MAX_ITERS,
    initial_u: np.ndarray | None = None,
    forbidden_edges: frozenset = frozenset(),
) -> IntrinsicResult:
    """Flow the metric's edge lengths to realize ``target`` curvature.

    ``target`` is per-vertex in radians; entries at frozen vertices are
    ignored (NaN is fine there). With no frozen vertices the target must
    satisfy Gauss-Bonnet and the solution is pinned to mean(u) = 0.
    Mutates ``metric`` (lengths and, via Delaunay flips, connectivity);
    pass a copy to keep the original. Newton steps are halved until the
    max residual does not increase and the triangle inequality holds.
    """
    n = metric.vertex_count
    target = np.asarray(target, dtype=float)
    if target.shape != (n,):
        raise UsageError(f"target must have shape ({n},)")
    if frozen is None:
        frozen = np.zeros(n, dtype=bool)
    frozen = np.asarray(frozen, dtype=bool)
    constrained = ~frozen
    if not constrained.any():
        raise UsageError("no unfrozen vertices: nothing to solve")
    kbar = target[constrained]
    if np.any(~np.isfinite(kbar)):
        raise UsageError("target curvature unset on an unfrozen vertex")
    if np.any(kbar >= 2.0 * math.pi):
        raise UsageError("target curvature must stay below 2*pi")

    gauge = not frozen.any()
    if gauge:
        chi = metric.vertex_count - len(metric.edges) + len(metric.faces)
        total = float(target.sum())
        if abs(total - 2.0 * math.pi * chi) > GAUSS_BONNET_TOL:
            raise UsageError(
                f"target curvature sums to {total:.9f}, Gauss-Bonnet needs "
                f"{2.0 * math.pi * chi:.9f}"
            )

    u = np.zeros(n) if initial_u is None else np.array(initial_u, dtype=float)
    if u.shape != (n,):
        raise UsageError(f"initial_u must have shape ({n},)")
    if np.any(u[frozen] != 0.0):
        raise UsageError("initial_u must be 0 on frozen vertices")

    # beta for flipped-in edges: de-conformalize the layout diagonal at flip
    # time so l = e^u beta e^u stays the single source of lengths
    metric.beta_hook = lambda c, d, length: length * math.exp(-(u[c] + u[d]))

    unknown = np.flatnonzero(constrained)
    flips_total = 0
    history: list[float] = []
    iterations = 0
    converged = False

    try:
        while True:
            metric.lengths = conformal_lengths(u, metric)
            flips_total += metric.make_delaunay(forbidden=forbidden_edges)
            K = metric.vertex_curvature().values
            residual = float(np.max(np.abs(target[constrained] - K[constrained])))
            history.append(residual)
            if residual < epsilon:
                converged = True
                break
            if iterations >= max_iters:
                break

            H = ricci_hessian(metric, frozen)
            rhs = (target - K)[unknown]
            delta = np.zeros(n)
            delta[unknown] = _newton_delta(H, rhs, gauge)

            step = 1.0
            accepted = False
            for _ in range(MAX_HALVINGS + 1):
                trial = u + step * delta
                if np.max(np.abs(trial)) > U_CAP:
                    step *= 0.5
                    continue
                lengths_t = conformal_lengths(trial, metric)
                if not metric.triangle_inequality_ok(lengths_t):
                    step *= 0.5
                    continue
                Kt = metric.vertex_curvature(lengths_t).values
                residual_t = float(
                    np.max(np.abs(target[constrained] - Kt[constrained]))
                )
                if residual_t <= residual:
                    accepted = True
                    break
                step *= 0.5
            if not accepted:
                raise NonConvergenceError(
                    f"Newton damping failed at residual {residual:.3e}"
                )
            u[:] = trial
            if gauge:
                u -= u.mean()
            iterations += 1
    finally:
        metric.beta_hook = None

    report = FlowReport(
        iterations=iterations,
        max_residual=history[-1],
        flips_total=flips_total,
        converged=converged,
        residual_history=history,
    )
    if not converged:
        raise NonConvergenceError(
            f"no convergence after {iterations} Newton iterations "
            f"(residual {history[-1]:.3e} >= {epsilon:.1e})"
        )
    return IntrinsicResult(
        lengths=metric.lengths.copy(),
        factor=ConformalFactor(u=u.copy(), frozen=frozen.copy()),
        report=report,
    )
