"""Command-line driver: curvature analysis, geodesic ROI selection, and the
full flattening pipeline with machine-readable reports.

Exit codes: 1 usage, 2 io/parse, 3 topology, 4 numerical.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
import time
from dataclasses import dataclass

import numpy as np

from . import __version__
from .distortion import build_report, histogram_csv, histogram_json, roi_face_scope
from .errors import (
    MeshFormatError,
    NumericalError,
    RoiParseError,
    TopologyError,
    UsageError,
)
from .extrinsic import FlowConfig, run_extrinsic_flow
from .mesh import (
    RoiSelection,
    TriangleMesh,
    detect_format,
    euler_characteristic,
    geodesic_ball,
    load_mesh,
    load_roi,
    save_mesh,
    save_roi,
    _read_text,
)
from .metric import DiscreteMetric, gauss_bonnet_residual

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_IO = 2
EXIT_TOPOLOGY = 3
EXIT_NUMERICAL = 4

SCHEMA = "lmap/1"


@dataclass
class RunConfig:
    """Flatten-pipeline options as exposed on the command line."""

    steps: int = 5
    epsilon: float = 1e-6
    max_newton: int = 50
    max_gd: int = 500
    pin_rim: bool = False
    seed: int | None = None
    radius: float | None = None

    def validate(self) -> None:
        if self.steps < 1:
            raise UsageError("steps must be >= 1")
        if self.epsilon <= 0:
            raise UsageError("epsilon must be > 0")
        if self.max_newton < 1 or self.max_gd < 0:
            raise UsageError("iteration limits must be positive")

    def flow_config(self) -> FlowConfig:
        return FlowConfig(
            epsilon=self.epsilon,
            max_newton=self.max_newton,
            max_gd=self.max_gd,
            pin_rim=self.pin_rim,
        )


def thread_cap() -> int:
    """Worker cap from LMAP_THREADS (>=1), defaulting to min(4, cpus)."""
    raw = os.environ.get("LMAP_THREADS")
    if raw is None:
        return max(1, min(4, os.cpu_count() or 1))
    try:
        value = int(raw)
    except ValueError:
        raise UsageError(f"LMAP_THREADS must be an integer, got {raw!r}")
    if value < 1:
        raise UsageError("LMAP_THREADS must be >= 1")
    return value


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse would exit(2); usage errors are 1
        raise UsageError(message)


def _load_mesh_with_format(path: str) -> tuple[TriangleMesh, str]:
    text = _read_text(path)
    fmt = detect_format(path, text)
    return load_mesh(text.encode(), format=fmt), fmt


def _resolve_roi(mesh: TriangleMesh, args) -> RoiSelection:
    has_file = getattr(args, "roi", None) is not None
    has_ball = args.seed is not None or args.radius is not None
    if has_file == has_ball:
        raise UsageError("provide exactly one of --roi or --seed/--radius")
    if has_file:
        roi = load_roi(args.roi, mesh)
    else:
        if args.seed is None or args.radius is None:
            raise UsageError("--seed and --radius go together")
        roi = RoiSelection.from_vertices(
            mesh, geodesic_ball(mesh, args.seed, args.radius)
        )
    if not roi.vertices:
        raise UsageError("ROI is empty")
    return roi


def _dump_json(payload: dict, target=None) -> str:
    text = json.dumps(payload, indent=2) + "\n"
    if target is not None:
        with open(target, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    return text


def cmd_analyze(args) -> int:
    mesh, _ = _load_mesh_with_format(args.mesh)
    metric = DiscreteMetric.from_mesh(mesh)
    field = metric.vertex_curvature()
    chi = euler_characteristic(mesh)
    payload = {
        "schema": SCHEMA,
        "v": mesh.vertex_count,
        "e": mesh.edge_count,
        "f": mesh.face_count,
        "chi": chi,
        "boundary_loops": mesh.boundary_loop_count(),
        "curvature_min": float(field.values.min()),
        "curvature_max": float(field.values.max()),
        "curvature_sum": float(field.values.sum()),
        "gb_residual": gauss_bonnet_residual(field, chi),
    }
    sys.stdout.write(_dump_json(payload))
    return EXIT_OK


def cmd_select(args) -> int:
    mesh, _ = _load_mesh_with_format(args.mesh)
    if args.radius < 0:
        raise UsageError("radius must be >= 0")
    ball = geodesic_ball(mesh, args.seed, args.radius)
    save_roi(ball, args.output)
    sys.stdout.write(_dump_json({"schema": SCHEMA, "selected": int(len(ball))}))
    return EXIT_OK


def _step_payload(report) -> dict:
    return {
        "step": report.step,
        "kbar_fraction": report.kbar_fraction,
        "converged": report.intrinsic.converged,
        "newton_iterations": report.intrinsic.iterations,
        "max_residual": report.intrinsic.max_residual,
        "flips": report.intrinsic.flips_total,
        "flips_replayed": report.flips_replayed,
        "gd_iterations": report.gd_iterations,
        "energy_initial": report.energies[0],
        "energy_final": report.energies[-1],
        "grad_inf_final": report.grad_inf_final,
    }


def _distortion_payload(original, deformed, roi) -> dict:
    dist = build_report(original, deformed, roi)
    eps = dist.area_eps[np.isfinite(dist.area_eps)]
    eta = dist.angle_eta[np.isfinite(dist.angle_eta)]
    def stats(x):
        if len(x) == 0:
            return {"min": None, "max": None, "mean": None}
        return {"min": float(x.min()), "max": float(x.max()), "mean": float(x.mean())}
    return {
        "schema": SCHEMA,
        "scope": {
            "vertices": int(len(eps)),
            "corners": int(len(eta)),
        },
        "area_eps": {**histogram_json(dist.area_hist), **stats(eps)},
        "angle_eta": {**histogram_json(dist.angle_hist), **stats(eta)},
    }, dist


def cmd_flatten(args) -> int:
    config = RunConfig(
        steps=args.steps,
        epsilon=args.epsilon,
        max_newton=args.max_newton,
        max_gd=args.max_gd,
        pin_rim=args.pin_rim,
        seed=args.seed,
        radius=args.radius,
    )
    config.validate()
    t0 = time.perf_counter()
    mesh, fmt = _load_mesh_with_format(args.mesh)
    roi = _resolve_roi(mesh, args)

    deformed, steps = run_extrinsic_flow(
        mesh, roi, steps=config.steps, config=config.flow_config()
    )
    elapsed = time.perf_counter() - t0

    save_mesh(deformed, args.output, format=fmt)

    interior = sorted(roi.interior)
    K = DiscreteMetric.from_mesh(deformed).vertex_curvature().values
    payload = {
        "schema": SCHEMA,
        "config": {
            "steps": config.steps,
            "epsilon": config.epsilon,
            "max_newton": config.max_newton,
            "max_gd": config.max_gd,
            "pin_rim": config.pin_rim,
        },
        "roi": {
            "size": len(roi.vertices),
            "interior": len(roi.interior),
            "rim": len(roi.rim),
        },
        "steps": [_step_payload(r) for r in steps],
        "flips_total": sum(r.flips_replayed for r in steps),
        "final_curvature": {
            "interior_max_abs": float(np.max(np.abs(K[interior]))),
            "interior_sum_abs": float(np.sum(np.abs(K[interior]))),
        },
    }
    if not args.no_timing:
        payload["timing"] = {"total_s": elapsed}
    if args.report:
        _dump_json(payload, args.report)

    if args.distortion:
        original_replayed = TriangleMesh(
            mesh.positions, deformed.faces, check_areas=False
        )
        dist_payload, dist = _distortion_payload(original_replayed, deformed, roi)
        if args.distortion.endswith(".csv"):
            lines = ["metric,edge_lo,edge_hi,count"]
            for name, hist in (("area_eps", dist.area_hist), ("angle_eta", dist.angle_hist)):
                body = histogram_csv(hist).strip().splitlines()[1:]
                lines.extend(f"{name},{row}" for row in body)
            with open(args.distortion, "w", encoding="utf-8", newline="\n") as fh:
                fh.write("\n".join(lines) + "\n")
        else:
            _dump_json(dist_payload, args.distortion)

    summary = {
        "schema": SCHEMA,
        "output": args.output,
        "converged": all(r.intrinsic.converged for r in steps),
        "interior_max_abs_curvature": payload["final_curvature"]["interior_max_abs"],
    }
    sys.stdout.write(_dump_json(summary))
    return EXIT_OK


def cmd_serve(args) -> int:
    import uvicorn

    from .server import create_app

    uvicorn.run(create_app(), host=args.host, port=args.port, log_level="info")
    return EXIT_OK


def build_parser() -> _Parser:
    parser = _Parser(prog="lmap", description=__doc__)
    parser.add_argument("--version", action="version", version=f"lmap {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("analyze", help="mesh stats, curvature, Gauss-Bonnet residual")
    p.add_argument("mesh")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("select", help="write a geodesic-ball ROI file")
    p.add_argument("mesh")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--radius", type=float, required=True)
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=cmd_select)

    p = sub.add_parser("flatten", help="run the local flattening pipeline")
    p.add_argument("mesh")
    p.add_argument("--roi", help="ROI file (one 0-based vertex index per line)")
    p.add_argument("--seed", type=int, help="geodesic-ball ROI seed vertex")
    p.add_argument("--radius", type=float, help="geodesic-ball ROI radius")
    p.add_argument("--steps", type=int, default=5)
    p.add_argument("--epsilon", type=float, default=1e-6)
    p.add_argument("--max-newton", type=int, default=50)
    p.add_argument("--max-gd", type=int, default=500)
    p.add_argument("--pin-rim", action="store_true")
    p.add_argument("--no-timing", action="store_true",
                   help="omit wall-clock fields for byte-stable reports")
    p.add_argument("-o", "--output", required=True)
    p.add_argument("--report", help="write the run report JSON here")
    p.add_argument("--distortion", help="write ROI distortion data (.json or .csv)")
    p.set_defaults(func=cmd_flatten)

    p = sub.add_parser("serve", help="start the local HTTP service")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)
    p.set_defaults(func=cmd_serve)

    return parser


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (MeshFormatError, RoiParseError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except TopologyError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_TOPOLOGY
    except NumericalError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
