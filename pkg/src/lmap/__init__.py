"""Local shape-preserving flattening of mesh regions via surface Ricci flow."""

from .distortion import (
    DistortionReport,
    Histogram,
    angle_distortion,
    area_distortion,
    build_report,
    histogram,
)
from .errors import LmapError
from .extrinsic import (
    FlowConfig,
    StepReport,
    deformation_energy,
    deformation_gradient,
    face_area_normal,
    run_extrinsic_flow,
    schedule_target_curvature,
    vertex_normal,
)
from .intrinsic import (
    ConformalFactor,
    FlowReport,
    conformal_lengths,
    ricci_energy_gradient,
    ricci_hessian,
    run_intrinsic_flow,
)
from .mesh import (
    RoiSelection,
    TriangleMesh,
    euler_characteristic,
    extract_roi_submesh,
    geodesic_ball,
    load_mesh,
    load_roi,
    save_mesh,
)
from .metric import CurvatureField, DiscreteMetric, gauss_bonnet_residual

__version__ = "0.1.0"

__all__ = [
    "ConformalFactor",
    "CurvatureField",
    "DiscreteMetric",
    "DistortionReport",
    "FlowConfig",
    "FlowReport",
    "Histogram",
    "LmapError",
    "RoiSelection",
    "StepReport",
    "TriangleMesh",
    "angle_distortion",
    "area_distortion",
    "build_report",
    "conformal_lengths",
    "deformation_energy",
    "deformation_gradient",
    "euler_characteristic",
    "extract_roi_submesh",
    "face_area_normal",
    "gauss_bonnet_residual",
    "geodesic_ball",
    "histogram",
    "load_mesh",
    "load_roi",
    "ricci_energy_gradient",
    "ricci_hessian",
    "run_extrinsic_flow",
    "run_intrinsic_flow",
    "save_mesh",
    "schedule_target_curvature",
    "vertex_normal",
    "__version__",
]
