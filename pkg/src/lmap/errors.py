"""Exception hierarchy shared by all lmap modules.

The CLI maps these onto exit codes (usage=1, io/parse=2, topology=3,
numerical=4); the HTTP service maps them onto status codes.
"""


class LmapError(Exception):
    """Base class for all errors raised by this package."""


class UsageError(LmapError):
    """Invalid request: bad arguments, empty ROI, nonsensical config."""


class MeshFormatError(LmapError):
    """Malformed OBJ/OFF content or a non-triangle face."""


class RoiParseError(LmapError):
    """Malformed ROI file or vertex index out of range."""


class TopologyError(LmapError):
    """Non-manifold edge, inconsistent orientation, or bad face indices."""


class DegenerateFaceError(TopologyError):
    """Face with (near-)zero embedded area."""


class EmptySubmeshError(UsageError):
    """ROI selection spans no complete face."""


class NumericalError(LmapError):
    """Base class for solver / metric failures."""


class DegenerateMetricError(NumericalError):
    """Edge lengths violate the triangle inequality beyond tolerance."""


class NonFlippableError(NumericalError):
    """Edge flip rejected: boundary edge, non-convex quad, or duplicate edge."""


class FlipLimitError(NumericalError):
    """Delaunay flipping exceeded its hard iteration cap."""


class SolveError(NumericalError):
    """Sparse linear solve produced no usable solution."""


class NonConvergenceError(NumericalError):
    """Newton iteration did not reach the residual threshold."""


class ConformalOverflowError(NumericalError):
    """A conformal factor left the safe range |u| <= 40."""


class ZeroNormalError(NumericalError):
    """Incident face normals cancel; vertex normal undefined."""


class LineSearchError(NumericalError):
    """Gradient descent repeatedly failed to reduce the energy."""
