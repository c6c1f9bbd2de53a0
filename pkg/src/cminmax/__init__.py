"""Corner detection for convex polytopes by rotating a point cloud and
harvesting coordinate extremes."""

from .cone import BoundingCone, VertexFan, min_bounding_cone, polytope_phi_max
from .detector import CornerSet, DetectorConfig, cluster, detect, detect_adaptive, detect_random
from .errors import (
    BudgetExceededError,
    CMinMaxError,
    ConfigError,
    DimensionError,
    EmptyCloudError,
    FormatError,
    IoError,
    NoCornersError,
    NotConvexVertexError,
    ParseError,
)
from .geom import PlanarRotation, PointCloud, Rotation, apply_rotation
from .oracle import hull_vertex_indices, hull_vertices, match_corners
from .schedule import Harvest, Mode, RotationSchedule, ScheduleConfig, expected_random_rotations
from .shapes import Sampling, ShapeKind, ShapeSpec, generate

__all__ = [
    "BoundingCone", "BudgetExceededError", "CMinMaxError", "ConfigError", "CornerSet",
    "DetectorConfig", "DimensionError", "EmptyCloudError", "FormatError", "Harvest",
    "IoError", "Mode", "NoCornersError", "NotConvexVertexError", "ParseError",
    "PlanarRotation", "PointCloud", "Rotation", "RotationSchedule", "Sampling",
    "ScheduleConfig", "ShapeKind", "ShapeSpec", "VertexFan", "apply_rotation", "cluster",
    "detect", "detect_adaptive", "detect_random", "expected_random_rotations", "generate",
    "hull_vertex_indices", "hull_vertices", "match_corners", "min_bounding_cone",
    "polytope_phi_max",
]
