"""Visuo-locomotive complexity: metrics, classification and morphology
manipulation for navigation paths through built environments."""

from .errors import (
    DegenerateGeometry,
    EmptyReport,
    InfeasibleRequest,
    InvalidScore,
    MissingCorridor,
    OutOfBounds,
    ParseError,
    UnknownAttribute,
    ValidationError,
    VLCError,
)
from .geometry import Point2, Polygon, Polyline, polygon_area, segment_path
from .metrics import (
    AttributeProfile,
    ClutterMeasure,
    OrderMeasure,
    RotationMeasure,
    SizeMeasure,
    SymmetryMeasure,
    VisibilityMeasure,
    clutter_metric,
    compute_profile,
    order_metric,
    rotation_metric,
    size_metric,
    symmetry_metric,
    visibility_metric,
)
from .scale import (
    ATTRIBUTES,
    Attribute,
    AttributeResult,
    ComplexityReport,
    ScaleConfig,
    SegmentReport,
    aggregate,
    classify,
    identify,
    normalize,
    preference_score,
)
from .scene import (
    Bounds,
    CorridorSegment,
    NavPath,
    Obstacle,
    PathSegment,
    Scene,
    line_of_sight,
    ray_cast,
    transform_scene_path,
)

__version__ = "0.1.0"
