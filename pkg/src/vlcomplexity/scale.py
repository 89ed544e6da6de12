"""Normalization of raw metrics to [0, 1] complexity scores, binning into
classes 1-5, aggregation to an overall class, and the moderate-class
preference curve peaking at class 3."""

from __future__ import annotations

import math
from bisect import bisect_right
from dataclasses import dataclass, field, replace
from enum import Enum

from .errors import EmptyReport, InvalidScore, UnknownAttribute
from .metrics import AttributeProfile, compute_profile
from .scene import NavPath, Scene


class Attribute(str, Enum):
    ROTATION = "rotation"
    SIZE = "size"
    VISIBILITY = "visibility"
    SYMMETRY = "symmetry"
    CLUTTER = "clutter"
    ORDER = "order"


class Direction(Enum):
    INCREASES = "+"
    DECREASES = "-"
    U_SHAPED = "+/-"


#: How each attribute's raw value relates to complexity.
DIRECTIONS: dict[Attribute, Direction] = {
    Attribute.ROTATION: Direction.INCREASES,
    Attribute.SIZE: Direction.U_SHAPED,
    Attribute.VISIBILITY: Direction.DECREASES,
    Attribute.SYMMETRY: Direction.DECREASES,
    Attribute.CLUTTER: Direction.INCREASES,
    Attribute.ORDER: Direction.DECREASES,
}

ATTRIBUTES: tuple[Attribute, ...] = tuple(Attribute)


@dataclass(frozen=True)
class ScaleConfig:
    """Normalization caps, class bin edges and sampling knobs.

    rotation_degrees_cap is a rate: accumulated degrees per 100 m of path that
    saturates the rotation score. The size comfort bands are the width/height
    ranges that score zero; deviation is relative to the violated band edge.
    """

    rotation_degrees_cap: float = 360.0
    clutter_cap: float = 0.5
    width_comfort: tuple[float, float] = (1.8, 6.0)
    height_comfort: tuple[float, float] = (2.4, 5.0)
    size_deviation_cap: float = 1.0
    bin_edges: tuple[float, float, float, float] = (0.2, 0.4, 0.6, 0.8)
    turn_threshold_deg: float = 15.0
    sample_spacing: float = 1.0
    visibility_mode: str = "endpoint"
    order_residual_tolerance: float = 0.25
    weights: dict[str, float] = field(
        default_factory=lambda: {a.value: 1.0 for a in Attribute}
    )

    def __post_init__(self):
        edges = self.bin_edges
        if not all(0.0 < a < 1.0 for a in edges) or any(
            b <= a for a, b in zip(edges, edges[1:])
        ):
            raise InvalidScore(f"bin edges must be strictly increasing within (0,1): {edges}")
        for name in ("rotation_degrees_cap", "clutter_cap", "size_deviation_cap"):
            if getattr(self, name) <= 0:
                raise InvalidScore(f"{name} must be > 0")
        if not 0.0 < self.turn_threshold_deg < 180.0:
            raise InvalidScore("turn_threshold_deg must be in (0, 180)")

    def to_dict(self) -> dict:
        return {
            "rotation_degrees_cap": self.rotation_degrees_cap,
            "clutter_cap": self.clutter_cap,
            "width_comfort": list(self.width_comfort),
            "height_comfort": list(self.height_comfort),
            "size_deviation_cap": self.size_deviation_cap,
            "bin_edges": list(self.bin_edges),
            "turn_threshold_deg": self.turn_threshold_deg,
            "sample_spacing": self.sample_spacing,
            "visibility_mode": self.visibility_mode,
            "order_residual_tolerance": self.order_residual_tolerance,
            "weights": dict(self.weights),
        }

    @classmethod
    def from_dict(cls, data: dict) -> ScaleConfig:
        kwargs = dict(data)
        for key in ("width_comfort", "height_comfort", "bin_edges"):
            if key in kwargs:
                kwargs[key] = tuple(kwargs[key])
        return cls(**kwargs)

    def with_overrides(self, **kwargs) -> ScaleConfig:
        return replace(self, **kwargs)


def _clamp01(v: float) -> float:
    return max(0.0, min(1.0, v))


def _band_deviation(value: float, band: tuple[float, float]) -> float:
    lo, hi = band
    if value < lo:
        return (lo - value) / lo
    if value > hi:
        return (value - hi) / hi
    return 0.0


def normalize(
    attribute: Attribute | str,
    raw,
    config: ScaleConfig,
    *,
    path_length: float | None = None,
) -> float:
    """Map a raw metric value to a complexity score in [0, 1].

    raw is the accumulated degrees for rotation (path_length required), a
    (mean_width, mean_height) pair for size, and a fraction in [0, 1] for the
    remaining attributes.
    """
    try:
        attribute = Attribute(attribute)
    except ValueError:
        raise UnknownAttribute(f"unknown attribute id {attribute!r}") from None
    if attribute is Attribute.ROTATION:
        if path_length is None or path_length <= 0:
            raise InvalidScore("rotation normalization needs a positive path length")
        rate = float(raw) * 100.0 / path_length
        return _clamp01(rate / config.rotation_degrees_cap)
    if attribute is Attribute.SIZE:
        width, height = raw
        dev = max(
            _band_deviation(float(width), config.width_comfort),
            _band_deviation(float(height), config.height_comfort),
        )
        return _clamp01(dev / config.size_deviation_cap)
    if attribute is Attribute.CLUTTER:
        return _clamp01(float(raw) / config.clutter_cap)
    # Inversely proportional attributes: raw already a fraction in [0, 1].
    return _clamp01(1.0 - float(raw))


def classify(score: float, config: ScaleConfig | None = None) -> int:
    """Bin a score into class 1-5. Bins: [0,e1) -> 1 ... [e4,1] -> 5."""
    edges = (config or ScaleConfig()).bin_edges
    if not 0.0 <= score <= 1.0:
        raise InvalidScore(f"score {score} outside [0, 1]")
    return 1 + bisect_right(list(edges), score)


def aggregate(
    classes, weights: dict[str, float] | None = None
) -> tuple[float, int]:
    """Weighted mean of per-attribute classes and the round-half-up overall class."""
    if isinstance(classes, dict):
        items = list(classes.items())
    else:
        items = [(str(i), c) for i, c in enumerate(classes)]
    if not items:
        raise EmptyReport("no attribute classes to aggregate")
    total_w = 0.0
    total = 0.0
    for key, cls in items:
        w = (weights or {}).get(key, 1.0)
        total_w += w
        total += w * cls
    if total_w <= 0:
        raise EmptyReport("attribute weights sum to zero")
    mean = total / total_w
    overall = int(math.floor(mean + 0.5))
    return mean, max(1, min(5, overall))


def preference_score(aggregate_mean: float) -> float:
    """Unimodal designer-preference curve over the class scale, peaking at 3."""
    if not 1.0 <= aggregate_mean <= 5.0:
        raise InvalidScore(f"aggregate mean {aggregate_mean} outside [1, 5]")
    return 1.0 - ((aggregate_mean - 3.0) / 2.0) ** 2


# ----------------------------------------------------------------------
# Reports
# ----------------------------------------------------------------------


@dataclass(frozen=True)
class AttributeResult:
    attribute: str
    raw: float
    score: float
    cls: int
    detail: dict = field(default_factory=dict, compare=False)

    def to_dict(self) -> dict:
        d = {"raw": self.raw, "score": self.score, "class": self.cls}
        if self.detail:
            d["detail"] = self.detail
        return d


@dataclass(frozen=True)
class SegmentReport:
    index: int
    chainage_start: float
    chainage_end: float
    attributes: dict[str, AttributeResult]
    mean: float
    cls: int

    def to_dict(self) -> dict:
        return {
            "index": self.index,
            "chainage_start": self.chainage_start,
            "chainage_end": self.chainage_end,
            "attributes": {k: v.to_dict() for k, v in self.attributes.items()},
            "aggregate_mean": self.mean,
            "class": self.cls,
        }


@dataclass(frozen=True)
class ComplexityReport:
    attributes: dict[str, AttributeResult]
    segments: tuple[SegmentReport, ...]
    aggregate_mean: float
    overall_class: int
    preference: float

    def to_dict(self) -> dict:
        return {
            "attributes": {k: v.to_dict() for k, v in self.attributes.items()},
            "segments": [s.to_dict() for s in self.segments],
            "aggregate_mean": self.aggregate_mean,
            "overall_class": self.overall_class,
            "preference": self.preference,
        }

    def attribute_class(self, attribute: Attribute | str) -> int:
        return self.attributes[Attribute(attribute).value].cls


def _attr_result(
    attribute: Attribute, raw, score: float, config: ScaleConfig, detail: dict | None = None
) -> AttributeResult:
    return AttributeResult(
        attribute=attribute.value,
        raw=float(raw),
        score=float(score),
        cls=classify(score, config),
        detail=detail or {},
    )


def report_from_profile(
    profile: AttributeProfile, path_length: float, config: ScaleConfig
) -> ComplexityReport:
    """Normalize, classify and aggregate an attribute profile into a report."""
    rot_score = normalize(Attribute.ROTATION, profile.rotation.accumulated_degrees, config, path_length=path_length)
    size_score = normalize(Attribute.SIZE, (profile.size.mean_width, profile.size.mean_height), config)
    vis_score = normalize(Attribute.VISIBILITY, profile.visibility.visible_fraction, config)
    sym_score = normalize(Attribute.SYMMETRY, profile.symmetry.best_score, config)
    clu_score = normalize(Attribute.CLUTTER, profile.clutter.coverage_fraction, config)
    ord_score = normalize(Attribute.ORDER, profile.order.ordered_fraction, config)

    ax = profile.symmetry.best_axis
    attrs = {
        Attribute.ROTATION.value: _attr_result(
            Attribute.ROTATION,
            profile.rotation.accumulated_degrees,
            rot_score,
            config,
            {
                "turn_count": profile.rotation.turn_count,
                "rate_deg_per_100m": profile.rotation.accumulated_degrees * 100.0 / path_length,
            },
        ),
        Attribute.SIZE.value: _attr_result(
            Attribute.SIZE,
            max(
                _band_deviation(profile.size.mean_width, config.width_comfort),
                _band_deviation(profile.size.mean_height, config.height_comfort),
            ),
            size_score,
            config,
            {
                "mean_width": profile.size.mean_width,
                "mean_height": profile.size.mean_height,
                "total_length": profile.size.total_length,
            },
        ),
        Attribute.VISIBILITY.value: _attr_result(
            Attribute.VISIBILITY, profile.visibility.visible_fraction, vis_score, config
        ),
        Attribute.SYMMETRY.value: _attr_result(
            Attribute.SYMMETRY,
            profile.symmetry.best_score,
            sym_score,
            config,
            {"axis": [ax.px, ax.py, ax.dx, ax.dy]},
        ),
        Attribute.CLUTTER.value: _attr_result(
            Attribute.CLUTTER, profile.clutter.coverage_fraction, clu_score, config
        ),
        Attribute.ORDER.value: _attr_result(
            Attribute.ORDER,
            profile.order.ordered_fraction,
            ord_score,
            config,
            {"template": profile.order.best_template},
        ),
    }
    mean, overall = aggregate({k: v.cls for k, v in attrs.items()}, config.weights)

    segments = []
    for seg in profile.segments:
        s_rot = normalize(Attribute.ROTATION, seg.rotation_degrees, config, path_length=seg.length)
        s_size = normalize(Attribute.SIZE, (seg.width, seg.height), config)
        s_vis = normalize(Attribute.VISIBILITY, seg.visibility_fraction, config)
        s_sym = normalize(Attribute.SYMMETRY, seg.symmetry_score, config)
        s_clu = normalize(Attribute.CLUTTER, seg.clutter_fraction, config)
        s_ord = normalize(Attribute.ORDER, seg.order_fraction, config)
        seg_attrs = {
            Attribute.ROTATION.value: _attr_result(
                Attribute.ROTATION, seg.rotation_degrees, s_rot, config, {"turn_count": seg.turn_count}
            ),
            Attribute.SIZE.value: _attr_result(
                Attribute.SIZE,
                max(
                    _band_deviation(seg.width, config.width_comfort),
                    _band_deviation(seg.height, config.height_comfort),
                ),
                s_size,
                config,
                {"width": seg.width, "height": seg.height, "length": seg.length},
            ),
            Attribute.VISIBILITY.value: _attr_result(
                Attribute.VISIBILITY, seg.visibility_fraction, s_vis, config
            ),
            Attribute.SYMMETRY.value: _attr_result(Attribute.SYMMETRY, seg.symmetry_score, s_sym, config),
            Attribute.CLUTTER.value: _attr_result(Attribute.CLUTTER, seg.clutter_fraction, s_clu, config),
            Attribute.ORDER.value: _attr_result(
                Attribute.ORDER, seg.order_fraction, s_ord, config, {"template": seg.order_template}
            ),
        }
        seg_mean, seg_cls = aggregate({k: v.cls for k, v in seg_attrs.items()}, config.weights)
        chain = segments[-1].chainage_end if segments else 0.0
        segments.append(
            SegmentReport(
                index=seg.index,
                chainage_start=chain,
                chainage_end=chain + seg.length,
                attributes=seg_attrs,
                mean=seg_mean,
                cls=seg_cls,
            )
        )

    return ComplexityReport(
        attributes=attrs,
        segments=tuple(segments),
        aggregate_mean=mean,
        overall_class=overall,
        preference=preference_score(mean),
    )


def identify(scene: Scene, path: NavPath, config: ScaleConfig | None = None) -> ComplexityReport:
    """Run all six metrics on (scene, path), normalize, classify and aggregate.

    Deterministic for fixed inputs and config. The path is re-segmented when its
    turn threshold disagrees with the config.
    """
    config = config or ScaleConfig()
    if abs(path.turn_threshold - config.turn_threshold_deg) > 1e-12:
        path = NavPath(path.line, scene.corridors, config.turn_threshold_deg)
    profile = compute_profile(
        scene,
        path,
        sample_spacing=config.sample_spacing,
        visibility_mode=config.visibility_mode,
        order_residual_tolerance=config.order_residual_tolerance,
    )
    return report_from_profile(profile, path.length, config)
