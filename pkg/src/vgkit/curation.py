"""Statistical core of the clip-curation pipeline.

Operates on a series of perceptual dissimilarities between consecutive
sampled frames (higher = more different). The perceptual metric itself is
an injection point; `frame_difference_series` provides a stand-in (mean
absolute pixel difference, already in [0, 1] for inputs scaled to [0, 1]).

Jump cuts are z-score outliers of the series, two-stage: candidates exceed
z_threshold, and survive only if the raw value exceeds l_threshold or both
z > z_threshold2 and value > l_threshold2. The standard deviation is the
population one (divide by n). The series mean is the motion score; clips
are kept when it falls inside [0.001, 0.3] inclusive.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, ShapeError
from .tensor import Tensor4D

AESTHETIC_MIN = 4.75   # retained for pipeline completeness; scores come from callers
TECHNICAL_MIN = 0.0
MOTION_LOW = 0.001
MOTION_HIGH = 0.3
FRAME_MIN = 32
FRAME_MAX = 512
MAX_CLIP_SECONDS = 16.0
MAX_EDGE_FRACTION = 0.20


@dataclass(frozen=True)
class SimilaritySeries:
    """Dissimilarity values plus the right-frame index each value aligns to."""

    values: np.ndarray
    frame_indices: np.ndarray | None = None

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=np.float64)
        if vals.ndim != 1 or vals.size < 1:
            raise ShapeError(f"series must be a non-empty 1D array, got shape {vals.shape}")
        if np.any(vals < 0):
            raise DomainError("dissimilarity values must be >= 0")
        idx = self.frame_indices
        if idx is None:
            idx = np.arange(1, vals.size + 1, dtype=np.int64)
        else:
            idx = np.asarray(idx, dtype=np.int64)
            if idx.shape != vals.shape:
                raise ShapeError("frame_indices must align one-to-one with values")
        object.__setattr__(self, "values", vals)
        object.__setattr__(self, "frame_indices", idx)

    def __len__(self) -> int:
        return int(self.values.size)


@dataclass(frozen=True)
class CutThresholds:
    z_threshold: float = 2.0
    l_threshold: float = 0.35
    z_threshold2: float = 3.2
    l_threshold2: float = 0.2

    def __post_init__(self):
        vals = (self.z_threshold, self.l_threshold, self.z_threshold2, self.l_threshold2)
        if any(v <= 0 for v in vals):
            raise DomainError(f"all thresholds must be positive, got {vals}")


@dataclass(frozen=True)
class ClipVerdict:
    cut_indices: tuple[int, ...]
    motion_score: float
    kept: bool
    reasons: tuple[str, ...]

    def to_dict(self) -> dict:
        return {
            "cut_indices": list(self.cut_indices),
            "motion_score": self.motion_score,
            "kept": self.kept,
            "reasons": list(self.reasons),
        }


def series_stats(series: SimilaritySeries) -> tuple[float, float]:
    """Mean and population standard deviation of the series."""
    mu = float(series.values.mean())
    sigma = float(math.sqrt(np.mean((series.values - mu) ** 2)))
    return mu, sigma


def detect_cuts(series: SimilaritySeries, th: CutThresholds = CutThresholds()) -> list[int]:
    """Two-stage z-score outlier detection; returns sorted cut indices.

    A constant series (sigma = 0) has no outliers by definition.
    """
    if len(series) < 2:
        raise DomainError("cut detection needs at least two values")
    mu, sigma = series_stats(series)
    if sigma == 0.0:
        return []
    z = (series.values - mu) / sigma
    candidates = z > th.z_threshold
    final = candidates & (
        (series.values > th.l_threshold)
        | ((z > th.z_threshold2) & (series.values > th.l_threshold2))
    )
    return [int(i) for i in np.nonzero(final)[0]]


def motion_score(series: SimilaritySeries) -> float:
    """Arithmetic mean of the dissimilarity series."""
    return float(series.values.mean())


def motion_filter(score: float, low: float = MOTION_LOW, high: float = MOTION_HIGH) -> bool:
    """Keep iff low <= score <= high (both bounds inclusive)."""
    return low <= score <= high


def aesthetic_filter(score: float, minimum: float = AESTHETIC_MIN) -> bool:
    """Pass-through predicate over a caller-supplied aesthetic score."""
    return score >= minimum


def technical_filter(score: float, minimum: float = TECHNICAL_MIN) -> bool:
    """Pass-through predicate over a caller-supplied technical quality score."""
    return score > minimum


@dataclass(frozen=True)
class CropRect:
    """Half-open pixel crop [top, bottom) x [left, right)."""

    top: int
    left: int
    bottom: int
    right: int

    @property
    def height(self) -> int:
        return self.bottom - self.top

    @property
    def width(self) -> int:
        return self.right - self.left

    @property
    def area(self) -> int:
        return self.height * self.width

    def to_dict(self) -> dict:
        return {"top": self.top, "left": self.left, "bottom": self.bottom, "right": self.right}


def ocr_crop_geometry(
    height: int,
    width: int,
    detected_boxes: list[tuple[int, int, int, int]],
    max_edge_fraction: float = MAX_EDGE_FRACTION,
) -> CropRect:
    """Largest crop removing edge bands that contain detected text boxes.

    Boxes are (x0, y0, x1, y1) half-open pixel rectangles. A box attributes
    to a side when it touches that side's band but not the opposite band
    (a full-width subtitle belongs to the bottom, not to left or right);
    the side's cut then extends to the box edge nearest the center. Each
    side sheds at most `max_edge_fraction` of its dimension, so the worst
    case crop is the central (0.6H, 0.6W) region, and boxes fully inside
    the central region never trigger a cut.
    """
    if height < 1 or width < 1:
        raise DomainError(f"frame dims must be positive, got {height}x{width}")
    cap_h = int(max_edge_fraction * height)
    cap_w = int(max_edge_fraction * width)
    top = bottom = left = right = 0
    for x0, y0, x1, y1 in detected_boxes:
        if not (0 <= x0 < x1 <= width and 0 <= y0 < y1 <= height):
            raise DomainError(f"box {(x0, y0, x1, y1)} outside {height}x{width} frame")
        in_top, in_bottom = y0 < cap_h, y1 > height - cap_h
        in_left, in_right = x0 < cap_w, x1 > width - cap_w
        if in_top and not in_bottom:
            top = max(top, min(cap_h, y1))
        if in_bottom and not in_top:
            bottom = max(bottom, min(cap_h, height - y0))
        if in_left and not in_right:
            left = max(left, min(cap_w, x1))
        if in_right and not in_left:
            right = max(right, min(cap_w, width - x0))
    return CropRect(top=top, left=left, bottom=height - bottom, right=width - right)


def slice_plan(duration_s: float, max_clip_s: float = MAX_CLIP_SECONDS) -> list[tuple[float, float]]:
    """Consecutive non-overlapping windows of max_clip_s; last one shorter."""
    if duration_s <= 0:
        raise DomainError(f"duration must be positive, got {duration_s}")
    if max_clip_s <= 0:
        raise DomainError(f"max clip length must be positive, got {max_clip_s}")
    windows = []
    i = 0
    while i * max_clip_s < duration_s:
        windows.append((i * max_clip_s, min((i + 1) * max_clip_s, duration_s)))
        i += 1
    return windows


def curate_clip(
    series: SimilaritySeries,
    frame_count: int,
    th: CutThresholds = CutThresholds(),
    motion_low: float = MOTION_LOW,
    motion_high: float = MOTION_HIGH,
    frame_min: int = FRAME_MIN,
    frame_max: int = FRAME_MAX,
    aesthetic_score: float | None = None,
    technical_score: float | None = None,
) -> ClipVerdict:
    """Compose the per-clip filters into one verdict with complete reasons.

    Aesthetic and technical scores are optional caller-supplied inputs; when
    absent those filters are skipped entirely.
    """
    reasons: list[str] = []
    cuts = detect_cuts(series, th) if len(series) >= 2 else []
    if cuts:
        reasons.append("jump-cut")
    if not (frame_min <= frame_count <= frame_max):
        reasons.append("frame-bounds")
    score = motion_score(series)
    if not motion_filter(score, motion_low, motion_high):
        reasons.append("motion-range")
    if aesthetic_score is not None and not aesthetic_filter(aesthetic_score):
        reasons.append("aesthetic")
    if technical_score is not None and not technical_filter(technical_score):
        reasons.append("technical-quality")
    return ClipVerdict(
        cut_indices=tuple(cuts),
        motion_score=score,
        kept=not reasons,
        reasons=tuple(reasons),
    )


def frame_difference_series(x: Tensor4D, frame_step: int = 1) -> SimilaritySeries:
    """Stand-in dissimilarity: mean |frame_i - frame_{i-step}| per pair.

    For inputs scaled to [0, 1] the values land in [0, 1] directly.
    """
    if frame_step < 1:
        raise DomainError(f"frame_step must be >= 1, got {frame_step}")
    if x.frames <= frame_step:
        raise ShapeError(f"need more than {frame_step} frames, got {x.frames}")
    data = x.data.astype(np.float64)
    picks = range(frame_step, x.frames, frame_step)
    values = np.array(
        [float(np.abs(data[:, i] - data[:, i - frame_step]).mean()) for i in picks]
    )
    return SimilaritySeries(values=values, frame_indices=np.array(list(picks), dtype=np.int64))
