"""Multi-level 3D/2D Haar analysis and synthesis over Tensor4D volumes.

A 3D level filters and downsamples all of (T, H, W) by 2 and yields eight
sub-bands; a 2D level touches (H, W) only and yields four. Windows are
non-overlapping with stride 2 (strict even-dimension requirement, no
padding), which makes the per-level transform an orthonormal change of
basis: reconstruction is exact and energy is conserved.

Filters: scaling (1/sqrt2)[1, 1], wavelet (1/sqrt2)[1, -1]. Sub-band labels
spell the filter applied per axis, low 'h' / high 'g', axis order T,H,W for
3D levels and H,W for 2D levels. Label tuples are kept in lexicographic
order for deterministic serialization.

Accumulation happens axis-sequentially (T then H then W) in float64; every
level's sub-bands are rounded back to float32 at the operation boundary.
"""

from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass

import numpy as np

from .errors import DimensionError, DomainError, FormatError, StructureError
from .tensor import Tensor4D, load_tensor, save_tensor

_SQRT1_2 = 1.0 / math.sqrt(2.0)

LABELS_3D = ("ggg", "ggh", "ghg", "ghh", "hgg", "hgh", "hhg", "hhh")
LABELS_2D = ("gg", "gh", "hg", "hh")

ADV_WEIGHT_DELTA = 1e-6


@dataclass(frozen=True)
class HaarFilters:
    """The orthonormal Haar pair; both unit norm, mutually orthogonal."""

    scaling: tuple[float, float] = (_SQRT1_2, _SQRT1_2)
    wavelet: tuple[float, float] = (_SQRT1_2, -_SQRT1_2)


@dataclass(frozen=True)
class PyramidLevel:
    """One decomposition level: kind '3d' or '2d' plus its sub-band map."""

    kind: str
    bands: dict[str, Tensor4D]

    def __post_init__(self):
        labels = LABELS_3D if self.kind == "3d" else LABELS_2D if self.kind == "2d" else None
        if labels is None:
            raise StructureError(f"level kind must be '3d' or '2d', got {self.kind!r}")
        if tuple(sorted(self.bands)) != labels:
            raise StructureError(
                f"{self.kind} level needs bands {labels}, got {tuple(sorted(self.bands))}"
            )
        shapes = {b.shape for b in self.bands.values()}
        if len(shapes) != 1:
            raise StructureError(f"sub-band shapes differ within level: {sorted(shapes)}")

    @property
    def band_shape(self) -> tuple[int, int, int, int]:
        return next(iter(self.bands.values())).shape

    @property
    def lowband_label(self) -> str:
        return "hhh" if self.kind == "3d" else "hh"

    @property
    def input_shape(self) -> tuple[int, int, int, int]:
        c, t, h, w = self.band_shape
        return (c, 2 * t, h * 2, w * 2) if self.kind == "3d" else (c, t, h * 2, w * 2)


@dataclass(frozen=True)
class SubbandPyramid:
    """Recursive decomposition; level l+1 consumed the all-low band of level l.

    `residual` carries the untransformed input only for the degenerate
    zero-level pyramid so that reconstruct() stays total.
    """

    levels: tuple[PyramidLevel, ...]
    residual: Tensor4D | None = None

    def __post_init__(self):
        if not self.levels and self.residual is None:
            raise StructureError("zero-level pyramid requires a residual tensor")
        for i in range(1, len(self.levels)):
            prev_low = self.levels[i - 1].bands[self.levels[i - 1].lowband_label].shape
            if self.levels[i].input_shape != prev_low:
                raise StructureError(
                    f"level {i} expects input shape {self.levels[i].input_shape}, "
                    f"but level {i - 1} all-low band has shape {prev_low}"
                )

    @property
    def schedule(self) -> tuple[str, ...]:
        return tuple(level.kind for level in self.levels)


def _split_axis(v: np.ndarray, axis: int) -> tuple[np.ndarray, np.ndarray]:
    # Non-overlapping stride-2 Haar pair along one axis, float64 in/out.
    even = np.take(v, range(0, v.shape[axis], 2), axis=axis)
    odd = np.take(v, range(1, v.shape[axis], 2), axis=axis)
    return (even + odd) * _SQRT1_2, (even - odd) * _SQRT1_2


def _merge_axis(low: np.ndarray, high: np.ndarray, axis: int) -> np.ndarray:
    shape = list(low.shape)
    shape[axis] *= 2
    out = np.empty(shape, dtype=np.float64)
    even = (low + high) * _SQRT1_2
    odd = (low - high) * _SQRT1_2
    sl = [slice(None)] * out.ndim
    sl[axis] = slice(0, None, 2)
    out[tuple(sl)] = even
    sl[axis] = slice(1, None, 2)
    out[tuple(sl)] = odd
    return out


def forward_3d_level(x: Tensor4D) -> PyramidLevel:
    """One 3D Haar level: eight sub-bands of shape (C, T/2, H/2, W/2)."""
    c, t, h, w = x.shape
    if t % 2 or h % 2 or w % 2:
        raise DimensionError(f"3d level needs even T,H,W, got {(t, h, w)}")
    v = x.data.astype(np.float64)
    lo_t, hi_t = _split_axis(v, 1)
    bands: dict[str, Tensor4D] = {}
    for lt, part_t in (("h", lo_t), ("g", hi_t)):
        lo_h, hi_h = _split_axis(part_t, 2)
        for lh, part_h in (("h", lo_h), ("g", hi_h)):
            lo_w, hi_w = _split_axis(part_h, 3)
            for lw, part_w in (("h", lo_w), ("g", hi_w)):
                bands[lt + lh + lw] = Tensor4D(part_w.astype(np.float32))
    return PyramidLevel("3d", bands)


def forward_2d_level(x: Tensor4D) -> PyramidLevel:
    """One spatial Haar level: four sub-bands of shape (C, T, H/2, W/2)."""
    c, t, h, w = x.shape
    if h % 2 or w % 2:
        raise DimensionError(f"2d level needs even H,W, got {(h, w)}")
    v = x.data.astype(np.float64)
    lo_h, hi_h = _split_axis(v, 2)
    bands: dict[str, Tensor4D] = {}
    for lh, part_h in (("h", lo_h), ("g", hi_h)):
        lo_w, hi_w = _split_axis(part_h, 3)
        for lw, part_w in (("h", lo_w), ("g", hi_w)):
            bands[lh + lw] = Tensor4D(part_w.astype(np.float32))
    return PyramidLevel("2d", bands)


def _inverse_level(level: PyramidLevel) -> Tensor4D:
    bands = {label: t.data.astype(np.float64) for label, t in level.bands.items()}
    if level.kind == "3d":
        merged_w = {
            pre: _merge_axis(bands[pre + "h"], bands[pre + "g"], 3)
            for pre in ("hh", "hg", "gh", "gg")
        }
        merged_h = {
            pre: _merge_axis(merged_w[pre + "h"], merged_w[pre + "g"], 2)
            for pre in ("h", "g")
        }
        out = _merge_axis(merged_h["h"], merged_h["g"], 1)
    else:
        merged_w = {pre: _merge_axis(bands[pre + "h"], bands[pre + "g"], 3) for pre in ("h", "g")}
        out = _merge_axis(merged_w["h"], merged_w["g"], 2)
    return Tensor4D(out.astype(np.float32))


def decompose(x: Tensor4D, schedule: list[str] | tuple[str, ...]) -> SubbandPyramid:
    """Apply the schedule recursively; each level eats the previous all-low band.

    Schedule entries are '3d' or '2d'. The schedule ('3d','3d','2d') yields
    an overall (T,H,W) compression of 4x8x8.
    """
    levels: list[PyramidLevel] = []
    current = x
    for i, kind in enumerate(schedule):
        kind = kind.lower()
        try:
            if kind == "3d":
                level = forward_3d_level(current)
            elif kind == "2d":
                level = forward_2d_level(current)
            else:
                raise DimensionError(f"unknown schedule entry {kind!r}")
        except DimensionError as exc:
            raise DimensionError(f"level {i}: {exc}") from None
        levels.append(level)
        current = level.bands[level.lowband_label]
    if not levels:
        return SubbandPyramid(levels=(), residual=x)
    return SubbandPyramid(levels=tuple(levels))


def reconstruct(p: SubbandPyramid) -> Tensor4D:
    """Exact inverse of decompose (up to float32 rounding).

    Levels are inverted deepest first; each reconstruction replaces the
    all-low band of the level above it.
    """
    if not p.levels:
        return p.residual
    current: Tensor4D | None = None
    for level in reversed(p.levels):
        if current is not None:
            bands = dict(level.bands)
            if bands[level.lowband_label].shape != current.shape:
                raise StructureError(
                    f"reconstructed shape {current.shape} does not match "
                    f"all-low band shape {bands[level.lowband_label].shape}"
                )
            bands[level.lowband_label] = current
            level = PyramidLevel(level.kind, bands)
        current = _inverse_level(level)
    return current


def wl_loss(
    predicted: SubbandPyramid,
    target: SubbandPyramid,
    levels: tuple[int, ...] = (1, 2),
) -> float:
    """Sum over requested levels of the mean absolute sub-band difference.

    The per-level term is the mean of |a - b| across every element of every
    sub-band in that level, so the value is resolution independent. Default
    levels (1, 2) pick the deepest 3D level and the 2D level of the
    canonical ('3d','3d','2d') schedule.
    """
    total = 0.0
    for idx in levels:
        if idx < 0 or idx >= len(predicted.levels) or idx >= len(target.levels):
            raise StructureError(f"requested level {idx} not present in both pyramids")
        pl, tl = predicted.levels[idx], target.levels[idx]
        if pl.kind != tl.kind or pl.band_shape != tl.band_shape:
            raise StructureError(f"level {idx} structure mismatch: {pl.kind}{pl.band_shape} vs {tl.kind}{tl.band_shape}")
        abs_sum = 0.0
        count = 0
        for label in sorted(pl.bands):
            a = pl.bands[label].data.astype(np.float64)
            b = tl.bands[label].data.astype(np.float64)
            abs_sum += float(np.abs(a - b).sum())
            count += a.size
        total += abs_sum / count
    return total


def adaptive_adv_weight(grad_recon_norm: float, grad_adv_norm: float) -> float:
    """Half the ratio of reconstruction to adversarial gradient norms.

    A small delta (1e-6) in the denominator keeps the weight finite when the
    adversarial gradient vanishes.
    """
    if grad_recon_norm < 0 or grad_adv_norm < 0:
        raise DomainError(f"gradient norms must be >= 0, got {(grad_recon_norm, grad_adv_norm)}")
    return 0.5 * (grad_recon_norm / (grad_adv_norm + ADV_WEIGHT_DELTA))


def composite_loss(
    recon: float,
    adv: float,
    kl: float,
    wl: float,
    adv_weight: float,
    kl_weight: float,
    wl_weight: float,
) -> float:
    """recon + adv_weight*adv + kl_weight*kl + wl_weight*wl, exactly."""
    return recon + adv_weight * adv + kl_weight * kl + wl_weight * wl


def level_energy(level: PyramidLevel) -> float:
    """Sum of squares over all sub-bands of one level."""
    return float(
        sum(np.square(b.data.astype(np.float64)).sum() for b in level.bands.values())
    )


def tensor_energy(x: Tensor4D) -> float:
    return float(np.square(x.data.astype(np.float64)).sum())


_MANIFEST_NAME = "manifest.json"


def save_pyramid(p: SubbandPyramid, directory: str | os.PathLike) -> None:
    """Serialize as level<i>_<label>.ospt files plus a JSON manifest."""
    os.makedirs(directory, exist_ok=True)
    manifest = {
        "format": "vgkit-pyramid",
        "version": 1,
        "schedule": list(p.schedule),
        "levels": [],
        "residual": p.residual is not None,
    }
    for i, level in enumerate(p.levels):
        entry = {"kind": level.kind, "shapes": {}}
        for label in sorted(level.bands):
            save_tensor(level.bands[label], os.path.join(directory, f"level{i}_{label}.ospt"))
            entry["shapes"][label] = list(level.bands[label].shape)
        manifest["levels"].append(entry)
    if p.residual is not None:
        save_tensor(p.residual, os.path.join(directory, "residual.ospt"))
    with open(os.path.join(directory, _MANIFEST_NAME), "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")


def load_pyramid(directory: str | os.PathLike) -> SubbandPyramid:
    manifest_path = os.path.join(directory, _MANIFEST_NAME)
    try:
        with open(manifest_path, "r", encoding="utf-8") as fh:
            manifest = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise FormatError(f"cannot read pyramid manifest {manifest_path}: {exc}") from exc
    if manifest.get("format") != "vgkit-pyramid":
        raise FormatError(f"{manifest_path}: not a vgkit pyramid manifest")
    levels = []
    for i, entry in enumerate(manifest["levels"]):
        bands = {}
        for label in entry["shapes"]:
            band = load_tensor(os.path.join(directory, f"level{i}_{label}.ospt"))
            if list(band.shape) != entry["shapes"][label]:
                raise FormatError(f"level{i}_{label}: shape disagrees with manifest")
            bands[label] = band
        levels.append(PyramidLevel(entry["kind"], bands))
    residual = None
    if manifest.get("residual"):
        residual = load_tensor(os.path.join(directory, "residual.ospt"))
    return SubbandPyramid(levels=tuple(levels), residual=residual)
