"""Multi-axis rotary position encoding.

Each D-vector is split into n contiguous slices of D/n; slice i is rotated
with the i-th coordinate of the token's position tuple. Within a slice of
width d, channel j < d/2 pairs with channel j + d/2 and rotates by
p * base**(-2j/d). Rotations are isometries, so vector norms are preserved
and dot products between encoded vectors depend only on position
differences along each axis.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DomainError, ShapeError


@dataclass(frozen=True)
class RopeConfig:
    """Partition count, total width, base frequency, optional extents.

    `extents`, when given, bounds the allowed position per partition
    (0 <= p < extent).
    """

    partitions: int
    dim: int
    base: float = 10000.0
    extents: tuple[int, ...] | None = None

    def __post_init__(self):
        if self.partitions not in (1, 2, 3):
            raise DomainError(f"partitions must be 1, 2 or 3, got {self.partitions}")
        if self.dim % self.partitions != 0:
            raise ShapeError(f"dim {self.dim} not divisible by {self.partitions} partitions")
        if (self.dim // self.partitions) % 2 != 0:
            raise ShapeError(f"per-partition width {self.dim // self.partitions} must be even")
        if self.extents is not None and len(self.extents) != self.partitions:
            raise ShapeError(f"need {self.partitions} extents, got {len(self.extents)}")

    @property
    def slice_width(self) -> int:
        return self.dim // self.partitions


def rope_apply(tokens: np.ndarray, positions: np.ndarray, cfg: RopeConfig) -> np.ndarray:
    """Rotate (N, D) token vectors by their (N, n) positions.

    Zero positions leave vectors unchanged. Computation runs in float64 and
    the result keeps the input dtype.
    """
    vecs = np.asarray(tokens)
    pos = np.atleast_2d(np.asarray(positions))
    if vecs.ndim == 1:
        vecs = vecs[None, :]
        squeeze = True
    else:
        squeeze = False
    if vecs.ndim != 2 or vecs.shape[1] != cfg.dim:
        raise ShapeError(f"token vectors must be (N, {cfg.dim}), got {np.asarray(tokens).shape}")
    if pos.shape != (vecs.shape[0], cfg.partitions):
        raise ShapeError(
            f"positions must be (N, {cfg.partitions}) = ({vecs.shape[0]}, {cfg.partitions}), got {pos.shape}"
        )
    if cfg.extents is not None:
        for i, extent in enumerate(cfg.extents):
            if np.any(pos[:, i] < 0) or np.any(pos[:, i] >= extent):
                raise DomainError(f"positions along axis {i} must lie in [0, {extent})")

    d = cfg.slice_width
    half = d // 2
    inv_freq = cfg.base ** (-np.arange(half, dtype=np.float64) * 2.0 / d)
    work = vecs.astype(np.float64)
    out = np.empty_like(work)
    for i in range(cfg.partitions):
        lo = i * d
        x1 = work[:, lo : lo + half]
        x2 = work[:, lo + half : lo + d]
        angles = pos[:, i].astype(np.float64)[:, None] * inv_freq[None, :]
        cos, sin = np.cos(angles), np.sin(angles)
        out[:, lo : lo + half] = x1 * cos - x2 * sin
        out[:, lo + half : lo + d] = x1 * sin + x2 * cos
    out = out.astype(vecs.dtype, copy=False)
    return out[0] if squeeze else out
