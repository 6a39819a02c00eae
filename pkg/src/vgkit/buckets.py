"""Min-max token resolution planning and a deterministic bucket sampler.

Given a token budget m, a stride s and coprime aspect ratios (r_h, r_w),
each ratio resolves to the largest integer scale k with
r_h*r_w*k**2*s**2 <= m, so dims are h = r_h*k*s, w = r_w*k*s and per-ratio
token counts stay within budget while being maximal. The sampler then packs
samples into (ratio, frame-count) buckets so every emitted global batch has
one uniform token count; leftovers are dropped, never padded.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, RatioError


@dataclass(frozen=True)
class BucketEntry:
    ratio_h: int
    ratio_w: int
    scale: int
    height: int
    width: int
    tokens: int


@dataclass(frozen=True)
class BucketPlan:
    max_token: int
    stride: int
    entries: tuple[BucketEntry, ...]
    min_token: int
    excluded: tuple[tuple[int, int], ...] = ()

    def to_dict(self) -> dict:
        return {
            "max_token": self.max_token,
            "stride": self.stride,
            "min_token": self.min_token,
            "entries": [
                {
                    "ratio": f"{e.ratio_h}:{e.ratio_w}",
                    "scale": e.scale,
                    "height": e.height,
                    "width": e.width,
                    "tokens": e.tokens,
                }
                for e in self.entries
            ],
            "excluded": [f"{h}:{w}" for h, w in self.excluded],
        }


@dataclass(frozen=True)
class SampleMeta:
    id: str
    height: int
    width: int
    frames: int

    def __post_init__(self):
        if min(self.height, self.width, self.frames) < 1:
            raise DomainError(f"sample {self.id}: dims must be positive")


@dataclass(frozen=True)
class BucketKey:
    """Oriented resolution bucket plus a frame-count bucket."""

    ratio_h: int
    ratio_w: int
    height: int
    width: int
    frames: int

    def to_dict(self) -> dict:
        return {
            "ratio": f"{self.ratio_h}:{self.ratio_w}",
            "height": self.height,
            "width": self.width,
            "frames": self.frames,
        }


@dataclass(frozen=True)
class Rejection:
    reason: str


def resolve_buckets(max_token: int, stride: int, ratios: list[tuple[int, int]]) -> BucketPlan:
    """Resolve maximal stride-aligned dims per coprime ratio under the budget.

    Ratios whose minimal resolution (k = 1) already exceeds the budget are
    excluded with a warning rather than failing the whole plan.
    """
    if max_token < 1 or stride < 1:
        raise DomainError(f"max_token and stride must be >= 1, got {(max_token, stride)}")
    entries: list[BucketEntry] = []
    excluded: list[tuple[int, int]] = []
    seen: set[tuple[int, int]] = set()
    for rh, rw in ratios:
        if rh < 1 or rw < 1:
            raise RatioError(f"ratio {rh}:{rw} must use positive integers")
        if math.gcd(rh, rw) != 1:
            raise RatioError(f"ratio {rh}:{rw} is not coprime (gcd {math.gcd(rh, rw)})")
        if (rh, rw) in seen:
            continue
        seen.add((rh, rw))
        denom = rh * rw * stride * stride
        scale = math.isqrt(max_token // denom) if denom <= max_token else 0
        if scale < 1:
            warnings.warn(f"ratio {rh}:{rw} exceeds the token budget even at scale 1; excluded")
            excluded.append((rh, rw))
            continue
        entries.append(
            BucketEntry(
                ratio_h=rh,
                ratio_w=rw,
                scale=scale,
                height=rh * scale * stride,
                width=rw * scale * stride,
                tokens=rh * rw * scale * scale * stride * stride,
            )
        )
    if not entries:
        raise DomainError("no ratio fits the token budget")
    return BucketPlan(
        max_token=max_token,
        stride=stride,
        entries=tuple(entries),
        min_token=min(e.tokens for e in entries),
        excluded=tuple(excluded),
    )


def _oriented_candidates(plan: BucketPlan):
    for e in plan.entries:
        yield (e.ratio_h, e.ratio_w, e.height, e.width, e.tokens)
        if e.ratio_h != e.ratio_w:
            yield (e.ratio_w, e.ratio_h, e.width, e.height, e.tokens)


def assign_bucket(
    sample: SampleMeta, plan: BucketPlan, frame_buckets: list[int]
) -> BucketKey | Rejection:
    """Pick the closest-aspect oriented entry and the largest fitting frame bucket.

    Aspect closeness is symmetric log-ratio distance; ties go to the entry
    with more tokens. Samples smaller than the chosen dims (either axis) or
    shorter than every frame bucket are rejected.
    """
    if not plan.entries:
        raise DomainError("bucket plan has no entries")
    if not frame_buckets:
        raise DomainError("frame_buckets must not be empty")
    aspect = math.log(sample.height / sample.width)
    best = None
    for rh, rw, h, w, tokens in _oriented_candidates(plan):
        dist = abs(aspect - math.log(h / w))
        key = (dist, -tokens, rh, rw)
        if best is None or key < best[0]:
            best = (key, (rh, rw, h, w))
    rh, rw, h, w = best[1]
    if sample.height < h or sample.width < w:
        return Rejection(f"smaller than bucket dims {h}x{w}")
    fitting = [f for f in sorted(frame_buckets) if f <= sample.frames]
    if not fitting:
        return Rejection(f"fewer frames than smallest frame bucket {min(frame_buckets)}")
    return BucketKey(ratio_h=rh, ratio_w=rw, height=h, width=w, frames=fitting[-1])


@dataclass(frozen=True)
class Batch:
    key: BucketKey
    sample_ids: tuple[str, ...]


@dataclass(frozen=True)
class BatchPlan:
    batches: tuple[Batch, ...]
    dropped: tuple[str, ...]
    rejected: tuple[tuple[str, str], ...]  # (sample id, reason)


def plan_batches(
    samples: list[SampleMeta],
    plan: BucketPlan,
    frame_buckets: list[int],
    global_batch: int,
    seed: int,
) -> BatchPlan:
    """Group, shuffle and chop samples into uniform-token batches.

    Every batch holds exactly `global_batch` samples from one bucket key.
    Shuffling (within buckets and of the final batch order) is a pure
    function of `seed`, so output is reproducible byte for byte.
    """
    if global_batch < 1:
        raise DomainError(f"global_batch must be >= 1, got {global_batch}")
    buckets: dict[BucketKey, list[str]] = {}
    rejected: list[tuple[str, str]] = []
    for sample in samples:
        verdict = assign_bucket(sample, plan, frame_buckets)
        if isinstance(verdict, Rejection):
            rejected.append((sample.id, verdict.reason))
        else:
            buckets.setdefault(verdict, []).append(sample.id)

    rs = np.random.RandomState(seed)
    batches: list[Batch] = []
    dropped: list[str] = []
    ordered_keys = sorted(buckets, key=lambda k: (k.ratio_h, k.ratio_w, k.height, k.width, k.frames))
    for key in ordered_keys:
        ids = buckets[key]
        order = rs.permutation(len(ids))
        shuffled = [ids[i] for i in order]
        full = len(shuffled) // global_batch
        for b in range(full):
            batches.append(Batch(key=key, sample_ids=tuple(shuffled[b * global_batch : (b + 1) * global_batch])))
        dropped.extend(shuffled[full * global_batch :])
    final_order = rs.permutation(len(batches))
    batches = [batches[i] for i in final_order]
    return BatchPlan(batches=tuple(batches), dropped=tuple(dropped), rejected=tuple(rejected))
