"""Causal temporal convolution with chunked streaming inference.

The convolution is depthwise and temporal only (spatial kernel fixed to the
identity): every output frame t is sum_j taps[j] * x_padded[t*s_t + j],
where x_padded prepends k_t - 1 zero frames. Output length is
floor((T-1)/s_t) + 1.

Streaming splits the input into the first frame followed by chunks of
T_chunk frames and carries

    T_cache(m) = k_t + m*T_chunk - s_t * floor(m*T_chunk/s_t + 1)

trailing frames of the padded stream between chunks (clamped at zero; the
value can go negative when a large stride skips frames entirely). Both
paths accumulate taps in ascending index order over identical frame data,
so streaming output is bitwise equal to direct output.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, ShapeError, StreamShapeError
from .tensor import Tensor4D


@dataclass(frozen=True)
class CausalConvSpec:
    """Depthwise temporal kernel: size k_t, stride s_t, k_t shared taps."""

    k_t: int
    s_t: int
    taps: tuple[float, ...]

    def __post_init__(self):
        if self.k_t < 1 or self.s_t < 1:
            raise DomainError(f"k_t and s_t must be >= 1, got {(self.k_t, self.s_t)}")
        taps = tuple(float(v) for v in self.taps)
        if len(taps) != self.k_t:
            raise ShapeError(f"need {self.k_t} taps, got {len(taps)}")
        object.__setattr__(self, "taps", taps)

    @property
    def pad(self) -> int:
        return self.k_t - 1


def output_frames(t: int, spec: CausalConvSpec) -> int:
    return (t - 1) // spec.s_t + 1


def cache_size(spec: CausalConvSpec, t_chunk: int, m: int) -> int:
    """Frames cached after chunk m, clamped at zero.

    Evaluated literally as k_t + m*T_chunk - s_t*floor(m*T_chunk/s_t + 1);
    a negative value means the stride skips past every retained frame, and
    a real buffer simply holds nothing.
    """
    if m < 1:
        raise DomainError(f"chunk index m must be >= 1, got {m}")
    if t_chunk < 1:
        raise DomainError(f"T_chunk must be >= 1, got {t_chunk}")
    # floor(x + 1) = floor(x) + 1, so integer division keeps this literal.
    raw = spec.k_t + m * t_chunk - spec.s_t * (m * t_chunk // spec.s_t + 1)
    return max(raw, 0)


def _conv_outputs(frames: np.ndarray, frames_start: int, t_indices: range, spec: CausalConvSpec) -> np.ndarray:
    """Convolve selected output indices from a slab of padded frames.

    `frames` holds padded-stream frames [frames_start, frames_start+n) along
    axis 1. Accumulation is float32, tap index ascending, identically in the
    direct and streaming paths.
    """
    n_out = len(t_indices)
    c, _, h, w = frames.shape
    out = np.zeros((c, n_out, h, w), dtype=np.float32)
    base = np.asarray([t * spec.s_t - frames_start for t in t_indices], dtype=np.int64)
    for j in range(spec.k_t):
        out += np.float32(spec.taps[j]) * frames[:, base + j]
    return out


def direct_causal_conv(x: Tensor4D, spec: CausalConvSpec) -> Tensor4D:
    """Whole-input causal convolution; the streaming oracle's reference."""
    c, t, h, w = x.shape
    padded = np.concatenate(
        [np.zeros((c, spec.pad, h, w), dtype=np.float32), x.data], axis=1
    )
    t_out = output_frames(t, spec)
    return Tensor4D(_conv_outputs(padded, 0, range(t_out), spec))


@dataclass
class StreamState:
    """Mutable streaming state: single owner, not safe for concurrent pushes.

    Frames are pushed segment by segment; the buffer holds the tail of the
    padded stream that future windows still need. `chunk_index` counts
    pushed segments after the mandatory first-frame segment.
    """

    spec: CausalConvSpec
    t_chunk: int
    cached_frames: np.ndarray | None = None
    cached_start: int = 0  # padded-stream index of cached_frames[:, 0]
    frames_seen: int = 0
    next_out: int = 0
    chunk_index: int = 0
    cache_log: list[int] = field(default_factory=list)
    clamped: bool = False

    def push(self, frames: np.ndarray) -> np.ndarray:
        """Feed raw input frames (C, n, H, W); returns finished output frames."""
        spec = self.spec
        if self.cached_frames is None:
            c, _, h, w = frames.shape
            self.cached_frames = np.zeros((c, spec.pad, h, w), dtype=np.float32)
            self.cached_start = 0
        seg_start = spec.pad + self.frames_seen  # padded index of frames[:,0]
        self.frames_seen += frames.shape[1]
        # Drop any leading frames the stride already skipped past.
        needed = self.next_out * spec.s_t
        drop = min(max(needed - seg_start, 0), frames.shape[1])
        if drop:
            frames = frames[:, drop:]
            seg_start += drop
        if frames.shape[1]:
            if self.cached_frames.shape[1] == 0:
                self.cached_start = seg_start
            self.cached_frames = np.concatenate(
                [self.cached_frames, frames.astype(np.float32, copy=False)], axis=1
            )
        end = self.cached_start + self.cached_frames.shape[1]
        first = self.next_out
        while self.next_out * spec.s_t + spec.k_t <= end:
            self.next_out += 1
        out = _conv_outputs(self.cached_frames, self.cached_start, range(first, self.next_out), spec)
        # Trim to the frames the next window still needs.
        keep_from = self.next_out * spec.s_t
        if keep_from >= end:
            self.cached_frames = self.cached_frames[:, :0]
            self.cached_start = keep_from
        elif keep_from > self.cached_start:
            self.cached_frames = self.cached_frames[:, keep_from - self.cached_start :]
            self.cached_start = keep_from
        return out

    def chunk_done(self, more_input: bool) -> None:
        """Count a finished chunk; log cache occupancy between chunks."""
        self.chunk_index += 1
        if not more_input:
            return
        retained = self.cached_frames.shape[1] if self.cached_frames is not None else 0
        self.cache_log.append(retained)
        streamed = self.chunk_index * self.t_chunk
        raw = self.spec.k_t + streamed - self.spec.s_t * (streamed // self.spec.s_t + 1)
        if raw < 0:
            self.clamped = True


def stream_causal_conv(x: Tensor4D, spec: CausalConvSpec, t_chunk: int) -> Tensor4D:
    out, _ = stream_with_state(x, spec, t_chunk)
    return out


def stream_with_state(x: Tensor4D, spec: CausalConvSpec, t_chunk: int) -> tuple[Tensor4D, StreamState]:
    c, t, h, w = x.shape
    if t_chunk < 1:
        raise DomainError(f"T_chunk must be >= 1, got {t_chunk}")
    if (t - 1) % spec.s_t != 0:
        raise StreamShapeError(
            f"streaming requires (T-1) divisible by s_t, got T={t}, s_t={spec.s_t}"
        )
    state = StreamState(spec=spec, t_chunk=t_chunk)
    pieces = [state.push(x.data[:, :1])]
    pos = 1
    while pos < t:
        end = min(pos + t_chunk, t)
        pieces.append(state.push(x.data[:, pos:end]))
        pos = end
        state.chunk_done(more_input=pos < t)
    out = np.concatenate(pieces, axis=1)
    return Tensor4D(out), state


@dataclass(frozen=True)
class LosslessReport:
    max_abs_diff: float
    identical: bool
    chunks: int
    cache_sizes: tuple[int, ...]
    cache_clamped: bool

    def to_dict(self) -> dict:
        return {
            "max_abs_diff": self.max_abs_diff,
            "identical": self.identical,
            "chunks": self.chunks,
            "cache_sizes": list(self.cache_sizes),
            "cache_clamped": self.cache_clamped,
        }


def verify_lossless(x: Tensor4D, spec: CausalConvSpec, t_chunk: int) -> LosslessReport:
    """Compare streaming against direct inference; identical means bitwise."""
    direct = direct_causal_conv(x, spec)
    streamed, state = stream_with_state(x, spec, t_chunk)
    diff = float(
        np.max(
            np.abs(direct.data.astype(np.float64) - streamed.data.astype(np.float64)),
            initial=0.0,
        )
    )
    return LosslessReport(
        max_abs_diff=diff,
        identical=direct.bit_equal(streamed),
        chunks=state.chunk_index,
        cache_sizes=tuple(state.cache_log),
        cache_clamped=state.clamped,
    )
