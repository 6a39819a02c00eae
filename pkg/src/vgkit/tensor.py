"""4D tensor carrier, its binary file format, and synthetic generators.

The on-disk format is a fixed little-endian layout so that round trips are
bit exact:

    bytes 0..3   magic "OSPT"
    bytes 4..5   format version, u16 LE, currently 1
    bytes 6..21  four u32 LE dims: channels, frames, height, width
    bytes 22..   channels*frames*height*width IEEE-754 binary32 LE values,
                 row major with width fastest

All payloads are float32; transforms elsewhere may accumulate in float64
internally but always hand back float32 at operation boundaries.
"""

from __future__ import annotations

import os
import struct
from dataclasses import dataclass

import numpy as np

from .errors import DivisibilityError, FormatError, ShapeError, WriteError

MAGIC = b"OSPT"
FORMAT_VERSION = 1
_HEADER = struct.Struct("<4sHIIII")


@dataclass(frozen=True)
class Tensor4D:
    """Real-valued volume indexed (channel, time, height, width).

    `data` is a C-contiguous float32 ndarray of shape (C, T, H, W). Values
    are immutable by convention: the array is flagged non-writeable.
    """

    data: np.ndarray

    def __post_init__(self):
        arr = np.ascontiguousarray(self.data, dtype=np.float32)
        if arr.ndim != 4:
            raise ShapeError(f"expected 4 dims (C,T,H,W), got {arr.ndim}")
        if any(d < 1 for d in arr.shape):
            raise ShapeError(f"all dims must be >= 1, got {arr.shape}")
        arr.flags.writeable = False
        object.__setattr__(self, "data", arr)

    @property
    def channels(self) -> int:
        return self.data.shape[0]

    @property
    def frames(self) -> int:
        return self.data.shape[1]

    @property
    def height(self) -> int:
        return self.data.shape[2]

    @property
    def width(self) -> int:
        return self.data.shape[3]

    @property
    def shape(self) -> tuple[int, int, int, int]:
        return tuple(self.data.shape)

    def allclose(self, other: "Tensor4D", atol: float = 0.0) -> bool:
        return self.shape == other.shape and bool(
            np.max(np.abs(self.data.astype(np.float64) - other.data.astype(np.float64)), initial=0.0) <= atol
        )

    def bit_equal(self, other: "Tensor4D") -> bool:
        return self.shape == other.shape and self.data.tobytes() == other.data.tobytes()


@dataclass(frozen=True)
class TokenGrid:
    """Latent token extents (t, h, w) after patchify; L = t*h*w."""

    t: int
    h: int
    w: int

    def __post_init__(self):
        if min(self.t, self.h, self.w) < 1:
            raise ShapeError(f"token grid extents must be >= 1, got {(self.t, self.h, self.w)}")

    @property
    def tokens(self) -> int:
        return self.t * self.h * self.w


def save_tensor(t: Tensor4D, path: str | os.PathLike) -> None:
    """Write `t` to `path` in the OSPT binary layout.

    The write is whole-file atomic: data lands in a sibling temp file that
    is then renamed over the destination.
    """
    header = _HEADER.pack(MAGIC, FORMAT_VERSION, *t.shape)
    payload = np.ascontiguousarray(t.data, dtype="<f4").tobytes()
    tmp = f"{os.fspath(path)}.tmp.{os.getpid()}"
    try:
        with open(tmp, "wb") as fh:
            fh.write(header)
            fh.write(payload)
        os.replace(tmp, path)
    except OSError as exc:
        try:
            os.unlink(tmp)
        except OSError:
            pass
        raise WriteError(f"cannot write tensor to {path}: {exc}") from exc


def load_tensor(path: str | os.PathLike) -> Tensor4D:
    """Read an OSPT file back into a Tensor4D, bit exact."""
    try:
        with open(path, "rb") as fh:
            blob = fh.read()
    except OSError as exc:
        raise FormatError(f"cannot read tensor from {path}: {exc}") from exc
    if len(blob) < _HEADER.size:
        raise FormatError(f"{path}: truncated header ({len(blob)} bytes)")
    magic, version, c, t, h, w = _HEADER.unpack_from(blob)
    if magic != MAGIC:
        raise FormatError(f"{path}: bad magic {magic!r}")
    if version != FORMAT_VERSION:
        raise FormatError(f"{path}: unsupported format version {version}")
    if min(c, t, h, w) < 1:
        raise FormatError(f"{path}: zero dimension in header {(c, t, h, w)}")
    count = c * t * h * w
    expected = _HEADER.size + 4 * count
    if len(blob) != expected:
        raise FormatError(
            f"{path}: payload length mismatch, header promises {count} values "
            f"({expected} bytes total) but file has {len(blob)} bytes"
        )
    values = np.frombuffer(blob, dtype="<f4", offset=_HEADER.size, count=count)
    return Tensor4D(values.reshape(c, t, h, w).copy())


def patch_token_count(dims: tuple[int, int, int], kernel: tuple[int, int, int]) -> int:
    """Token count after patchifying latent dims (T,H,W) with the given kernel.

    Strides match kernel sizes, so each axis must divide exactly.
    """
    grid = patch_grid(dims, kernel)
    return grid.tokens


def patch_grid(dims: tuple[int, int, int], kernel: tuple[int, int, int]) -> TokenGrid:
    """Token grid after patchify; raises DivisibilityError on a ragged axis."""
    t, h, w = dims
    kt, kh, kw = kernel
    for name, d, k in (("T", t, kt), ("H", h, kh), ("W", w, kw)):
        if k < 1:
            raise DivisibilityError(f"kernel {name}={k} must be >= 1")
        if d % k != 0:
            raise DivisibilityError(f"{name}={d} is not divisible by kernel {k}")
    return TokenGrid(t // kt, h // kh, w // kw)


def random_tensor(channels: int, frames: int, height: int, width: int, seed: int = 0) -> Tensor4D:
    """Standard-normal float32 tensor from a frozen-stream generator."""
    rs = np.random.RandomState(seed)
    return Tensor4D(rs.standard_normal((channels, frames, height, width)).astype(np.float32))


def constant_tensor(channels: int, frames: int, height: int, width: int, value: float) -> Tensor4D:
    return Tensor4D(np.full((channels, frames, height, width), value, dtype=np.float32))


def zeros_tensor(channels: int, frames: int, height: int, width: int) -> Tensor4D:
    return Tensor4D(np.zeros((channels, frames, height, width), dtype=np.float32))
