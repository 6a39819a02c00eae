"""Skip-sparse attention index engine.

Two bundling permutations over a flattened (t, h, w) token grid:

  single skip   element e goes to bundle e % k at offset e // k, i.e. each
                bundle collects tokens spaced k apart.
  group skip    adjacent tokens are grouped in runs of k; groups spaced k-1
                groups apart share a bundle. Element e goes to bundle
                (e // k) % k at offset (e // k**2) * k + e % k. When k**2
                does not divide L the bundles are padded to k*ceil(L/k**2)
                and pad slots are flagged in a mask.

Both maps are bijections (over the padded domain for the group path) and
reduce to the identity at k = 1.

Average attention distance treats each transformer block as one bundle-local
interaction and alternates block parities; dist(a, b) is the minimum number
of consecutive blocks needed to route from a to b, minimized over which
parity comes first, with dist(a, a) = 0. Two normalizations are exposed:

  "exclude_self"  mean over ordered pairs of distinct tokens (divide by
                  L*(L-1)). Default: this is the convention under which the
                  closed forms land on the published reference values.
  "include_self"  mean over all ordered pairs including self (divide by
                  L**2); the per-mechanism closed forms then equal the
                  familiar textbook expressions such as
                  2 - 2/k + 1/k**2 - 1/L for skip-sparse bundling.

Closed forms are evaluated from exact integer distance counts whenever the
required divisibilities hold, so they agree with the brute-force BFS to the
last bit on divisible grids.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .errors import IndexRangeError, RatioError, ShapeError, SizeError, StructureError
from .tensor import TokenGrid

BRUTE_FORCE_CAP = 4096

CONVENTIONS = ("exclude_self", "include_self")
DEFAULT_CONVENTION = "exclude_self"


class Mechanism(enum.Enum):
    FULL_3D = "full3d"
    TWO_PLUS_ONE_D = "2+1d"
    SKIP_WINDOW = "skip-window"
    SKIPARSE = "skiparse"

    @classmethod
    def parse(cls, name: str) -> "Mechanism":
        key = name.strip().lower().replace("_", "-")
        aliases = {
            "full3d": cls.FULL_3D,
            "full-3d": cls.FULL_3D,
            "2+1d": cls.TWO_PLUS_ONE_D,
            "2plus1d": cls.TWO_PLUS_ONE_D,
            "skip-window": cls.SKIP_WINDOW,
            "skipwindow": cls.SKIP_WINDOW,
            "skip+window": cls.SKIP_WINDOW,
            "skiparse": cls.SKIPARSE,
        }
        if key not in aliases:
            raise RatioError(f"unknown attention mechanism {name!r}")
        return aliases[key]


@dataclass(frozen=True)
class AttentionSpec:
    mechanism: Mechanism
    grid: TokenGrid
    k: int = 1

    def __post_init__(self):
        if self.k < 1:
            raise RatioError(f"sparse ratio k must be >= 1, got {self.k}")
        if self.k > self.grid.tokens:
            raise RatioError(f"k={self.k} exceeds token count L={self.grid.tokens}")


@dataclass(frozen=True)
class SkiparsePlan:
    """Bijective index maps for both skip paths at sparse ratio k.

    perm arrays map flat token position -> position in the bundled layout
    (bundle_index * bundle_length + offset). The group path covers the
    padded domain [0, k**2 * ceil(L/k**2)); `pad_mask` is True at bundled
    positions that hold padding rather than a real token.
    """

    grid: TokenGrid
    k: int
    single_perm: np.ndarray
    group_perm: np.ndarray
    pad_mask: np.ndarray

    @property
    def tokens(self) -> int:
        return self.grid.tokens

    @property
    def bundle_count_single(self) -> int:
        return self.k

    @property
    def bundle_length_single(self) -> int:
        return self.tokens // self.k

    @property
    def bundle_count_group(self) -> int:
        return self.k

    @property
    def bundle_length_group(self) -> int:
        return self.k * math.ceil(self.tokens / (self.k * self.k))

    @property
    def padded_tokens(self) -> int:
        return self.k * self.bundle_length_group

    def single_bundles(self) -> list[list[int]]:
        return _bundles_from_perm(self.single_perm, self.k, self.bundle_length_single, self.tokens)

    def group_bundles(self) -> list[list[int]]:
        return _bundles_from_perm(self.group_perm, self.k, self.bundle_length_group, self.tokens)


def _bundles_from_perm(perm: np.ndarray, count: int, length: int, real: int) -> list[list[int]]:
    inverse = np.full(count * length, -1, dtype=np.int64)
    inverse[perm[:real]] = np.arange(real)
    out = []
    for b in range(count):
        members = inverse[b * length : (b + 1) * length]
        out.append([int(m) for m in members if m >= 0])
    return out


def build_plan(grid: TokenGrid, k: int) -> SkiparsePlan:
    """Closed-form index maps for both skip paths.

    The single path requires k | L; the group path pads when k**2 does not
    divide L.
    """
    length = grid.tokens
    if k < 1:
        raise RatioError(f"sparse ratio k must be >= 1, got {k}")
    if k > length:
        raise RatioError(f"k={k} exceeds token count L={length}")
    if length % k != 0:
        raise RatioError(f"single skip requires k | L, got L={length}, k={k}")
    e = np.arange(length, dtype=np.int64)
    single = (e % k) * (length // k) + e // k

    groups_per_bundle = math.ceil(length / (k * k))
    padded = k * k * groups_per_bundle
    ep = np.arange(padded, dtype=np.int64)
    group = ((ep // k) % k) * (k * groups_per_bundle) + (ep // (k * k)) * k + ep % k
    pad_mask = np.ones(padded, dtype=bool)
    pad_mask[group[:length]] = False
    return SkiparsePlan(grid=grid, k=k, single_perm=single, group_perm=group, pad_mask=pad_mask)


def apply_plan(tokens: np.ndarray, plan: SkiparsePlan, which: str) -> np.ndarray:
    """Permute (L, D) token vectors into (k, bundle_length, D).

    Group-path pad slots are zero filled; inverse_apply restores the
    original order exactly.
    """
    arr = np.asarray(tokens)
    squeeze = arr.ndim == 1
    if squeeze:
        arr = arr[:, None]
    if arr.ndim != 2 or arr.shape[0] != plan.tokens:
        raise ShapeError(f"expected {plan.tokens} token vectors, got shape {np.asarray(tokens).shape}")
    if which == "single":
        flat = np.empty_like(arr)
        flat[plan.single_perm] = arr
        out = flat.reshape(plan.k, plan.bundle_length_single, arr.shape[1])
    elif which == "group":
        flat = np.zeros((plan.padded_tokens, arr.shape[1]), dtype=arr.dtype)
        flat[plan.group_perm[: plan.tokens]] = arr
        out = flat.reshape(plan.k, plan.bundle_length_group, arr.shape[1])
    else:
        raise ShapeError(f"which must be 'single' or 'group', got {which!r}")
    return out[..., 0] if squeeze else out


def inverse_apply_plan(bundled: np.ndarray, plan: SkiparsePlan, which: str) -> np.ndarray:
    arr = np.asarray(bundled)
    squeeze = arr.ndim == 2
    if squeeze:
        arr = arr[..., None]
    if which == "single":
        expect = (plan.k, plan.bundle_length_single)
    elif which == "group":
        expect = (plan.k, plan.bundle_length_group)
    else:
        raise ShapeError(f"which must be 'single' or 'group', got {which!r}")
    if arr.shape[:2] != expect:
        raise ShapeError(f"expected bundled shape {expect}, got {arr.shape[:2]}")
    flat = arr.reshape(-1, arr.shape[2])
    perm = plan.single_perm if which == "single" else plan.group_perm[: plan.tokens]
    out = flat[perm]
    return out[..., 0] if squeeze else out


def _parity_bundle_ids(spec: AttentionSpec) -> tuple[np.ndarray, np.ndarray]:
    """Bundle id per token for even and odd block parities."""
    grid = spec.grid
    length = grid.tokens
    flat = np.arange(length, dtype=np.int64)
    hw = grid.h * grid.w
    if spec.mechanism is Mechanism.FULL_3D:
        zero = np.zeros(length, dtype=np.int64)
        return zero, zero
    if spec.mechanism is Mechanism.TWO_PLUS_ONE_D:
        return flat // hw, flat % hw
    if spec.mechanism is Mechanism.SKIP_WINDOW:
        return flat % spec.k, flat // spec.k
    return flat % spec.k, (flat // spec.k) % spec.k


def interaction_partners(spec: AttentionSpec, token: int, block_parity: str) -> set[int]:
    """Tokens sharing an attention sequence with `token` in that parity.

    Parities: 'even' is the first alternating block type (spatial plane for
    2+1D, stride bundle for the skip mechanisms), 'odd' the second (temporal
    column, window, or group bundle). The token itself is included.
    """
    if token < 0 or token >= spec.grid.tokens:
        raise IndexRangeError(f"token {token} out of range for L={spec.grid.tokens}")
    if block_parity not in ("even", "odd"):
        raise ShapeError(f"block_parity must be 'even' or 'odd', got {block_parity!r}")
    even_ids, odd_ids = _parity_bundle_ids(spec)
    ids = even_ids if block_parity == "even" else odd_ids
    return set(int(i) for i in np.nonzero(ids == ids[token])[0])


def _distance_counts(spec: AttentionSpec) -> tuple[float, float]:
    """(n1, n2): tokens at distance exactly 1 and 2 from a fixed source.

    Exact integers whenever the mechanism's divisibility assumptions hold;
    real-valued otherwise (the published approximation regime).
    """
    grid = spec.grid
    length = grid.tokens
    k = spec.k
    hw = grid.h * grid.w
    if spec.mechanism is Mechanism.FULL_3D:
        return length - 1, 0
    if spec.mechanism is Mechanism.TWO_PLUS_ONE_D:
        n1 = hw + grid.t - 2
        return n1, length - n1 - 1
    div = length % k == 0
    if spec.mechanism is Mechanism.SKIP_WINDOW:
        per = length // k if div else length / k
        n1 = per + k - 2
        return n1, length - n1 - 1
    div2 = length % (k * k) == 0
    per = length // k if div else length / k
    overlap = length // (k * k) if div2 else length / (k * k)
    n1 = 2 * per - overlap - 1
    return n1, length - n1 - 1


def ad_avg_closed_form(spec: AttentionSpec, convention: str = DEFAULT_CONVENTION) -> float:
    """Average attention distance from the per-mechanism distance counts."""
    if convention not in CONVENTIONS:
        raise ShapeError(f"convention must be one of {CONVENTIONS}, got {convention!r}")
    n1, n2 = _distance_counts(spec)
    length = spec.grid.tokens
    numerator = n1 + 2 * n2
    if convention == "include_self":
        return numerator / length
    if length == 1:
        return 0.0
    return numerator / (length - 1)


def _bfs_layers(ids: tuple[np.ndarray, np.ndarray], start_parity: int, bundle_id: int) -> np.ndarray:
    """First layer (>= 1) at which each token is reached from one bundle.

    Layer 1 is the member set of bundle `bundle_id` at `start_parity`;
    layer l+1 expands through the opposite parity's bundles.
    """
    length = ids[0].shape[0]
    layers = np.zeros(length, dtype=np.int64)
    frontier = ids[start_parity] == bundle_id
    layers[frontier] = 1
    reached = frontier.copy()
    parity = 1 - start_parity
    depth = 1
    while True:
        side = ids[parity]
        hit = np.zeros(int(side.max()) + 1, dtype=bool)
        hit[side[frontier]] = True
        members = hit[side]
        fresh = members & ~reached
        if not fresh.any():
            break
        depth += 1
        layers[fresh] = depth
        reached |= members
        frontier = fresh
        parity = 1 - parity
    return layers


def ad_avg_brute_force(
    spec: AttentionSpec,
    convention: str = DEFAULT_CONVENTION,
    cap: int = BRUTE_FORCE_CAP,
) -> float:
    """Exhaustive alternating-layer BFS average over all ordered token pairs.

    Per-source distances are the elementwise minimum over the two possible
    starting parities; distance sums stay exact integers until the single
    final division, so results are order independent.
    """
    if convention not in CONVENTIONS:
        raise ShapeError(f"convention must be one of {CONVENTIONS}, got {convention!r}")
    length = spec.grid.tokens
    if length > cap:
        raise SizeError(f"L={length} exceeds brute-force cap {cap}")
    ids = _parity_bundle_ids(spec)
    reach_cache: dict[tuple[int, int], np.ndarray] = {}

    def layers_for(parity: int, bundle: int) -> np.ndarray:
        key = (parity, bundle)
        if key not in reach_cache:
            reach_cache[key] = _bfs_layers(ids, parity, bundle)
        return reach_cache[key]

    sentinel = length + 2
    total = 0
    for token in range(length):
        # _bfs_layers marks unreached tokens with 0; a token always reaches
        # itself at layer 1 in both parities, so 0 only ever means unreachable.
        d_even = layers_for(0, int(ids[0][token]))
        d_odd = layers_for(1, int(ids[1][token]))
        dist = np.minimum(
            np.where(d_even == 0, sentinel, d_even),
            np.where(d_odd == 0, sentinel, d_odd),
        )
        if np.any(dist >= sentinel):
            raise StructureError(f"token {token} cannot reach every token; AD_avg undefined")
        total += int(dist.sum()) - int(dist[token])  # self distance is 0
    if convention == "include_self":
        return total / (length * length)
    if length == 1:
        return 0.0
    return total / (length * (length - 1))
