"""Adaptive gradient-clipping state machine and an N-worker step simulator.

Per step the guard sees one gradient norm per worker. A worker is flagged
anomalous when its norm exceeds the EMA of the max norm by more than three
EMA standard deviations (strictly greater; a norm exactly at the bound is
normal). Flagged workers contribute zero gradient; survivors are rescaled
by N/M so the all-reduced sum keeps its magnitude. The EMAs (update rate
alpha = 0.99) are then advanced with the post-discard maximum, so a single
arbitrarily large spike can never contaminate the running statistics.

Edge rules:
  - warm-up: the first `warmup` steps (default 100) update the EMAs without
    flagging anyone, seeded from the first observed max with zero variance;
  - all-anomalous steps (M = 0) are skipped outright: every scale is zero
    and the EMAs stay untouched;
  - the squared deviation in the variance update uses the pre-update EMA
    by default; `var_mode="post"` switches to the post-update value.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .errors import DomainError, ShapeError

DEFAULT_ALPHA = 0.99
DEFAULT_WARMUP = 100
SIGMA_FACTOR = 3.0


@dataclass(frozen=True)
class ClipGuardState:
    ema_gn: float = 0.0
    ema_var: float = 0.0
    alpha: float = DEFAULT_ALPHA
    step: int = 0
    initialized: bool = False
    warmup: int = DEFAULT_WARMUP
    var_mode: str = "pre"

    def __post_init__(self):
        if not 0.0 < self.alpha < 1.0:
            raise DomainError(f"alpha must be in (0, 1), got {self.alpha}")
        if self.var_mode not in ("pre", "post"):
            raise DomainError(f"var_mode must be 'pre' or 'post', got {self.var_mode!r}")
        if self.ema_var < 0:
            raise DomainError(f"ema_var must be >= 0, got {self.ema_var}")

    @property
    def threshold(self) -> float:
        return self.ema_gn + SIGMA_FACTOR * math.sqrt(self.ema_var)


@dataclass(frozen=True)
class StepVerdict:
    norms: tuple[float, ...]
    normal: tuple[bool, ...]
    workers: int
    normal_count: int
    scales: tuple[float, ...]
    threshold: float
    skipped: bool

    @property
    def discarded(self) -> int:
        return self.workers - self.normal_count


def update_ema(state: ClipGuardState, gn_max: float) -> ClipGuardState:
    """Advance both EMAs with one observed maximum norm.

    An uninitialized state seeds ema_gn with the observation and zero
    variance. The step counter is owned by judge_step and not touched here.
    """
    if gn_max < 0:
        raise DomainError(f"gn_max must be >= 0, got {gn_max}")
    if not state.initialized:
        return replace(state, ema_gn=float(gn_max), ema_var=0.0, initialized=True)
    a = state.alpha
    new_gn = a * state.ema_gn + (1.0 - a) * gn_max
    anchor = state.ema_gn if state.var_mode == "pre" else new_gn
    new_var = a * state.ema_var + (1.0 - a) * (gn_max - anchor) ** 2
    return replace(state, ema_gn=new_gn, ema_var=new_var)


def judge_step(state: ClipGuardState, norms: list[float]) -> tuple[StepVerdict, ClipGuardState]:
    """Flag anomalies, compute rescales, then advance the EMAs.

    Flags use the pre-update EMAs; the EMA update then sees only the
    post-discard maximum. Returns the verdict and the successor state
    (the input state is never mutated).
    """
    if len(norms) < 1:
        raise ShapeError("need at least one worker norm")
    values = tuple(float(v) for v in norms)
    if any(v < 0 for v in values):
        raise DomainError(f"norms must be >= 0, got {values}")
    n = len(values)
    current_step = state.step + 1
    threshold = state.threshold if state.initialized else math.inf
    in_warmup = current_step <= state.warmup or not state.initialized
    if in_warmup:
        normal = tuple(True for _ in values)
    else:
        bound = SIGMA_FACTOR * math.sqrt(state.ema_var)
        normal = tuple(v - state.ema_gn <= bound for v in values)
    m = sum(normal)
    if m == 0:
        verdict = StepVerdict(
            norms=values,
            normal=normal,
            workers=n,
            normal_count=0,
            scales=tuple(0.0 for _ in values),
            threshold=threshold,
            skipped=True,
        )
        return verdict, replace(state, step=current_step)
    scales = tuple(n / m if ok else 0.0 for ok in normal)
    verdict = StepVerdict(
        norms=values,
        normal=normal,
        workers=n,
        normal_count=m,
        scales=scales,
        threshold=threshold,
        skipped=False,
    )
    survivor_max = max(v for v, ok in zip(values, normal) if ok)
    new_state = replace(update_ema(state, survivor_max), step=current_step)
    return verdict, new_state


@dataclass(frozen=True)
class TraceBundle:
    """Eight aligned per-step series mirroring the guard's logging panels."""

    loss: np.ndarray               # (a) loss proxy, passed through
    discarded: np.ndarray          # (b) flagged local batches per step
    bound: np.ndarray              # (c) 3-sigma upper bound at decision time
    max_norm: np.ndarray           # (d) max over raw worker norms
    max_norm_var: np.ndarray       # (e) squared deviation of the raw max
    post_discard_max: np.ndarray   # (f) max over surviving norms (NaN if skipped)
    ema_gn: np.ndarray             # (g) EMA of the max norm, post update
    ema_var: np.ndarray            # (h) EMA of its variance, post update
    flagged: tuple[tuple[int, ...], ...]  # worker indices flagged per step

    @property
    def steps(self) -> int:
        return len(self.loss)

    def row(self, i: int) -> dict:
        def val(x):
            return None if isinstance(x, float) and math.isnan(x) else x

        return {
            "step": i,
            "loss": float(self.loss[i]),
            "discarded": int(self.discarded[i]),
            "bound": val(float(self.bound[i])),
            "max_norm": float(self.max_norm[i]),
            "max_norm_var": float(self.max_norm_var[i]),
            "post_discard_max": val(float(self.post_discard_max[i])),
            "ema_gn": float(self.ema_gn[i]),
            "ema_var": float(self.ema_var[i]),
            "flagged_workers": list(self.flagged[i]),
        }


def simulate_run(
    trace: np.ndarray,
    injected_anomalies: list[tuple[int, int, float]] | None = None,
    loss: np.ndarray | None = None,
    state: ClipGuardState | None = None,
) -> TraceBundle:
    """Drive the guard over a (steps, workers) norm trace.

    `injected_anomalies` overwrite individual (step, worker) norms before
    judging. The loss series is passed through untouched; when absent the
    per-step mean of the raw norms stands in.
    """
    norms = np.array(trace, dtype=np.float64)
    if norms.ndim != 2 or norms.size == 0:
        raise ShapeError(f"trace must be a non-empty (steps, workers) array, got {norms.shape}")
    steps, workers = norms.shape
    for step, worker, value in injected_anomalies or []:
        if not (0 <= step < steps and 0 <= worker < workers):
            raise ShapeError(f"injection ({step},{worker}) outside trace {norms.shape}")
        norms[step, worker] = value
    if loss is None:
        loss_series = norms.mean(axis=1)
    else:
        loss_series = np.asarray(loss, dtype=np.float64)
        if loss_series.shape != (steps,):
            raise ShapeError(f"loss series must have shape ({steps},)")

    guard = state or ClipGuardState()
    out = {
        name: np.zeros(steps, dtype=np.float64)
        for name in ("discarded", "bound", "max_norm", "max_norm_var", "post_discard_max", "ema_gn", "ema_var")
    }
    flagged: list[tuple[int, ...]] = []
    for i in range(steps):
        row = norms[i]
        pre = guard
        verdict, guard = judge_step(guard, row.tolist())
        raw_max = float(row.max())
        out["discarded"][i] = verdict.discarded
        out["bound"][i] = verdict.threshold if math.isfinite(verdict.threshold) else math.nan
        out["max_norm"][i] = raw_max
        out["max_norm_var"][i] = (raw_max - pre.ema_gn) ** 2 if pre.initialized else 0.0
        if verdict.skipped:
            out["post_discard_max"][i] = math.nan
        else:
            out["post_discard_max"][i] = max(
                v for v, ok in zip(verdict.norms, verdict.normal) if ok
            )
        out["ema_gn"][i] = guard.ema_gn
        out["ema_var"][i] = guard.ema_var
        flagged.append(tuple(j for j, ok in enumerate(verdict.normal) if not ok))
    return TraceBundle(
        loss=loss_series,
        discarded=out["discarded"],
        bound=out["bound"],
        max_norm=out["max_norm"],
        max_norm_var=out["max_norm_var"],
        post_discard_max=out["post_discard_max"],
        ema_gn=out["ema_gn"],
        ema_var=out["ema_var"],
        flagged=tuple(flagged),
    )


def baseline_trace(steps: int, workers: int, seed: int, base: float = 1.0, jitter: float = 0.05) -> np.ndarray:
    """Bounded-noise synthetic norms: base + uniform(-jitter, +jitter).

    Uniform noise keeps every deviation strictly inside the 3-sigma bound,
    so a clean run never produces a false flag.
    """
    rs = np.random.RandomState(seed)
    return base + rs.uniform(-jitter, jitter, size=(steps, workers))
