"""Deterministic building blocks for video-generation pipelines.

Everything here is closed form and network free: a lossless wavelet codec,
streaming causal convolution with an exact inter-chunk cache rule, skip-
sparse attention index plans with attention-distance analytics, aspect-
ratio token bucketing, an adaptive gradient-norm guard, and clip-curation
statistics.
"""

from .buckets import (
    Batch,
    BatchPlan,
    BucketEntry,
    BucketKey,
    BucketPlan,
    Rejection,
    SampleMeta,
    assign_bucket,
    plan_batches,
    resolve_buckets,
)
from .curation import (
    ClipVerdict,
    CropRect,
    CutThresholds,
    SimilaritySeries,
    curate_clip,
    detect_cuts,
    frame_difference_series,
    motion_filter,
    motion_score,
    ocr_crop_geometry,
    slice_plan,
)
from .errors import VgkitError
from .gradguard import (
    ClipGuardState,
    StepVerdict,
    TraceBundle,
    baseline_trace,
    judge_step,
    simulate_run,
    update_ema,
)
from .rope import RopeConfig, rope_apply
from .skiparse import (
    AttentionSpec,
    Mechanism,
    SkiparsePlan,
    ad_avg_brute_force,
    ad_avg_closed_form,
    apply_plan,
    build_plan,
    interaction_partners,
    inverse_apply_plan,
)
from .stream import (
    CausalConvSpec,
    LosslessReport,
    StreamState,
    cache_size,
    direct_causal_conv,
    stream_causal_conv,
    verify_lossless,
)
from .tensor import (
    Tensor4D,
    TokenGrid,
    constant_tensor,
    load_tensor,
    patch_grid,
    patch_token_count,
    random_tensor,
    save_tensor,
    zeros_tensor,
)
from .wavelet import (
    HaarFilters,
    PyramidLevel,
    SubbandPyramid,
    adaptive_adv_weight,
    composite_loss,
    decompose,
    forward_2d_level,
    forward_3d_level,
    load_pyramid,
    reconstruct,
    save_pyramid,
    wl_loss,
)

__version__ = "0.1.0"
