"""Command-line interface.

One command per process; subcommand families: wavelet, stream, skiparse,
bucket, gradguard, curate. All structured output is JSON (or JSONL for
record streams) on stdout; domain failures print a JSON error object on
stderr and exit 1; usage problems exit 2. The OSP_SEED environment
variable, when set, overrides any --seed flag, and every seeded command is
byte-for-byte reproducible under a fixed seed.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from . import buckets as bk
from . import curation as cu
from . import gradguard as gg
from . import rope as rp
from . import skiparse as sk
from . import stream as st
from . import tensor as tn
from . import wavelet as wv
from .errors import VgkitError


def _emit(obj) -> None:
    sys.stdout.write(json.dumps(obj) + "\n")


def _emit_lines(objs) -> None:
    for obj in objs:
        _emit(obj)


def _seed(args) -> int:
    env = os.environ.get("OSP_SEED")
    if env is not None:
        return int(env)
    return args.seed


def _parse_triple(text: str, flag: str) -> tuple[int, int, int]:
    parts = text.split(",")
    if len(parts) != 3:
        raise VgkitError(f"{flag} expects three comma-separated integers, got {text!r}")
    return tuple(int(p) for p in parts)


def _read_series(path: str) -> cu.SimilaritySeries:
    values, indices = [], []
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            rec = json.loads(line)
            values.append(float(rec["value"]))
            indices.append(int(rec.get("index", len(indices) + 1)))
    if not values:
        raise VgkitError(f"{path}: empty series")
    return cu.SimilaritySeries(values=np.array(values), frame_indices=np.array(indices))


def _read_thresholds(path: str | None) -> cu.CutThresholds:
    if path is None:
        return cu.CutThresholds()
    with open(path, "r", encoding="utf-8") as fh:
        cfg = json.load(fh)
    return cu.CutThresholds(**cfg)


# ---------------------------------------------------------------- wavelet

def _cmd_wavelet_decompose(args) -> int:
    x = tn.load_tensor(args.input)
    pyramid = wv.decompose(x, args.schedule.split(","))
    wv.save_pyramid(pyramid, args.out)
    _emit(
        {
            "schedule": list(pyramid.schedule),
            "levels": [
                {"kind": lvl.kind, "band_shape": list(lvl.band_shape)} for lvl in pyramid.levels
            ],
            "out": args.out,
        }
    )
    return 0


def _cmd_wavelet_reconstruct(args) -> int:
    pyramid = wv.load_pyramid(args.pyramid)
    out = wv.reconstruct(pyramid)
    tn.save_tensor(out, args.out)
    _emit({"shape": list(out.shape), "out": args.out})
    return 0


def _cmd_wavelet_verify(args) -> int:
    x = tn.load_tensor(args.input)
    schedule = args.schedule.split(",")
    pyramid = wv.decompose(x, schedule)
    recon = wv.reconstruct(pyramid)
    max_err = float(
        np.max(np.abs(recon.data.astype(np.float64) - x.data.astype(np.float64)), initial=0.0)
    )
    levels = []
    current = x
    for lvl in pyramid.levels:
        energy_in = wv.tensor_energy(current)
        energy_out = wv.level_energy(lvl)
        levels.append(
            {
                "kind": lvl.kind,
                "energy_in": energy_in,
                "energy_out": energy_out,
                "energy_rel_err": abs(energy_out - energy_in) / energy_in if energy_in else 0.0,
            }
        )
        current = lvl.bands[lvl.lowband_label]
    _emit(
        {
            "schedule": schedule,
            "max_abs_error": max_err,
            "levels": levels,
            "ok": max_err <= args.tolerance,
        }
    )
    return 0


# ----------------------------------------------------------------- stream

def _conv_spec(args) -> st.CausalConvSpec:
    taps = tuple(float(v) for v in args.taps.split(","))
    return st.CausalConvSpec(k_t=len(taps), s_t=args.stride, taps=taps)


def _cmd_stream_run(args) -> int:
    x = tn.load_tensor(args.input)
    spec = _conv_spec(args)
    out, state = st.stream_with_state(x, spec, args.chunk)
    tn.save_tensor(out, args.out)
    _emit(
        {
            "frames_in": x.frames,
            "frames_out": out.frames,
            "chunks": state.chunk_index,
            "cache_sizes": list(state.cache_log),
            "out": args.out,
        }
    )
    return 0


def _cmd_stream_verify(args) -> int:
    x = tn.load_tensor(args.input)
    report = st.verify_lossless(x, _conv_spec(args), args.chunk)
    _emit(report.to_dict())
    return 0


def _cmd_stream_cache_size(args) -> int:
    spec = st.CausalConvSpec(k_t=args.k_t, s_t=args.stride, taps=tuple([0.0] * args.k_t))
    sizes = {m: st.cache_size(spec, args.chunk, m) for m in range(1, args.m + 1)}
    _emit(
        {
            "k_t": args.k_t,
            "s_t": args.stride,
            "t_chunk": args.chunk,
            "cache_sizes": {str(m): v for m, v in sizes.items()},
        }
    )
    return 0


# --------------------------------------------------------------- skiparse

def _cmd_skiparse_plan(args) -> int:
    t, h, w = _parse_triple(args.grid, "--grid")
    plan = sk.build_plan(tn.TokenGrid(t, h, w), args.k)
    summary = {
        "grid": [t, h, w],
        "tokens": plan.tokens,
        "k": plan.k,
        "single_bundles": plan.bundle_count_single,
        "single_bundle_length": plan.bundle_length_single,
        "group_bundles": plan.bundle_count_group,
        "group_bundle_length": plan.bundle_length_group,
        "group_padding": plan.padded_tokens - plan.tokens,
    }
    if args.out:
        for name, arr in (("single", plan.single_perm), ("group", plan.group_perm)):
            path = f"{args.out}.{name}.u32"
            arr.astype("<u4").tofile(path)
            summary[f"{name}_perm_file"] = path
        if plan.padded_tokens != plan.tokens:
            path = f"{args.out}.padmask.u8"
            plan.pad_mask.astype(np.uint8).tofile(path)
            summary["pad_mask_file"] = path
        _emit(summary)
    else:
        summary["single_perm"] = plan.single_perm.tolist()
        summary["group_perm"] = plan.group_perm.tolist()
        summary["pad_mask"] = plan.pad_mask.astype(int).tolist()
        _emit(summary)
    return 0


def _cmd_skiparse_analyze(args) -> int:
    t, h, w = _parse_triple(args.grid, "--grid")
    grid = tn.TokenGrid(t, h, w)
    mech = sk.Mechanism.parse(args.mechanism)
    spec = sk.AttentionSpec(mechanism=mech, grid=grid, k=args.k)
    result = {
        "mechanism": mech.value,
        "k": args.k,
        "grid": [t, h, w],
        "tokens": grid.tokens,
        "convention": args.convention,
        "ad_avg_closed": sk.ad_avg_closed_form(spec, args.convention),
    }
    if args.brute_force:
        result["ad_avg_brute"] = sk.ad_avg_brute_force(spec, args.convention)
    if mech is sk.Mechanism.SKIPARSE and grid.tokens % args.k == 0:
        plan = sk.build_plan(grid, args.k)
        result["bundle_stats"] = {
            "single": {"bundles": plan.bundle_count_single, "length": plan.bundle_length_single},
            "group": {
                "bundles": plan.bundle_count_group,
                "length": plan.bundle_length_group,
                "padding": plan.padded_tokens - plan.tokens,
            },
        }
    elif mech is sk.Mechanism.SKIP_WINDOW and grid.tokens % args.k == 0:
        result["bundle_stats"] = {
            "stride_sets": {"bundles": args.k, "length": grid.tokens // args.k},
            "windows": {"bundles": grid.tokens // args.k, "length": args.k},
        }
    _emit(result)
    return 0


def _cmd_skiparse_rope_check(args) -> int:
    seed = _seed(args)
    cfg = rp.RopeConfig(partitions=args.partitions, dim=args.dim)
    rs = np.random.RandomState(seed)
    n = args.vectors
    vecs = rs.standard_normal((n, args.dim))
    pos = rs.randint(0, 64, size=(n, args.partitions))
    encoded = rp.rope_apply(vecs, pos, cfg)
    norm_err = float(
        np.max(np.abs(np.linalg.norm(encoded, axis=1) - np.linalg.norm(vecs, axis=1)))
    )
    # Relative-offset property: dot products depend only on position deltas.
    q, u = rs.standard_normal((2, n, args.dim))
    delta = rs.randint(1, 16, size=(n, args.partitions))
    base_a = rs.randint(0, 16, size=(n, args.partitions))
    base_b = rs.randint(16, 32, size=(n, args.partitions))
    dot_a = np.sum(rp.rope_apply(q, base_a, cfg) * rp.rope_apply(u, base_a + delta, cfg), axis=1)
    dot_b = np.sum(rp.rope_apply(q, base_b, cfg) * rp.rope_apply(u, base_b + delta, cfg), axis=1)
    offset_err = float(np.max(np.abs(dot_a - dot_b)))
    _emit(
        {
            "dim": args.dim,
            "partitions": args.partitions,
            "vectors": n,
            "seed": seed,
            "max_norm_error": norm_err,
            "max_relative_offset_error": offset_err,
            "ok": norm_err <= 1e-5 and offset_err <= 1e-5,
        }
    )
    return 0


# ----------------------------------------------------------------- bucket

def _parse_ratios(text: str) -> list[tuple[int, int]]:
    out = []
    for part in text.split(","):
        hw = part.split(":")
        if len(hw) != 2:
            raise VgkitError(f"ratio {part!r} must look like H:W")
        out.append((int(hw[0]), int(hw[1])))
    return out


def _read_samples(path: str) -> list[bk.SampleMeta]:
    samples = []
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            rec = json.loads(line)
            samples.append(
                bk.SampleMeta(
                    id=str(rec["id"]),
                    height=int(rec["height"]),
                    width=int(rec["width"]),
                    frames=int(rec["frames"]),
                )
            )
    return samples


def _load_plan(path: str) -> bk.BucketPlan:
    with open(path, "r", encoding="utf-8") as fh:
        cfg = json.load(fh)
    ratios = [tuple(int(v) for v in r.split(":")) for r in
              [e["ratio"] for e in cfg["entries"]] + cfg.get("excluded", [])]
    return bk.resolve_buckets(cfg["max_token"], cfg["stride"], ratios)


def _cmd_bucket_plan(args) -> int:
    plan = bk.resolve_buckets(args.max_token, args.stride, _parse_ratios(args.ratios))
    _emit(plan.to_dict())
    return 0


def _cmd_bucket_assign(args) -> int:
    plan = _load_plan(args.plan)
    frames = [int(f) for f in args.frames.split(",")]
    rows = []
    for sample in _read_samples(args.samples):
        verdict = bk.assign_bucket(sample, plan, frames)
        if isinstance(verdict, bk.Rejection):
            rows.append({"id": sample.id, "rejected": True, "reason": verdict.reason})
        else:
            rows.append({"id": sample.id, "rejected": False, "bucket": verdict.to_dict()})
    _emit_lines(rows)
    return 0


def _cmd_bucket_batches(args) -> int:
    plan = _load_plan(args.plan)
    frames = [int(f) for f in args.frames.split(",")]
    result = bk.plan_batches(
        _read_samples(args.samples), plan, frames, args.global_batch, _seed(args)
    )
    rows = [
        {"batch": i, "bucket": b.key.to_dict(), "samples": list(b.sample_ids)}
        for i, b in enumerate(result.batches)
    ]
    rows.append({"dropped": list(result.dropped), "rejected": [list(r) for r in result.rejected]})
    _emit_lines(rows)
    return 0


# --------------------------------------------------------------- gradguard

def _parse_injections(specs: list[str]) -> list[tuple[int, int, float]]:
    out = []
    for spec in specs or []:
        parts = spec.split(":")
        if len(parts) != 3:
            raise VgkitError(f"--inject expects step:worker:norm, got {spec!r}")
        out.append((int(parts[0]), int(parts[1]), float(parts[2])))
    return out


def _read_trace(path: str) -> np.ndarray:
    rows = []
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            rec = json.loads(line)
            rows.append((int(rec["step"]), [float(v) for v in rec["norms"]]))
    if not rows:
        raise VgkitError(f"{path}: empty trace")
    rows.sort(key=lambda r: r[0])
    return np.array([norms for _, norms in rows], dtype=np.float64)


def _cmd_gradguard_simulate(args) -> int:
    seed = _seed(args)
    if args.trace:
        trace = _read_trace(args.trace)
        args.workers = trace.shape[1]
    else:
        trace = gg.baseline_trace(
            args.steps, args.workers, seed, base=args.base, jitter=args.jitter
        )
    bundle = gg.simulate_run(trace, injected_anomalies=_parse_injections(args.inject))
    rows = [bundle.row(i) for i in range(bundle.steps)]
    if args.out:
        os.makedirs(args.out, exist_ok=True)
        jsonl_path = os.path.join(args.out, "trace.jsonl")
        with open(jsonl_path, "w", encoding="utf-8") as fh:
            for row in rows:
                fh.write(json.dumps(row) + "\n")
        from .report import render_gradguard_trace

        figure_path = render_gradguard_trace(bundle, os.path.join(args.out, "trace.png"))
        _emit(
            {
                "steps": bundle.steps,
                "workers": args.workers,
                "seed": seed,
                "discarded_total": int(bundle.discarded.sum()),
                "trace": jsonl_path,
                "figure": figure_path,
            }
        )
    else:
        _emit_lines(rows)
    return 0


def _cmd_gradguard_judge(args) -> int:
    state = gg.ClipGuardState(
        ema_gn=args.ema_gn,
        ema_var=args.ema_var,
        step=args.step,
        initialized=True,
        warmup=args.warmup,
    )
    norms = [float(v) for v in args.norms.split(",")]
    verdict, new_state = gg.judge_step(state, norms)
    _emit(
        {
            "norms": list(verdict.norms),
            "normal": [int(v) for v in verdict.normal],
            "workers": verdict.workers,
            "normal_count": verdict.normal_count,
            "scales": list(verdict.scales),
            "threshold": verdict.threshold,
            "skipped": verdict.skipped,
            "ema_gn": new_state.ema_gn,
            "ema_var": new_state.ema_var,
        }
    )
    return 0


# ----------------------------------------------------------------- curate

def _series_from_args(args) -> cu.SimilaritySeries:
    if getattr(args, "tensor", None):
        return cu.frame_difference_series(tn.load_tensor(args.tensor))
    if getattr(args, "series", None):
        return _read_series(args.series)
    raise VgkitError("provide --series or --tensor")


def _cmd_curate_cuts(args) -> int:
    series = _series_from_args(args)
    th = _read_thresholds(args.thresholds)
    cuts = cu.detect_cuts(series, th)
    if args.plot:
        from .report import render_similarity_series

        render_similarity_series(series, cuts, args.plot, th)
    mu, sigma = cu.series_stats(series)
    _emit(
        {
            "cut_indices": cuts,
            "cut_frames": [int(series.frame_indices[i]) for i in cuts],
            "mean": mu,
            "std": sigma,
            "figure": args.plot,
        }
    )
    return 0


def _cmd_curate_motion(args) -> int:
    series = _series_from_args(args)
    score = cu.motion_score(series)
    _emit({"motion_score": score, "kept": cu.motion_filter(score, args.low, args.high)})
    return 0


def _cmd_curate_crop(args) -> int:
    with open(args.boxes, "r", encoding="utf-8") as fh:
        boxes = [tuple(int(v) for v in box) for box in json.load(fh)]
    rect = cu.ocr_crop_geometry(args.height, args.width, boxes, args.max_edge_fraction)
    out = rect.to_dict()
    out["height"] = rect.height
    out["width"] = rect.width
    out["area_fraction"] = rect.area / (args.height * args.width)
    _emit(out)
    return 0


def _cmd_curate_clip(args) -> int:
    series = _series_from_args(args)
    verdict = cu.curate_clip(
        series,
        args.frames,
        _read_thresholds(args.thresholds),
        aesthetic_score=args.aesthetic,
        technical_score=args.technical,
    )
    _emit(verdict.to_dict())
    return 0


def _cmd_curate_slice(args) -> int:
    windows = cu.slice_plan(args.duration, args.max_clip)
    _emit({"windows": [[s, e] for s, e in windows]})
    return 0


# ------------------------------------------------------------------ wiring

def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="vgkit",
        description="Deterministic video-pipeline math: wavelet codec, streaming "
        "causal convolution, skip-sparse attention plans, token bucketing, "
        "gradient guard, curation statistics.",
    )
    parser.add_argument(
        "--human", action="store_true", help="print errors as plain text instead of JSON"
    )
    top = parser.add_subparsers(dest="family", required=True)

    wavelet = top.add_parser("wavelet", help="Haar codec").add_subparsers(dest="cmd", required=True)
    p = wavelet.add_parser("decompose", help="tensor file -> pyramid directory")
    p.add_argument("--input", required=True)
    p.add_argument("--schedule", default="3d,3d,2d", help="comma list of 3d/2d levels")
    p.add_argument("--out", required=True, help="pyramid output directory")
    p.set_defaults(func=_cmd_wavelet_decompose)
    p = wavelet.add_parser("reconstruct", help="pyramid directory -> tensor file")
    p.add_argument("--pyramid", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_wavelet_reconstruct)
    p = wavelet.add_parser("verify", help="round-trip and energy check")
    p.add_argument("--input", required=True)
    p.add_argument("--schedule", default="3d,3d,2d")
    p.add_argument("--tolerance", type=float, default=1e-5)
    p.set_defaults(func=_cmd_wavelet_verify)

    stream = top.add_parser("stream", help="causal streaming conv").add_subparsers(dest="cmd", required=True)
    p = stream.add_parser("run", help="streamed convolution over a tensor file")
    p.add_argument("--input", required=True)
    p.add_argument("--taps", required=True, help="comma list; kernel size = count")
    p.add_argument("--stride", type=int, default=1)
    p.add_argument("--chunk", type=int, default=4)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_stream_run)
    p = stream.add_parser("verify-lossless", help="streaming vs direct, bitwise")
    p.add_argument("--input", required=True)
    p.add_argument("--taps", required=True)
    p.add_argument("--stride", type=int, default=1)
    p.add_argument("--chunk", type=int, default=4)
    p.set_defaults(func=_cmd_stream_verify)
    p = stream.add_parser("cache-size", help="inter-chunk cache occupancy")
    p.add_argument("--k-t", type=int, required=True, dest="k_t")
    p.add_argument("--stride", type=int, default=1)
    p.add_argument("--chunk", type=int, required=True)
    p.add_argument("--m", type=int, default=1, help="report chunks 1..m")
    p.set_defaults(func=_cmd_stream_cache_size)

    skiparse = top.add_parser("skiparse", help="sparse attention index engine").add_subparsers(dest="cmd", required=True)
    p = skiparse.add_parser("plan", help="emit both skip permutations")
    p.add_argument("--grid", required=True, help="T,H,W token grid")
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--out", help="write binary u32 index files with this prefix")
    p.set_defaults(func=_cmd_skiparse_plan)
    p = skiparse.add_parser("analyze", help="average attention distance")
    p.add_argument("--grid", required=True)
    p.add_argument("--k", type=int, default=1)
    p.add_argument("--mechanism", required=True, help="full3d | 2+1d | skip-window | skiparse")
    p.add_argument("--brute-force", action="store_true")
    p.add_argument("--convention", choices=sk.CONVENTIONS, default=sk.DEFAULT_CONVENTION)
    p.set_defaults(func=_cmd_skiparse_analyze)
    p = skiparse.add_parser("rope-check", help="rotary encoding property check")
    p.add_argument("--dim", type=int, default=96)
    p.add_argument("--partitions", type=int, default=3)
    p.add_argument("--vectors", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=_cmd_skiparse_rope_check)

    bucket = top.add_parser("bucket", help="min-max token planning").add_subparsers(dest="cmd", required=True)
    p = bucket.add_parser("plan", help="resolve maximal dims per ratio")
    p.add_argument("--max-token", type=int, required=True)
    p.add_argument("--stride", type=int, required=True)
    p.add_argument("--ratios", required=True, help="e.g. 1:1,3:4,9:16")
    p.set_defaults(func=_cmd_bucket_plan)
    p = bucket.add_parser("assign", help="map samples to bucket keys")
    p.add_argument("--plan", required=True, help="JSON plan from `bucket plan`")
    p.add_argument("--samples", required=True, help="JSONL {id,height,width,frames}")
    p.add_argument("--frames", default="29,93", help="frame buckets")
    p.set_defaults(func=_cmd_bucket_assign)
    p = bucket.add_parser("batches", help="deterministic uniform-token batches")
    p.add_argument("--plan", required=True)
    p.add_argument("--samples", required=True)
    p.add_argument("--frames", default="29,93")
    p.add_argument("--global-batch", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=_cmd_bucket_batches)

    gradguard = top.add_parser("gradguard", help="adaptive gradient clipping").add_subparsers(dest="cmd", required=True)
    p = gradguard.add_parser("simulate", help="N-worker training-step simulator")
    p.add_argument("--workers", type=int, default=8)
    p.add_argument("--steps", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--base", type=float, default=1.0)
    p.add_argument("--jitter", type=float, default=0.05)
    p.add_argument("--trace", help="input trace JSONL {step, norms:[...]}; replaces the synthetic one")
    p.add_argument("--inject", action="append", help="step:worker:norm, repeatable")
    p.add_argument("--out", help="directory for trace.jsonl + trace.png")
    p.set_defaults(func=_cmd_gradguard_simulate)
    p = gradguard.add_parser("judge", help="one-step verdict for given norms")
    p.add_argument("--ema-gn", type=float, required=True, dest="ema_gn")
    p.add_argument("--ema-var", type=float, required=True, dest="ema_var")
    p.add_argument("--norms", required=True, help="comma list of worker norms")
    p.add_argument("--step", type=int, default=1000, help="current step counter")
    p.add_argument("--warmup", type=int, default=gg.DEFAULT_WARMUP)
    p.set_defaults(func=_cmd_gradguard_judge)

    curate = top.add_parser("curate", help="clip curation statistics").add_subparsers(dest="cmd", required=True)
    p = curate.add_parser("cuts", help="jump-cut detection over a series")
    p.add_argument("--series", help="JSONL {index,value}")
    p.add_argument("--tensor", help="tensor file; uses the pixel-difference stand-in")
    p.add_argument("--thresholds", help="JSON with CutThresholds fields")
    p.add_argument("--plot", help="render the series figure to this path")
    p.set_defaults(func=_cmd_curate_cuts)
    p = curate.add_parser("motion", help="motion score + range filter")
    p.add_argument("--series")
    p.add_argument("--tensor")
    p.add_argument("--low", type=float, default=cu.MOTION_LOW)
    p.add_argument("--high", type=float, default=cu.MOTION_HIGH)
    p.set_defaults(func=_cmd_curate_motion)
    p = curate.add_parser("crop", help="OCR edge-band crop geometry")
    p.add_argument("--height", type=int, required=True)
    p.add_argument("--width", type=int, required=True)
    p.add_argument("--boxes", required=True, help="JSON list of [x0,y0,x1,y1]")
    p.add_argument("--max-edge-fraction", type=float, default=cu.MAX_EDGE_FRACTION)
    p.set_defaults(func=_cmd_curate_crop)
    p = curate.add_parser("clip", help="full per-clip verdict")
    p.add_argument("--series")
    p.add_argument("--tensor")
    p.add_argument("--frames", type=int, required=True)
    p.add_argument("--thresholds")
    p.add_argument("--aesthetic", type=float)
    p.add_argument("--technical", type=float)
    p.set_defaults(func=_cmd_curate_clip)
    p = curate.add_parser("slice", help="split a duration into clip windows")
    p.add_argument("--duration", type=float, required=True)
    p.add_argument("--max-clip", type=float, default=cu.MAX_CLIP_SECONDS)
    p.set_defaults(func=_cmd_curate_slice)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (VgkitError, OSError, ValueError, KeyError, json.JSONDecodeError) as exc:
        if args.human:
            sys.stderr.write(f"error: {exc}\n")
        else:
            sys.stderr.write(
                json.dumps({"error": type(exc).__name__, "message": str(exc)}) + "\n"
            )
        return 1


if __name__ == "__main__":
    raise SystemExit(main())
