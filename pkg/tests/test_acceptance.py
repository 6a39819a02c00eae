"""Acceptance suite: one test per release criterion, each printing a
PASS/FAIL line with its measured numbers (run with -s to see them).
Tolerances are pinned here and nowhere else.
"""

import json
import math
import time

import numpy as np
import pytest

from vgkit.buckets import resolve_buckets
from vgkit.cli import main as cli_main
from vgkit.curation import SimilaritySeries, detect_cuts, motion_filter, ocr_crop_geometry
from vgkit.gradguard import ClipGuardState, baseline_trace, judge_step, simulate_run
from vgkit.rope import RopeConfig, rope_apply
from vgkit.skiparse import (
    AttentionSpec,
    Mechanism,
    ad_avg_brute_force,
    ad_avg_closed_form,
    apply_plan,
    build_plan,
    inverse_apply_plan,
)
from vgkit.stream import CausalConvSpec, cache_size, verify_lossless
from vgkit.tensor import TokenGrid, random_tensor
from vgkit.wavelet import decompose, level_energy, reconstruct, tensor_energy


def report(name: str, ok: bool, detail: str) -> None:
    print(f"{'PASS' if ok else 'FAIL'}: {name} ({detail})")
    assert ok, f"{name}: {detail}"


# 1 ------------------------------------------------------------------------

AD_TABLE = [
    ("full3d", 1, 1.000),
    ("2+1d", 1, 1.957),
    ("skip-window", 2, 1.500),
    ("skip-window", 4, 1.750),
    ("skip-window", 8, 1.875),
    ("skiparse", 2, 1.250),
    ("skiparse", 4, 1.563),
    ("skiparse", 8, 1.766),
]


def test_criterion_1_attention_distance_table(capsys):
    start = time.perf_counter()
    got = {}
    for mechanism, k, _ in AD_TABLE:
        code = cli_main(
            ["skiparse", "analyze", "--grid", "24,32,32", "--k", str(k),
             "--mechanism", mechanism]
        )
        assert code == 0
        got[(mechanism, k)] = json.loads(capsys.readouterr().out)["ad_avg_closed"]
    elapsed = time.perf_counter() - start
    with capsys.disabled():
        mismatches = [
            (m, k, round(got[(m, k)], 3), want)
            for m, k, want in AD_TABLE
            if round(got[(m, k)], 3) != want
        ]
        report(
            "criterion 1: eight reference attention-distance values at 24x32x32",
            not mismatches and elapsed < 1.0,
            f"mismatches={mismatches}, elapsed={elapsed:.3f}s < 1s",
        )


# 2 ------------------------------------------------------------------------

def test_criterion_2_brute_force_oracle_agreement():
    start = time.perf_counter()
    worst = 0.0
    for dims in ((2, 4, 4), (4, 4, 4), (4, 8, 8)):
        grid = TokenGrid(*dims)
        for k in (2, 4):
            assert grid.tokens % (k * k) == 0
            spec = AttentionSpec(Mechanism.SKIPARSE, grid, k)
            gap = abs(ad_avg_brute_force(spec) - ad_avg_closed_form(spec))
            worst = max(worst, gap)
        spec21 = AttentionSpec(Mechanism.TWO_PLUS_ONE_D, grid)
        exact = ad_avg_brute_force(spec21) == ad_avg_closed_form(spec21)
        if not exact:
            worst = math.inf
    elapsed = time.perf_counter() - start
    report(
        "criterion 2: BFS oracle vs closed forms on divisible grids",
        worst <= 1e-9 and elapsed < 30.0,
        f"max |brute-closed|={worst:.3e} <= 1e-9, 2+1d exact, elapsed={elapsed:.2f}s < 30s",
    )


# 3 ------------------------------------------------------------------------

def test_criterion_3_wavelet_perfect_reconstruction():
    start = time.perf_counter()
    rs = np.random.RandomState(2024)
    cases = [
        (("3d",), (2, 4)),
        (("3d", "3d"), (4, 8)),
        (("3d", "3d", "2d"), (4, 8)),
    ]
    worst_err, worst_energy = 0.0, 0.0
    count = 0
    while count < 200:
        schedule, t_choices = cases[count % len(cases)]
        c = int(rs.randint(1, 4))
        t = int(rs.choice(t_choices))
        h = int(rs.choice((16, 32, 64)))
        w = int(rs.choice((16, 32, 64)))
        x = random_tensor(c, t, h, w, seed=count)
        pyramid = decompose(x, schedule)
        recon = reconstruct(pyramid)
        err = float(np.max(np.abs(recon.data.astype(np.float64) - x.data.astype(np.float64))))
        worst_err = max(worst_err, err)
        current = x
        for level in pyramid.levels:
            e_in, e_out = tensor_energy(current), level_energy(level)
            worst_energy = max(worst_energy, abs(e_out - e_in) / e_in)
            current = level.bands[level.lowband_label]
        count += 1
    elapsed = time.perf_counter() - start
    report(
        "criterion 3: perfect reconstruction over 200 random tensors",
        worst_err <= 1e-5 and worst_energy <= 1e-4 and elapsed < 10.0,
        f"max|recon-x|={worst_err:.2e} <= 1e-5, energy rel err={worst_energy:.2e} <= 1e-4, "
        f"elapsed={elapsed:.2f}s < 10s",
    )


# 4 ------------------------------------------------------------------------

def test_criterion_4_causal_cache_losslessness():
    rs = np.random.RandomState(99)
    checked = 0
    all_identical = True
    for k_t in range(1, 6):
        for s_t in (1, 2):
            for t_chunk in range(1, 9):
                t = 1 + s_t * int(rs.randint(1, 9))
                spec = CausalConvSpec(k_t, s_t, tuple(rs.standard_normal(k_t)))
                x = random_tensor(2, t, 4, 4, seed=checked)
                result = verify_lossless(x, spec, t_chunk)
                all_identical &= result.identical and result.max_abs_diff == 0.0
                checked += 1
    ref_spec = CausalConvSpec(3, 1, (0.0, 0.0, 0.0))
    cache_ok = all(cache_size(ref_spec, 4, m) == 2 for m in range(1, 6))
    report(
        "criterion 4: streamed inference bitwise equals direct inference",
        all_identical and cache_ok,
        f"{checked} (k_t,s_t,T_chunk) combinations bitwise identical; "
        f"cache_size(k_t=3,s_t=1,T_chunk=4,m>=1)=2",
    )


# 5 ------------------------------------------------------------------------

def test_criterion_5_min_max_token_budget():
    plan = resolve_buckets(65536, 16, [(1, 1), (3, 4), (9, 16)])
    by_ratio = {(e.ratio_h, e.ratio_w): e for e in plan.entries}
    wide = by_ratio[(9, 16)]
    min_ok = plan.min_token == 36864 and (wide.height, wide.width) == (144, 256)
    maximal = all(
        e.ratio_h * e.ratio_w * (e.scale + 1) ** 2 * plan.stride**2 > plan.max_token
        for e in plan.entries
    )
    report(
        "criterion 5: min-max token resolution under a 65536 budget",
        min_ok and maximal,
        f"min_token={plan.min_token}==36864 at 144x256; every entry maximal",
    )


# 6 ------------------------------------------------------------------------

def test_criterion_6_gradient_guard_spike_isolation():
    steps, workers, spike_step = 1000, 8, 600
    trace = baseline_trace(steps, workers, seed=7)
    worker = int(np.argmin(trace[spike_step]))  # never the step max

    clean = simulate_run(trace)
    clean_scales_ok = clean.discarded.sum() == 0
    state = ClipGuardState()
    for i in range(steps):
        verdict, state = judge_step(state, trace[i].tolist())
        clean_scales_ok &= verdict.scales == tuple(1.0 for _ in range(workers))

    spiked_trace = trace.copy()
    spiked_trace[spike_step, worker] = 100.0
    spiked = simulate_run(spiked_trace)
    one_discard = (
        spiked.discarded.sum() == 1
        and spiked.discarded[spike_step] == 1
        and spiked.flagged[spike_step] == (worker,)
    )
    state = ClipGuardState()
    verdict = None
    for i in range(spike_step + 1):
        verdict, state = judge_step(state, spiked_trace[i].tolist())
    survivor_scales = {s for s in verdict.scales if s != 0.0}
    scale_ok = survivor_scales == {8 / 7}
    ema_gap = max(
        float(np.max(np.abs(spiked.ema_gn[spike_step:] - clean.ema_gn[spike_step:]))),
        float(np.max(np.abs(spiked.ema_var[spike_step:] - clean.ema_var[spike_step:]))),
    )
    report(
        "criterion 6: one spike, one discard, untouched statistics",
        one_discard and scale_ok and ema_gap < 1e-6 and clean_scales_ok,
        f"discards at step {spike_step} only; survivor scale 8/7; "
        f"max EMA gap after spike={ema_gap:.1e} < 1e-6; clean run all scales 1.0",
    )


# 7 ------------------------------------------------------------------------

def test_criterion_7_curation_statistics():
    series = SimilaritySeries(values=np.array([0.05] * 99 + [0.50]))
    cuts_ok = detect_cuts(series) == [99]
    motion_ok = (
        motion_filter(0.15) and not motion_filter(0.0005) and not motion_filter(0.31)
    )
    boxes = [(0, 0, 100, 25), (0, 75, 100, 100), (0, 0, 25, 100), (75, 0, 100, 100)]
    rect = ocr_crop_geometry(100, 100, boxes)
    crop_ok = rect.area * 100 == 36 * 100 * 100  # exactly 36% of the frame
    report(
        "criterion 7: cut detection, motion range, extreme crop geometry",
        cuts_ok and motion_ok and crop_ok,
        f"spike index flagged alone; motion keeps 0.15, rejects 0.0005/0.31; "
        f"extreme crop {rect.height}x{rect.width} = 36% area",
    )


# 8 ------------------------------------------------------------------------

def literal_single_bundles(length, k):
    return [list(range(b, length, k)) for b in range(k)]


def literal_group_bundles(length, k):
    bundles = []
    for j in range(k):
        members, g = [], 0
        while j * k + g * k * k < length:
            start = j * k + g * k * k
            members.extend(e for e in range(start, start + k) if e < length)
            g += 1
        bundles.append(members)
    return bundles


def test_criterion_8_permutation_properties():
    rs = np.random.RandomState(5)
    plans_checked = 0
    for length in range(1, 1025):
        grid = TokenGrid(1, 1, length)
        for k in range(1, length + 1):
            if length % k:
                continue
            plan = build_plan(grid, k)
            assert np.array_equal(np.sort(plan.single_perm), np.arange(length))
            assert np.array_equal(np.sort(plan.group_perm), np.arange(plan.padded_tokens))
            if k == 1:
                assert np.array_equal(plan.single_perm, np.arange(length))
                assert np.array_equal(plan.group_perm, np.arange(length))
            plans_checked += 1
    # Round trips on a representative subset with payload vectors.
    for length in (16, 24, 60, 256, 1024):
        for k in (d for d in range(1, length + 1) if length % d == 0):
            plan = build_plan(TokenGrid(1, 1, length), k)
            tokens = rs.standard_normal((length, 3))
            for which in ("single", "group"):
                assert np.array_equal(
                    inverse_apply_plan(apply_plan(tokens, plan, which), plan, which), tokens
                )
    # Literal bracket-pattern enumeration equals the closed-form maps.
    brackets_ok = True
    for k in (2, 3, 4):
        for length in (k * k, 4 * k * k, 12 * k, 60 * k):
            plan = build_plan(TokenGrid(1, 1, length), k)
            brackets_ok &= plan.single_bundles() == literal_single_bundles(length, k)
            brackets_ok &= plan.group_bundles() == literal_group_bundles(length, k)
    report(
        "criterion 8: permutation bijectivity, round trips, bracket patterns",
        brackets_ok,
        f"{plans_checked} (L,k) plans bijective for L<=1024; k=1 identity; "
        f"bracket enumeration matches for k in 2,3,4",
    )


# 9 ------------------------------------------------------------------------

def test_criterion_9_rotary_encoding_properties():
    rs = np.random.RandomState(17)
    worst_norm, worst_offset = 0.0, 0.0
    for partitions in (1, 2, 3):
        dim = 16 * partitions
        cfg = RopeConfig(partitions=partitions, dim=dim)
        q = rs.standard_normal((100, dim))
        u = rs.standard_normal((100, dim))
        pos = rs.randint(0, 500, size=(100, partitions))
        encoded = rope_apply(q, pos, cfg)
        worst_norm = max(
            worst_norm,
            float(np.max(np.abs(np.linalg.norm(encoded, axis=1) - np.linalg.norm(q, axis=1)))),
        )
        delta = rs.randint(0, 16, size=(100, partitions))
        a = rs.randint(0, 100, size=(100, partitions))
        b = rs.randint(200, 300, size=(100, partitions))
        dots_a = np.sum(rope_apply(q, a, cfg) * rope_apply(u, a + delta, cfg), axis=1)
        dots_b = np.sum(rope_apply(q, b, cfg) * rope_apply(u, b + delta, cfg), axis=1)
        worst_offset = max(worst_offset, float(np.max(np.abs(dots_a - dots_b))))
    report(
        "criterion 9: rotary encoding norm and relative-offset properties",
        worst_norm <= 1e-5 and worst_offset <= 1e-5,
        f"max norm deviation={worst_norm:.1e} <= 1e-5, "
        f"max offset-pair deviation={worst_offset:.1e} <= 1e-5 for n in 1,2,3",
    )
