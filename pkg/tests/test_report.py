import json

import numpy as np

from vgkit.curation import CutThresholds, SimilaritySeries, detect_cuts
from vgkit.gradguard import baseline_trace, simulate_run
from vgkit.report import render_gradguard_trace, render_similarity_series

PNG_MAGIC = b"\x89PNG\r\n\x1a\n"


def test_trace_figure_renders(tmp_path):
    bundle = simulate_run(baseline_trace(120, 4, seed=2), injected_anomalies=[(110, 1, 40.0)])
    path = render_gradguard_trace(bundle, str(tmp_path / "trace.png"))
    assert open(path, "rb").read(8) == PNG_MAGIC


def test_trace_figure_survives_skipped_steps(tmp_path):
    # All workers anomalous at one step: post-discard max is NaN there and
    # both the JSONL row and the figure must still come out.
    trace = baseline_trace(150, 3, seed=9)
    bundle = simulate_run(
        trace, injected_anomalies=[(120, 0, 50.0), (120, 1, 60.0), (120, 2, 70.0)]
    )
    assert bundle.discarded[120] == 3
    row = bundle.row(120)
    assert row["post_discard_max"] is None
    json.dumps(row)  # JSON serializable despite the NaN
    assert np.isnan(bundle.post_discard_max[120])
    path = render_gradguard_trace(bundle, str(tmp_path / "skip.png"))
    assert open(path, "rb").read(8) == PNG_MAGIC


def test_series_figure_renders_with_and_without_cuts(tmp_path):
    th = CutThresholds()
    spiky = SimilaritySeries(values=np.array([0.05] * 99 + [0.5]))
    cuts = detect_cuts(spiky, th)
    path = render_similarity_series(spiky, cuts, str(tmp_path / "cuts.png"), th)
    assert open(path, "rb").read(8) == PNG_MAGIC
    flat = SimilaritySeries(values=np.full(50, 0.1))
    path = render_similarity_series(flat, [], str(tmp_path / "flat.png"), th)
    assert open(path, "rb").read(8) == PNG_MAGIC
