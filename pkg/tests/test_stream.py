import numpy as np
import pytest

from vgkit.errors import DomainError, ShapeError, StreamShapeError
from vgkit.stream import (
    CausalConvSpec,
    cache_size,
    direct_causal_conv,
    output_frames,
    stream_causal_conv,
    verify_lossless,
)
from vgkit.tensor import Tensor4D, random_tensor


def scalar_frames(values):
    return Tensor4D(np.asarray(values, dtype=np.float32).reshape(1, -1, 1, 1))


class TestDirectConv:
    def test_identity_kernel(self):
        x = random_tensor(2, 5, 3, 3, seed=1)
        out = direct_causal_conv(x, CausalConvSpec(1, 1, (1.0,)))
        assert out.bit_equal(x)

    def test_selector_tap_is_pure_delay(self):
        x = scalar_frames([4.0, 5.0, 6.0, 7.0])
        out = direct_causal_conv(x, CausalConvSpec(3, 1, (0.0, 0.0, 1.0)))
        assert np.array_equal(out.data.ravel(), [4.0, 5.0, 6.0, 7.0])

    def test_left_padded_neighbor_sum(self):
        out = direct_causal_conv(scalar_frames([1.0, 2.0, 3.0]), CausalConvSpec(2, 1, (1.0, 1.0)))
        assert np.array_equal(out.data.ravel(), [1.0, 3.0, 5.0])

    def test_matches_naive_python_oracle(self):
        rs = np.random.RandomState(0)
        x = random_tensor(1, 9, 1, 1, seed=3)
        taps = tuple(rs.standard_normal(3))
        spec = CausalConvSpec(3, 2, taps)
        out = direct_causal_conv(x, spec)
        padded = [0.0, 0.0] + [float(v) for v in x.data.ravel()]
        expected = [
            sum(taps[j] * padded[t * 2 + j] for j in range(3)) for t in range(output_frames(9, spec))
        ]
        assert np.allclose(out.data.ravel(), expected, atol=1e-6)

    @pytest.mark.parametrize("t,s,expect", [(1, 1, 1), (9, 2, 5), (13, 4, 4), (7, 3, 3)])
    def test_output_length_formula(self, t, s, expect):
        x = random_tensor(1, t, 2, 2, seed=t)
        spec = CausalConvSpec(2, s, (0.5, 0.5))
        assert direct_causal_conv(x, spec).frames == expect == output_frames(t, spec)

    def test_spec_validation(self):
        with pytest.raises(DomainError):
            CausalConvSpec(0, 1, ())
        with pytest.raises(ShapeError):
            CausalConvSpec(3, 1, (1.0,))


class TestCacheSize:
    def test_reference_regime_caches_two_frames(self):
        spec = CausalConvSpec(3, 1, (0.0,) * 3)
        for m in (1, 2, 3, 10):
            assert cache_size(spec, 4, m) == 2

    def test_pointwise_kernel_needs_no_cache(self):
        assert cache_size(CausalConvSpec(1, 1, (1.0,)), 1, 1) == 0

    def test_strided_case(self):
        assert cache_size(CausalConvSpec(3, 2, (0.0,) * 3), 4, 1) == 1

    def test_negative_values_clamp_to_zero(self):
        # k_t=1, s_t=4, T_chunk=2, m=1: 1 + 2 - 4*floor(2/4 + 1) = -1.
        assert cache_size(CausalConvSpec(1, 4, (1.0,)), 2, 1) == 0

    def test_unit_stride_cache_bounded_by_kernel(self):
        for k in range(1, 6):
            spec = CausalConvSpec(k, 1, (0.0,) * k)
            for tc in range(1, 9):
                for m in range(1, 5):
                    assert 0 <= cache_size(spec, tc, m) <= k - 1 or k == 1

    def test_requires_positive_chunk_index(self):
        with pytest.raises(DomainError):
            cache_size(CausalConvSpec(3, 1, (0.0,) * 3), 4, 0)


class TestStreaming:
    def test_single_chunk_degenerate(self):
        x = random_tensor(2, 7, 4, 4, seed=5)
        spec = CausalConvSpec(3, 1, (0.2, 0.3, 0.5))
        out = stream_causal_conv(x, spec, t_chunk=10)
        assert out.bit_equal(direct_causal_conv(x, spec))

    def test_strided_random_case_bitwise(self):
        x = random_tensor(2, 13, 4, 4, seed=6)
        spec = CausalConvSpec(3, 2, (0.9, -0.4, 0.3))
        out = stream_causal_conv(x, spec, t_chunk=4)
        assert out.bit_equal(direct_causal_conv(x, spec))

    def test_full_sweep_bitwise_equal(self):
        rs = np.random.RandomState(1)
        for k_t in range(1, 6):
            for s_t in (1, 2):
                for t_chunk in range(1, 9):
                    t = 1 + s_t * int(rs.randint(1, 9))
                    x = random_tensor(2, t, 3, 3, seed=k_t * 100 + s_t * 10 + t_chunk)
                    spec = CausalConvSpec(k_t, s_t, tuple(rs.standard_normal(k_t)))
                    report = verify_lossless(x, spec, t_chunk)
                    assert report.identical and report.max_abs_diff == 0.0

    def test_divisibility_violation_rejected(self):
        x = random_tensor(1, 4, 2, 2, seed=0)
        with pytest.raises(StreamShapeError):
            stream_causal_conv(x, CausalConvSpec(2, 2, (1.0, 1.0)), 2)

    def test_cache_log_matches_formula(self):
        x = random_tensor(1, 13, 2, 2, seed=2)
        spec = CausalConvSpec(3, 1, (0.1, 0.2, 0.7))
        report = verify_lossless(x, spec, 4)
        assert report.chunks == 3
        expected = [cache_size(spec, 4, m) for m in (1, 2)]
        assert list(report.cache_sizes) == expected == [2, 2]

    def test_cache_log_equals_clamped_formula_everywhere(self):
        from vgkit.stream import stream_with_state

        for k_t in range(1, 5):
            for s_t in (1, 2, 3):
                for t_chunk in (1, 3, 5):
                    t = 1 + s_t * 7
                    spec = CausalConvSpec(k_t, s_t, tuple(float(j) for j in range(k_t)))
                    _, state = stream_with_state(random_tensor(1, t, 2, 2, seed=t), spec, t_chunk)
                    for m, logged in enumerate(state.cache_log, start=1):
                        assert logged == cache_size(spec, t_chunk, m)

    def test_skipping_stride_still_lossless(self):
        # Negative raw cache values: stride jumps over whole chunks.
        x = random_tensor(1, 9, 2, 2, seed=8)
        spec = CausalConvSpec(1, 4, (1.5,))
        report = verify_lossless(x, spec, 2)
        assert report.identical
        assert report.cache_clamped
        assert all(s == 0 for s in report.cache_sizes)


def test_stream_state_accepts_arbitrary_segmentation():
    # push() never assumes the first-frame-then-chunks pattern; any split of
    # the input into segments must still reproduce direct inference bitwise.
    rs = np.random.RandomState(4)
    from vgkit.stream import StreamState

    for trial in range(30):
        k_t = int(rs.randint(1, 5))
        s_t = int(rs.randint(1, 4))
        t = 1 + s_t * int(rs.randint(1, 10))
        spec = CausalConvSpec(k_t, s_t, tuple(rs.standard_normal(k_t)))
        x = random_tensor(2, t, 2, 2, seed=trial)
        direct = direct_causal_conv(x, spec)
        state = StreamState(spec=spec, t_chunk=1)
        pieces, pos = [], 0
        while pos < t:
            end = min(pos + int(rs.randint(1, 5)), t)
            pieces.append(state.push(x.data[:, pos:end]))
            pos = end
        streamed = Tensor4D(np.concatenate(pieces, axis=1))
        assert streamed.bit_equal(direct)


class TestVerifyLossless:
    def test_report_on_clean_input(self):
        x = random_tensor(2, 9, 4, 4, seed=9)
        report = verify_lossless(x, CausalConvSpec(3, 2, (0.3, 0.3, 0.4)), 4)
        assert report.identical is True
        assert report.max_abs_diff == 0.0

    def test_zero_tensor_identical(self):
        x = Tensor4D(np.zeros((1, 5, 2, 2), dtype=np.float32))
        assert verify_lossless(x, CausalConvSpec(2, 1, (1.0, -1.0)), 2).identical

    def test_perturbed_cache_detected(self):
        # Sensitivity check: corrupt one cached frame between chunks and the
        # streamed output must diverge from direct inference.
        from vgkit.stream import StreamState

        x = random_tensor(1, 9, 2, 2, seed=10)
        spec = CausalConvSpec(3, 1, (0.25, 0.5, 0.25))
        direct = direct_causal_conv(x, spec)
        state = StreamState(spec=spec, t_chunk=4)
        pieces = [state.push(x.data[:, :1])]
        pieces.append(state.push(x.data[:, 1:5]))
        state.cached_frames = state.cached_frames + np.float32(1.0)  # corrupt the carried frames
        pieces.append(state.push(x.data[:, 5:9]))
        streamed = Tensor4D(np.concatenate(pieces, axis=1))
        assert not streamed.bit_equal(direct)
