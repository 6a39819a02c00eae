import struct

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from vgkit.errors import DivisibilityError, FormatError, ShapeError, WriteError
from vgkit.tensor import (
    Tensor4D,
    TokenGrid,
    load_tensor,
    patch_grid,
    patch_token_count,
    random_tensor,
    save_tensor,
)


def test_minimal_single_element_file(tmp_path):
    path = tmp_path / "one.ospt"
    payload = b"OSPT" + struct.pack("<H", 1) + struct.pack("<IIII", 1, 1, 1, 1) + struct.pack("<f", 0.0)
    path.write_bytes(payload)
    t = load_tensor(path)
    assert t.shape == (1, 1, 1, 1)
    assert t.data[0, 0, 0, 0] == 0.0


def test_roundtrip_is_bit_identical(tmp_path):
    t = random_tensor(3, 9, 16, 16, seed=42)
    path = tmp_path / "t.ospt"
    save_tensor(t, path)
    back = load_tensor(path)
    assert back.shape == t.shape
    assert back.data.tobytes() == t.data.tobytes()


def test_two_saves_are_byte_identical(tmp_path):
    t = random_tensor(2, 3, 4, 5, seed=7)
    a, b = tmp_path / "a.ospt", tmp_path / "b.ospt"
    save_tensor(t, a)
    save_tensor(t, b)
    assert a.read_bytes() == b.read_bytes()


def test_payload_length_mismatch_is_format_error(tmp_path):
    path = tmp_path / "short.ospt"
    # Header promises 1*1*2*2*2 = 8 values, payload carries 7.
    blob = b"OSPT" + struct.pack("<H", 1) + struct.pack("<IIII", 1, 2, 2, 2) + b"\x00" * (4 * 7)
    path.write_bytes(blob)
    with pytest.raises(FormatError):
        load_tensor(path)


@pytest.mark.parametrize(
    "mangle",
    [
        lambda blob: b"XXXX" + blob[4:],                       # bad magic
        lambda blob: blob[:4] + struct.pack("<H", 9) + blob[6:],  # bad version
        lambda blob: blob[:10],                                # truncated header
        lambda blob: blob + b"\x00\x00\x00\x00",               # trailing bytes
        lambda blob: blob[:6] + struct.pack("<IIII", 0, 1, 1, 1) + blob[22:],  # zero dim
    ],
)
def test_malformed_files_rejected(tmp_path, mangle):
    t = random_tensor(1, 2, 2, 2, seed=0)
    path = tmp_path / "t.ospt"
    save_tensor(t, path)
    path.write_bytes(mangle(path.read_bytes()))
    with pytest.raises(FormatError):
        load_tensor(path)


def test_unwritable_destination_is_write_error(tmp_path):
    t = random_tensor(1, 1, 1, 1, seed=0)
    with pytest.raises(WriteError):
        save_tensor(t, tmp_path / "missing_dir" / "t.ospt")


def test_dims_must_be_positive():
    with pytest.raises(ShapeError):
        Tensor4D(np.zeros((1, 0, 2, 2), dtype=np.float32))
    with pytest.raises(ShapeError):
        Tensor4D(np.zeros((2, 2), dtype=np.float32))


@settings(max_examples=80, deadline=None)
@given(
    dims=st.tuples(*(st.integers(1, 64) for _ in range(4))).filter(
        lambda d: d[0] * d[1] * d[2] * d[3] <= 65536
    ),
    seed=st.integers(0, 2**31 - 1),
)
def test_roundtrip_identity_property(tmp_path_factory, dims, seed):
    t = random_tensor(*dims, seed=seed)
    path = tmp_path_factory.mktemp("rt") / "t.ospt"
    save_tensor(t, path)
    assert load_tensor(path).bit_equal(t)


def test_patch_token_count_reference_grid():
    assert patch_token_count((24, 64, 64), (1, 2, 2)) == 24576
    assert patch_grid((24, 64, 64), (1, 2, 2)) == TokenGrid(24, 32, 32)


@settings(max_examples=60, deadline=None)
@given(dims=st.tuples(*(st.integers(1, 100) for _ in range(3))))
def test_identity_kernel_counts_all(dims):
    assert patch_token_count(dims, (1, 1, 1)) == dims[0] * dims[1] * dims[2]


def test_non_divisible_patchify_rejected():
    with pytest.raises(DivisibilityError):
        patch_token_count((5, 4, 4), (2, 2, 2))


def test_token_grid_volume():
    grid = TokenGrid(24, 32, 32)
    assert grid.tokens == 24576
    with pytest.raises(ShapeError):
        TokenGrid(0, 2, 2)
