import numpy as np
import pytest

from src.errors import TensorFormatError, TruncatedPayloadError
from src.tensor.golden import read_tensor, write_tensor
from src.tensor.tensor import FreqTensor, RealTensor4


def test_real_round_trip_is_bit_exact(tmp_path, make_tensor):
    t = make_tensor(2, 3, 4, 5)
    path = tmp_path / "t.bin"
    write_tensor(t, path)
    back = read_tensor(path)
    assert isinstance(back, RealTensor4)
    assert back.data.tobytes() == t.data.tobytes()


def test_complex_round_trip(tmp_path, rng):
    data = (rng.standard_normal((1, 2, 4, 3)) + 1j * rng.standard_normal((1, 2, 4, 3))).astype(np.complex64)
    path = tmp_path / "f.bin"
    write_tensor(FreqTensor(data), path)
    back = read_tensor(path)
    assert isinstance(back, FreqTensor)
    assert np.array_equal(back.data.astype(np.complex64), data)


def test_header_layout(tmp_path):
    path = tmp_path / "t.bin"
    write_tensor(RealTensor4(np.ones((1, 1, 2, 2))), path)
    raw = path.read_bytes()
    assert raw[:4] == b"FBT1"
    assert int.from_bytes(raw[4:8], "little") == 4
    assert raw[24] == 0
    assert len(raw) == 25 + 4 * 4


def test_bad_magic(tmp_path, make_tensor):
    path = tmp_path / "t.bin"
    write_tensor(make_tensor(1, 1, 2, 2), path)
    raw = bytearray(path.read_bytes())
    raw[0] ^= 0xFF
    path.write_bytes(bytes(raw))
    with pytest.raises(TensorFormatError):
        read_tensor(path)


def test_truncated_payload(tmp_path, make_tensor):
    path = tmp_path / "t.bin"
    write_tensor(make_tensor(1, 1, 3, 3), path)
    path.write_bytes(path.read_bytes()[:-4])
    with pytest.raises(TruncatedPayloadError):
        read_tensor(path)


def test_short_file_is_truncated(tmp_path):
    path = tmp_path / "t.bin"
    path.write_bytes(b"FBT1")
    with pytest.raises(TruncatedPayloadError):
        read_tensor(path)


def test_unknown_dtype(tmp_path, make_tensor):
    path = tmp_path / "t.bin"
    write_tensor(make_tensor(1, 1, 1, 1), path)
    raw = bytearray(path.read_bytes())
    raw[24] = 9
    path.write_bytes(bytes(raw))
    with pytest.raises(TensorFormatError):
        read_tensor(path)


def test_truncated_spectrum_names_its_dtype(tmp_path):
    path = tmp_path / "t.spec"
    write_tensor(FreqTensor(np.ones((1, 1, 2, 2), dtype=complex)), path)
    path.write_bytes(path.read_bytes()[:-8])
    with pytest.raises(TruncatedPayloadError, match="complex64"):
        read_tensor(path)
