import logging
import struct

import numpy as np

from src.config.settings import GOLDEN_DTYPES, GOLDEN_MAGIC, MAX_FFT_SIZE
from src.errors import TensorFormatError, TruncatedPayloadError
from src.tensor.tensor import FreqTensor, RealTensor4

logger = logging.getLogger(__name__)

# magic, u32 rank, 4 x u32 dims, u8 dtype; little-endian, no padding
_HEADER = struct.Struct("<4sI4IB")
_PAYLOAD_DTYPES = {0: np.dtype("<f4"), 1: np.dtype("<c8")}
_MAX_ELEMENTS = MAX_FFT_SIZE * MAX_FFT_SIZE


def write_tensor(t: RealTensor4 | FreqTensor, path) -> None:
    """
    Write a tensor in the golden binary format.
    Real tensors are written as real32 (dtype 0), frequency tensors as complex64 (dtype 1);
    the layout and order tags of a FreqTensor are not stored.
    """
    dtype_code = 1 if isinstance(t, FreqTensor) else 0
    payload = np.ascontiguousarray(t.data, dtype=_PAYLOAD_DTYPES[dtype_code])
    header = _HEADER.pack(GOLDEN_MAGIC, 4, *t.dims, dtype_code)
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(payload.tobytes())
    logger.debug(f"Wrote {t.dims} {GOLDEN_DTYPES[dtype_code]} tensor to {path}")


def read_tensor(path) -> RealTensor4 | FreqTensor:
    """
    Read a golden tensor file: a RealTensor4 for dtype 0, a FreqTensor (BDHW, natural order) for dtype 1.
    A payload length that disagrees with the header raises TruncatedPayloadError.
    """
    with open(path, "rb") as fh:
        raw = fh.read()
    if len(raw) < _HEADER.size:
        raise TruncatedPayloadError(f"{path}: {len(raw)} bytes is shorter than the {_HEADER.size}-byte header")

    magic, rank, d0, d1, d2, d3, dtype_code = _HEADER.unpack_from(raw)
    if magic != GOLDEN_MAGIC:
        raise TensorFormatError(f"{path}: bad magic {magic!r}")
    if rank != 4:
        raise TensorFormatError(f"{path}: rank {rank} unsupported, only 4")
    if dtype_code not in _PAYLOAD_DTYPES:
        raise TensorFormatError(f"{path}: unknown dtype code {dtype_code}")

    dims = (d0, d1, d2, d3)
    count = 1
    for d in dims:
        count *= d
    if count > _MAX_ELEMENTS:
        raise TensorFormatError(f"{path}: dims {dims} overflow the element limit")

    dtype = _PAYLOAD_DTYPES[dtype_code]
    expected = count * dtype.itemsize
    payload = raw[_HEADER.size:]
    if len(payload) != expected:
        raise TruncatedPayloadError(
            f"{path}: header dims {dims} ({GOLDEN_DTYPES[dtype_code]}) need {expected} payload bytes, "
            f"found {len(payload)}")

    data = np.frombuffer(payload, dtype=dtype).reshape(dims)
    if dtype_code == 0:
        return RealTensor4(data)
    return FreqTensor(data.astype(np.complex128))


