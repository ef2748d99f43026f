import logging

import numpy as np
from pydantic import BaseModel, ConfigDict

from src.conv.models import GemmStrategy
from src.errors import DimensionError, LayoutError
from src.tensor.tensor import FreqTensor, Layout

logger = logging.getLogger(__name__)

TILE_BINS = 64
TILE_ROWS = 32


class CgemmBatch(BaseModel):
    """Per-bin product C_t = A_t . op(B_t)^T over `bins` frequency positions.

    A_t is m x k_dim, B_t is n x k_dim, op conjugates when conjugate_b is set.
    """

    model_config = ConfigDict(frozen=True)

    bins: int
    m: int
    k_dim: int
    n: int
    conjugate_b: bool = False
    accumulate: bool = False


def _check(a: FreqTensor, b: FreqTensor, spec: CgemmBatch) -> None:
    if a.layout != Layout.HWBD or b.layout != Layout.HWBD:
        raise LayoutError(f"cgemm needs HWBD operands, got {a.layout.value} and {b.layout.value}")
    if a.order != b.order:
        raise LayoutError(f"operands disagree on bin order: {a.order.value} vs {b.order.value}")
    H, W, m, k = a.dims
    Hb, Wb, n, kb = b.dims
    if (H, W) != (Hb, Wb) or H * W != spec.bins:
        raise DimensionError(f"bin grids {H}x{W} and {Hb}x{Wb} do not give {spec.bins} bins")
    if (m, k, n, kb) != (spec.m, spec.k_dim, spec.n, spec.k_dim):
        raise DimensionError(
            f"operands {m}x{k} and {n}x{kb} do not match batch {spec.m}x{spec.k_dim}x{spec.n}")


def _batched(a3, b3, out3):
    np.matmul(a3, b3.swapaxes(-1, -2), out=out3)


def _per_bin(a3, b3, out3):
    for t in range(a3.shape[0]):
        np.dot(a3[t], b3[t].T, out=out3[t])


def _tiled(a3, b3, out3):
    # bins in chunks of TILE_BINS, rows of A in chunks of TILE_ROWS
    for t0 in range(0, a3.shape[0], TILE_BINS):
        bt = b3[t0:t0 + TILE_BINS].swapaxes(-1, -2)
        for r0 in range(0, a3.shape[1], TILE_ROWS):
            np.matmul(a3[t0:t0 + TILE_BINS, r0:r0 + TILE_ROWS], bt,
                      out=out3[t0:t0 + TILE_BINS, r0:r0 + TILE_ROWS])


_KERNELS = {
    GemmStrategy.BATCHED: _batched,
    GemmStrategy.PER_BIN: _per_bin,
    GemmStrategy.TILED: _tiled,
}


def cgemm_batched(a: FreqTensor, b: FreqTensor, spec: CgemmBatch,
                  strategy: GemmStrategy = GemmStrategy.BATCHED,
                  out: np.ndarray | None = None) -> FreqTensor:
    """
    For every bin t: C_t[s, j] = sum_i A_t[s, i] * conj?(B_t[j, i]).
    - a is HWBD (H', W', m, k_dim), b is HWBD (H', W', n, k_dim)
    - out is an (H', W', m, n) buffer, required when spec.accumulate is set
    - the result keeps the operands' bin order
    """
    _check(a, b, spec)
    H, W = a.dims[:2]
    shape = (H, W, spec.m, spec.n)
    if out is None:
        if spec.accumulate:
            raise DimensionError("accumulate needs an output buffer to add into")
        out = np.empty(shape, dtype=a.data.dtype)
    elif out.shape != shape or not out.flags.c_contiguous:
        raise DimensionError(f"output buffer must be a contiguous {shape} array, got {out.shape}")

    a3 = a.data.reshape(spec.bins, spec.m, spec.k_dim)
    b3 = b.data.reshape(spec.bins, spec.n, spec.k_dim)
    if spec.conjugate_b:
        b3 = np.conj(b3)
    out3 = out.reshape(spec.bins, spec.m, spec.n)
    if spec.accumulate:
        product = np.empty_like(out3)
        _KERNELS[GemmStrategy(strategy)](a3, b3, product)
        out3 += product
    else:
        _KERNELS[GemmStrategy(strategy)](a3, b3, out3)
    return FreqTensor(out, layout=Layout.HWBD, order=a.order)
