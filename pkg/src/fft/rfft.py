import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from enum import Enum
from functools import lru_cache

import numpy as np

from src.config.settings import WORKERS
from src.errors import DimensionError, LayoutError, OrderError, UnsupportedSizeError
from src.fft.fft1d import (Radix2Plan, SmoothPlan, fft, fft_dif_noreorder, ifft, ifft_dit_from_bitreversed,
                           is_power_of_two, plan_for)
from src.tensor.tensor import COMPLEX_DTYPE, REAL_DTYPE, FreqOrder, FreqTensor, Layout, RealTensor4

logger = logging.getLogger(__name__)


class FreqLayout(str, Enum):
    ROW_MAJOR = "row_major"    # n_h x (n_w//2 + 1)
    TRANSPOSED = "transposed"  # (n_w//2 + 1) x n_h


@dataclass(frozen=True, eq=False)
class RfftPlan:
    n_h: int
    n_w: int
    row_plan: Radix2Plan | SmoothPlan
    col_plan: Radix2Plan | SmoothPlan
    output_layout: FreqLayout
    column_order: FreqOrder

    @property
    def stored_w(self) -> int:
        return self.n_w // 2 + 1


@lru_cache(maxsize=None)
def rfft_plan(n_h: int, n_w: int, output_layout: FreqLayout = FreqLayout.ROW_MAJOR,
              elide_bit_reversal: bool = False) -> RfftPlan:
    """
    Plan a separable real 2-D transform of an n_h x n_w interpolation basis.
    With elide_bit_reversal the column pass runs DIF and leaves its bins bit-reversed, which
    requires a power-of-two n_h; the Hermitian-truncated row axis is always natural.
    """
    if elide_bit_reversal and not is_power_of_two(n_h):
        raise UnsupportedSizeError(f"bit-reversal elision needs a power-of-two height, got {n_h}")
    order = FreqOrder.BIT_REVERSED_DIF if elide_bit_reversal else FreqOrder.NATURAL
    return RfftPlan(n_h=n_h, n_w=n_w, row_plan=plan_for(n_w), col_plan=plan_for(n_h),
                    output_layout=FreqLayout(output_layout), column_order=order)


def _stored(n: int) -> int:
    return n // 2 + 1


def _load_clipped(x: np.ndarray, n: int) -> np.ndarray:
    # reads past the end of the signal see zeros
    if x.shape[-1] > n:
        raise DimensionError(f"signal of length {x.shape[-1]} does not fit transform size {n}")
    buf = np.zeros(x.shape[:-1] + (n,), dtype=COMPLEX_DTYPE)
    buf[..., :x.shape[-1]] = x
    return buf


def _unpack_pair(F: np.ndarray, n: int) -> tuple[np.ndarray, np.ndarray]:
    """Split FFT(a + i*b) into the half spectra of a and b."""
    half = _stored(n)
    k = np.arange(half)
    mirrored = np.conj(F[..., (-k) % n])
    head = F[..., :half]
    return (head + mirrored) / 2, (head - mirrored) / 2j


def rfft1d(x, n: int) -> np.ndarray:
    """First n//2 + 1 bins of the DFT of x zero-padded to n."""
    arr = np.asarray(x, dtype=np.float64)
    return fft(_load_clipped(arr, n), plan_for(n))[..., :_stored(n)]


def rfft1d_pair(a, b, n: int) -> tuple[np.ndarray, np.ndarray]:
    """Two real transforms for the price of one complex transform of a + i*b."""
    a = _load_clipped(np.asarray(a, dtype=np.float64), n)
    b = _load_clipped(np.asarray(b, dtype=np.float64), n)
    return _unpack_pair(fft(a + 1j * b, plan_for(n)), n)


def _mirror_full(X: np.ndarray, n: int) -> np.ndarray:
    # rebuild bins [half, n) from X_k = conj(X_{n-k})
    half = _stored(n)
    full = np.empty(X.shape[:-1] + (n,), dtype=COMPLEX_DTYPE)
    full[..., :half] = X
    full[..., half:] = np.conj(X[..., 1:n - half + 1][..., ::-1])
    return full


def irfft1d(X, n: int) -> np.ndarray:
    arr = np.asarray(X, dtype=COMPLEX_DTYPE)
    if arr.shape[-1] != _stored(n):
        raise DimensionError(f"{arr.shape[-1]} stored bins do not match transform size {n}")
    return ifft(_mirror_full(arr, n), plan_for(n)).real


def _rows_forward(planes: np.ndarray, plan: RfftPlan) -> np.ndarray:
    """Row pass over (..., H, W) real planes -> (..., n_h, W'), rows beyond H left zero."""
    H = planes.shape[-2]
    spectra = np.zeros(planes.shape[:-2] + (plan.n_h, plan.stored_w), dtype=COMPLEX_DTYPE)
    rows = fft(_load_clipped(planes, plan.n_w), plan.row_plan)
    spectra[..., :H, :] = rows[..., :plan.stored_w]
    return spectra


def _rows_forward_paired(first: np.ndarray, second: np.ndarray, plan: RfftPlan) -> tuple[np.ndarray, np.ndarray]:
    H = first.shape[-2]
    packed = _load_clipped(first, plan.n_w) + 1j * _load_clipped(second, plan.n_w)
    a, b = _unpack_pair(fft(packed, plan.row_plan), plan.n_w)
    out_a = np.zeros(first.shape[:-2] + (plan.n_h, plan.stored_w), dtype=COMPLEX_DTYPE)
    out_b = np.zeros_like(out_a)
    out_a[..., :H, :] = a
    out_b[..., :H, :] = b
    return out_a, out_b


def _columns_forward(spectra: np.ndarray, plan: RfftPlan) -> np.ndarray:
    cols = spectra.swapaxes(-1, -2)
    if plan.column_order == FreqOrder.BIT_REVERSED_DIF:
        cols = fft_dif_noreorder(cols, plan.col_plan)
    else:
        cols = fft(cols, plan.col_plan)
    return cols.swapaxes(-1, -2)


def _columns_inverse(spectra: np.ndarray, plan: RfftPlan) -> np.ndarray:
    cols = spectra.swapaxes(-1, -2)
    if plan.column_order == FreqOrder.BIT_REVERSED_DIF:
        cols = ifft_dit_from_bitreversed(cols, plan.col_plan)
    else:
        cols = ifft(cols, plan.col_plan)
    return cols.swapaxes(-1, -2)


def _check_plane(plane: np.ndarray, plan: RfftPlan) -> None:
    if plane.ndim < 2 or plane.shape[-2] > plan.n_h or plane.shape[-1] > plan.n_w:
        raise DimensionError(f"plane of shape {plane.shape} does not fit plan {plan.n_h}x{plan.n_w}")


def rfft2d(plane, plan: RfftPlan) -> np.ndarray:
    """
    2-D DFT of a real plane implicitly zero-padded to n_h x n_w.
    Rows first, then columns over the n_w//2 + 1 surviving bins.
    - n_h x (n_w//2 + 1), transposed for FreqLayout.TRANSPOSED
    - column bins stay bit-reversed when the plan elides bit reversal
    """
    arr = np.asarray(plane, dtype=np.float64)
    _check_plane(arr, plan)
    out = _columns_forward(_rows_forward(arr, plan), plan)
    if plan.output_layout == FreqLayout.TRANSPOSED:
        return np.ascontiguousarray(out.swapaxes(-1, -2))
    return out


def irfft2d(freq, plan: RfftPlan, out_h: int, out_w: int) -> np.ndarray:
    """Inverse of rfft2d normalized by n_h*n_w, clipped to the top-left out_h x out_w window."""
    arr = np.asarray(freq, dtype=COMPLEX_DTYPE)
    if plan.output_layout == FreqLayout.TRANSPOSED:
        arr = arr.swapaxes(-1, -2)
    if arr.shape[-2:] != (plan.n_h, plan.stored_w):
        raise DimensionError(
            f"spectrum of shape {arr.shape[-2:]} does not match plan {plan.n_h}x{plan.stored_w}")
    if out_h > plan.n_h or out_w > plan.n_w:
        raise DimensionError(f"output {out_h}x{out_w} larger than plan {plan.n_h}x{plan.n_w}")
    rows = _columns_inverse(arr, plan)[..., :out_h, :]
    planes = ifft(_mirror_full(rows, plan.n_w), plan.row_plan).real
    return planes[..., :out_w]


def _transform_planes(planes: np.ndarray, plan: RfftPlan) -> np.ndarray:
    count = planes.shape[0]
    spectra = np.empty((count, plan.n_h, plan.stored_w), dtype=COMPLEX_DTYPE)
    paired = count - count % 2
    if paired:
        a, b = _rows_forward_paired(planes[0:paired:2], planes[1:paired:2], plan)
        spectra[0:paired:2] = a
        spectra[1:paired:2] = b
    if count % 2:
        spectra[-1] = _rows_forward(planes[-1], plan)
    return _columns_forward(spectra, plan)


def rfft2d_batched(t: RealTensor4, plan: RfftPlan, out: np.ndarray | None = None,
                   workers: int = WORKERS) -> FreqTensor:
    """
    rfft2d over all S*P planes of t; output (S, P, n_h, n_w//2 + 1) in BDHW layout.
    Planes are transformed two at a time through one packed complex row pass; an odd last
    plane goes through the plain path. `out` receives the result when given.
    """
    S, P, H, W = t.dims
    if H > plan.n_h or W > plan.n_w:
        raise DimensionError(f"planes {H}x{W} do not fit plan {plan.n_h}x{plan.n_w}")
    if plan.output_layout != FreqLayout.ROW_MAJOR:
        raise LayoutError("rfft2d_batched produces row-major planes only")
    planes = t.data.reshape(S * P, H, W).astype(np.float64)
    if workers > 1 and S * P > 2:
        # even chunk sizes keep plane pairs together
        step = max(2, -(-S * P // workers))
        step += step % 2
        chunks = [planes[i:i + step] for i in range(0, S * P, step)]
        with ThreadPoolExecutor(max_workers=workers) as pool:
            spectra = np.concatenate(list(pool.map(lambda c: _transform_planes(c, plan), chunks)))
    else:
        spectra = _transform_planes(planes, plan)
    spectra = spectra.reshape(S, P, plan.n_h, plan.stored_w)
    if out is not None:
        if out.shape != spectra.shape:
            raise DimensionError(f"output buffer shape {out.shape} != {spectra.shape}")
        np.copyto(out, spectra)
        spectra = out
    return FreqTensor(spectra, layout=Layout.BDHW, order=plan.column_order)


def irfft2d_batched(ft: FreqTensor, plan: RfftPlan, out_h: int, out_w: int) -> RealTensor4:
    if ft.layout != Layout.BDHW:
        raise LayoutError(f"irfft2d_batched needs BDHW spectra, got {ft.layout.value}")
    if plan.output_layout != FreqLayout.ROW_MAJOR:
        raise LayoutError("irfft2d_batched consumes row-major planes only")
    if ft.order != plan.column_order:
        raise OrderError(f"spectrum order {ft.order.value} does not match plan {plan.column_order.value}")
    return RealTensor4(irfft2d(ft.data, plan, out_h, out_w).astype(REAL_DTYPE))
