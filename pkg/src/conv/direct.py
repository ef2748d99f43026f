import logging

import numpy as np

from src.conv.models import ConvPass, ConvProblem
from src.errors import DimensionError
from src.tensor.tensor import REAL_DTYPE, RealTensor4

logger = logging.getLogger(__name__)

# Time-domain passes. They are the correctness oracle and the benchmark baseline:
# loops run over kernel offsets (k_h outer, k_w inner) with the plane reduction
# done per offset in float64.


def _padded_input(x: RealTensor4, padding: tuple[int, int]) -> np.ndarray:
    p_h, p_w = padding
    S, f, h, w = x.dims
    out = np.zeros((S, f, h + p_h, w + p_w), dtype=np.float64)
    out[:, :, :h, :w] = x.data
    return out


def fprop_direct(x: RealTensor4, wgt: RealTensor4, padding: tuple[int, int] = (0, 0)) -> RealTensor4:
    """
    Valid cross-correlation reduced over input planes:
    y[s, j, a, b] = sum_i sum_{u,v} x[s, i, a+u, b+v] * wgt[j, i, u, v].
    padding appends zero rows and columns to the input before correlating.
    """
    S, f, h, w = x.dims
    fp, f_w, k_h, k_w = wgt.dims
    if f_w != f:
        raise DimensionError(f"weights expect {f_w} input planes, input has {f}")
    xp = _padded_input(x, padding)
    out_h, out_w = xp.shape[2] - k_h + 1, xp.shape[3] - k_w + 1
    if out_h < 1 or out_w < 1:
        raise DimensionError(f"kernel {k_h}x{k_w} larger than input {xp.shape[2]}x{xp.shape[3]}")

    weights = wgt.data.astype(np.float64)
    y = np.zeros((S, fp, out_h, out_w), dtype=np.float64)
    for u in range(k_h):
        for v in range(k_w):
            window = xp[:, :, u:u + out_h, v:v + out_w]
            y += np.einsum("sihw,ji->sjhw", window, weights[:, :, u, v])
    return RealTensor4(y.astype(REAL_DTYPE))


def bprop_direct(gy: RealTensor4, wgt: RealTensor4, padding: tuple[int, int] = (0, 0)) -> RealTensor4:
    """
    Full convolution of the output gradient with the kernels, reduced over output planes:
    gx[s, i, p, q] = sum_j sum_{u,v} gy[s, j, p-u, q-v] * wgt[j, i, u, v].
    The gradient of the padded input is clipped back to the unpadded h x w window.
    """
    S, fp, out_h, out_w = gy.dims
    fp_w, f, k_h, k_w = wgt.dims
    if fp_w != fp:
        raise DimensionError(f"weights expect {fp_w} output planes, gradient has {fp}")
    p_h, p_w = padding
    h, w = out_h + k_h - 1 - p_h, out_w + k_w - 1 - p_w
    if h < 1 or w < 1:
        raise DimensionError(f"padding {padding} leaves no input for gradient {out_h}x{out_w}")

    weights = wgt.data.astype(np.float64)
    grad = gy.data.astype(np.float64)
    gx = np.zeros((S, f, out_h + k_h - 1, out_w + k_w - 1), dtype=np.float64)
    for u in range(k_h):
        for v in range(k_w):
            gx[:, :, u:u + out_h, v:v + out_w] += np.einsum("sjhw,ji->sihw", grad, weights[:, :, u, v])
    return RealTensor4(gx[:, :, :h, :w].astype(REAL_DTYPE))


def accgrad_direct(gy: RealTensor4, x: RealTensor4, padding: tuple[int, int] = (0, 0)) -> RealTensor4:
    """
    Weight gradient, cross-correlation reduced over the minibatch:
    gw[j, i, u, v] = sum_s sum_{a,b} gy[s, j, a, b] * x[s, i, a+u, b+v].
    """
    S, fp, out_h, out_w = gy.dims
    S_x, f, h, w = x.dims
    if S_x != S:
        raise DimensionError(f"gradient minibatch {S} != input minibatch {S_x}")
    xp = _padded_input(x, padding)
    k_h, k_w = xp.shape[2] - out_h + 1, xp.shape[3] - out_w + 1
    if k_h < 1 or k_w < 1:
        raise DimensionError(f"gradient {out_h}x{out_w} larger than input {xp.shape[2]}x{xp.shape[3]}")

    grad = gy.data.astype(np.float64)
    gw = np.empty((fp, f, k_h, k_w), dtype=np.float64)
    for u in range(k_h):
        for v in range(k_w):
            gw[:, :, u, v] = np.einsum("sjab,siab->ji", grad, xp[:, :, u:u + out_h, v:v + out_w])
    return RealTensor4(gw.astype(REAL_DTYPE))


def flop_count(p: ConvProblem) -> int:
    """Multiply-adds of the direct forward pass: S f f' k_h k_w (h - k_h + 1)(w - k_w + 1)."""
    return p.S * p.f * p.fp * p.k_h * p.k_w * p.out_h * p.out_w


_DIRECT_PASSES = {
    ConvPass.FPROP: fprop_direct,
    ConvPass.BPROP: bprop_direct,
    ConvPass.ACCGRAD: accgrad_direct,
}


def run_direct_pass(problem: ConvProblem, conv_pass: ConvPass, first: RealTensor4, second: RealTensor4) -> RealTensor4:
    """Direct pass on (x, wgt), (gy, wgt) or (gy, x) with the problem's padding."""
    return _DIRECT_PASSES[ConvPass(conv_pass)](first, second, padding=(problem.p_h, problem.p_w))
