import logging
import math

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from src.conv.buffers import WorkBuffers
from src.conv.engine import accgrad_fft, build_plan, fprop_fft
from src.conv.models import ConvPass, ConvPlan, ConvProblem, TileSpec
from src.errors import DimensionError, PlanMismatchError
from src.tensor.tensor import REAL_DTYPE, PadSpec, RealTensor4, clip, zero_pad

logger = logging.getLogger(__name__)

# Output tiles of length d read input segments of length d + w - 1, so the tiles
# partition the valid output exactly. Every op here equals its untiled counterpart.


def _as_vector(v, name: str) -> np.ndarray:
    arr = np.asarray(v, dtype=np.float64)
    if arr.ndim != 1:
        raise DimensionError(f"{name} must be a vector, got shape {arr.shape}")
    return arr


def tiled_conv1d(x, c, d: int) -> np.ndarray:
    """Valid correlation y[i] = sum_j x[i + j] * c[j], computed d outputs at a time."""
    x, c = _as_vector(x, "x"), _as_vector(c, "c")
    spec = TileSpec(n=x.size, w=c.size, d=d)
    y = np.empty(spec.out_len, dtype=np.float64)
    for start, length in spec.tiles():
        segment = x[start:start + length + spec.w - 1]
        y[start:start + length] = np.correlate(segment, c, mode="valid")
    return y


def tiled_accgrad1d(x, z, d: int) -> np.ndarray:
    """
    Kernel gradient g[j] = sum_i x[j + i] * z[i] as a sum of per-tile correlations.
    z is the (n - w + 1)-long output gradient; tiles of z of length d pair with input
    segments of length d + w - 1, and the short last tile covers n - w + 1 mod d.
    """
    x, z = _as_vector(x, "x"), _as_vector(z, "z")
    w = x.size - z.size + 1
    spec = TileSpec(n=x.size, w=w, d=d)
    g = np.zeros(w, dtype=np.float64)
    for start, length in spec.tiles():
        segment = x[start:start + length + w - 1]
        g += np.correlate(segment, z[start:start + length], mode="valid")
    return g


def tile_cost_model(n: int, w: int, d: int) -> float:
    """Model flops of tiling an n-long correlation with a w-long kernel into d-long tiles: n (d+w)/d log2(d+w)."""
    spec = TileSpec(n=n, w=w, d=d)
    return spec.n * (spec.d + spec.w) / spec.d * math.log2(spec.d + spec.w)


def best_tile(n: int, w: int) -> int:
    """argmin of tile_cost_model over every valid d; the smallest d wins ties."""
    out_len = n - w + 1
    return min(range(1, out_len + 1), key=lambda d: (tile_cost_model(n, w, d), d))


def _correlate2d(plane: np.ndarray, kernel: np.ndarray) -> np.ndarray:
    windows = sliding_window_view(plane, kernel.shape)
    return np.tensordot(windows, kernel, axes=([2, 3], [0, 1]))


def tiled_conv2d(plane, kernel, d_h: int, d_w: int) -> np.ndarray:
    """Valid 2-D correlation of one plane with one kernel, over d_h x d_w output tiles."""
    plane = np.asarray(plane, dtype=np.float64)
    kernel = np.asarray(kernel, dtype=np.float64)
    if plane.ndim != 2 or kernel.ndim != 2:
        raise DimensionError(f"expected 2-D plane and kernel, got {plane.shape} and {kernel.shape}")
    rows = TileSpec(n=plane.shape[0], w=kernel.shape[0], d=d_h)
    cols = TileSpec(n=plane.shape[1], w=kernel.shape[1], d=d_w)
    out = np.empty((rows.out_len, cols.out_len), dtype=np.float64)
    for a0, la in rows.tiles():
        for b0, lb in cols.tiles():
            tile = plane[a0:a0 + la + rows.w - 1, b0:b0 + lb + cols.w - 1]
            out[a0:a0 + la, b0:b0 + lb] = _correlate2d(tile, kernel)
    return out


def tile_specs(problem: ConvProblem, conv_pass: ConvPass, d_h: int, d_w: int) -> tuple[TileSpec, TileSpec]:
    """
    Row and column tilings for one pass. fprop and accGrad tile the valid output of the
    padded input; bprop tiles the padded-input gradient, a valid correlation of gy padded
    by k - 1 on each side with the flipped kernels.
    """
    n_h, n_w = problem.padded_h, problem.padded_w
    if ConvPass(conv_pass) == ConvPass.BPROP:
        n_h, n_w = n_h + problem.k_h - 1, n_w + problem.k_w - 1
    return TileSpec(n=n_h, w=problem.k_h, d=d_h), TileSpec(n=n_w, w=problem.k_w, d=d_w)


def _tile_plan(plan: ConvPlan, conv_pass: ConvPass, S: int, f: int, fp: int, h: int, w: int,
               cache: dict) -> ConvPlan:
    key = (conv_pass, f, fp, h, w)
    if key not in cache:
        sub = ConvProblem(S=S, f=f, fp=fp, h=h, w=w, k_h=plan.problem.k_h, k_w=plan.problem.k_w)
        cache[key] = build_plan(sub, conv_pass, plan.fft_path, n_h=plan.n_h, n_w=plan.n_w,
                                gemm_strategy=plan.gemm_strategy)
    return cache[key]


def _check_tiled(plan: ConvPlan, conv_pass: ConvPass) -> tuple[TileSpec, TileSpec]:
    if plan.tiling is None:
        raise PlanMismatchError("plan carries no tiling")
    if plan.conv_pass != conv_pass:
        raise PlanMismatchError(f"plan is for {plan.conv_pass.value}, not {conv_pass.value}")
    return plan.tiling


def _padded(t: RealTensor4, h: int, w: int) -> RealTensor4:
    _, _, H, W = t.dims
    return zero_pad(t, PadSpec(p_h=h - H, p_w=w - W, target_h=h, target_w=w))


def _fprop_tiles(canvas: np.ndarray, wgt: RealTensor4, plan: ConvPlan, rows: TileSpec, cols: TileSpec,
                 buffers: WorkBuffers) -> np.ndarray:
    S, f = canvas.shape[:2]
    fp, _, k_h, k_w = wgt.dims
    out = np.empty((S, fp, rows.out_len, cols.out_len), dtype=REAL_DTYPE)
    sub_plans = {}
    for a0, la in rows.tiles():
        for b0, lb in cols.tiles():
            tile = RealTensor4(canvas[:, :, a0:a0 + la + k_h - 1, b0:b0 + lb + k_w - 1])
            sub = _tile_plan(plan, ConvPass.FPROP, S, f, fp, la + k_h - 1, lb + k_w - 1, sub_plans)
            out[:, :, a0:a0 + la, b0:b0 + lb] = fprop_fft(tile, wgt, sub, buffers).data
    logger.debug(f"Ran {rows.tile_count * cols.tile_count} fprop tiles through {len(sub_plans)} plans")
    return out


def tiled_fprop(x: RealTensor4, wgt: RealTensor4, plan: ConvPlan, buffers: WorkBuffers) -> RealTensor4:
    """Forward pass over output tiles, each a small frequency-domain convolution."""
    rows, cols = _check_tiled(plan, ConvPass.FPROP)
    p = plan.problem
    if x.dims != (p.S, p.f, p.h, p.w) or wgt.dims != (p.fp, p.f, p.k_h, p.k_w):
        raise PlanMismatchError(f"tensors {x.dims} and {wgt.dims} do not match plan problem {p.key()}")
    canvas = _padded(x, p.padded_h, p.padded_w).data
    return RealTensor4(_fprop_tiles(canvas, wgt, plan, rows, cols, buffers))


def tiled_bprop(gy: RealTensor4, wgt: RealTensor4, plan: ConvPlan, buffers: WorkBuffers) -> RealTensor4:
    """
    Input gradient as a tiled valid correlation: gy padded by k - 1 on every side,
    kernels flipped in both axes with input and output planes swapped.
    """
    rows, cols = _check_tiled(plan, ConvPass.BPROP)
    p = plan.problem
    if gy.dims != (p.S, p.fp, p.out_h, p.out_w) or wgt.dims != (p.fp, p.f, p.k_h, p.k_w):
        raise PlanMismatchError(f"tensors {gy.dims} and {wgt.dims} do not match plan problem {p.key()}")
    canvas = np.zeros((p.S, p.fp, rows.n, cols.n), dtype=REAL_DTYPE)
    canvas[:, :, p.k_h - 1:p.k_h - 1 + p.out_h, p.k_w - 1:p.k_w - 1 + p.out_w] = gy.data
    flipped = RealTensor4(wgt.data[:, :, ::-1, ::-1].transpose(1, 0, 2, 3))
    full = _fprop_tiles(canvas, flipped, plan, rows, cols, buffers)
    return clip(RealTensor4(full), p.h, p.w)


def tiled_accgrad(gy: RealTensor4, x: RealTensor4, plan: ConvPlan, buffers: WorkBuffers) -> RealTensor4:
    """Weight gradient as the sum of per-tile gradients, accumulated in a fixed tile order."""
    rows, cols = _check_tiled(plan, ConvPass.ACCGRAD)
    p = plan.problem
    if gy.dims != (p.S, p.fp, p.out_h, p.out_w) or x.dims != (p.S, p.f, p.h, p.w):
        raise PlanMismatchError(f"tensors {gy.dims} and {x.dims} do not match plan problem {p.key()}")
    canvas = _padded(x, p.padded_h, p.padded_w).data
    total = np.zeros((p.fp, p.f, p.k_h, p.k_w), dtype=np.float64)
    sub_plans = {}
    for a0, la in rows.tiles():
        for b0, lb in cols.tiles():
            gy_tile = RealTensor4(gy.data[:, :, a0:a0 + la, b0:b0 + lb])
            x_tile = RealTensor4(canvas[:, :, a0:a0 + la + p.k_h - 1, b0:b0 + lb + p.k_w - 1])
            sub = _tile_plan(plan, ConvPass.ACCGRAD, p.S, p.f, p.fp, la + p.k_h - 1, lb + p.k_w - 1, sub_plans)
            total += accgrad_fft(gy_tile, x_tile, sub, buffers).data
    return RealTensor4(total.astype(REAL_DTYPE))


TILED_PASSES = {
    ConvPass.FPROP: tiled_fprop,
    ConvPass.BPROP: tiled_bprop,
    ConvPass.ACCGRAD: tiled_accgrad,
}
