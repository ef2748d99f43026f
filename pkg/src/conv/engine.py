import logging
import math

import numpy as np

from src.config.settings import BASE_TOLERANCE
from src.conv.buffers import WorkBuffers
from src.conv.cgemm import CgemmBatch, cgemm_batched
from src.conv.models import ConvPass, ConvPlan, ConvProblem, FftPath, GemmStrategy, TileSpec
from src.errors import PlanMismatchError
from src.fft.rfft import RfftPlan, irfft2d_batched, rfft2d_batched, rfft_plan
from src.tensor.tensor import FreqTensor, Layout, RealTensor4, transpose_bdhw_hwbd, transpose_hwbd_bdhw
from src.tuning.sizes import next_pow2, smooth_sizes

logger = logging.getLogger(__name__)

# whether the second cgemm operand is conjugated in each pass
PASS_CONJUGATION = {
    ConvPass.FPROP: True,     # correlation with the weights
    ConvPass.BPROP: False,    # convolution with the weights
    ConvPass.ACCGRAD: True,   # conj on the input spectrum, product conjugated afterwards
}

_COMPLEX_BYTES = 16


def _min_size(n: int, fft_path: FftPath) -> int:
    if fft_path == FftPath.RADIX2_ELIDED:
        return next_pow2(n)
    return smooth_sizes(n)[0]


def build_plan(problem: ConvProblem, conv_pass: ConvPass, fft_path: FftPath = FftPath.SMOOTH_NATURAL,
               n_h: int | None = None, n_w: int | None = None,
               gemm_strategy: GemmStrategy = GemmStrategy.BATCHED,
               tiling: tuple[TileSpec, TileSpec] | None = None) -> ConvPlan:
    """
    Assemble a ConvPlan, defaulting each interpolation size to the smallest one the path
    supports (next power of two for radix-2, smallest 7-smooth size otherwise).
    For a tiled plan the sizes cover one tile's input rather than the whole plane.
    """
    if tiling is None:
        need_h, need_w = problem.padded_h, problem.padded_w
    else:
        need_h, need_w = tiling[0].tile_input_len, tiling[1].tile_input_len
    n_h = n_h or _min_size(need_h, fft_path)
    n_w = n_w or _min_size(need_w, fft_path)
    planes = problem.S * problem.f + problem.f * problem.fp + problem.S * problem.fp
    buffer_bytes = 2 * planes * n_h * (n_w // 2 + 1) * _COMPLEX_BYTES
    return ConvPlan(problem=problem, conv_pass=ConvPass(conv_pass), n_h=n_h, n_w=n_w, fft_path=fft_path,
                    gemm_strategy=gemm_strategy, tiling=tiling, buffer_bytes=buffer_bytes)


def tolerance(plan: ConvPlan) -> float:
    """Relative max-norm tolerance against the direct oracle, widened for large transforms."""
    return BASE_TOLERANCE * max(1.0, math.log2(plan.n_h * plan.n_w) / 10)


def theoretical_flops(plan: ConvPlan) -> tuple[float, float]:
    """
    Model operation counts (fft_cost, direct_cost) for the plan's problem at its interpolation size:
    S f f' n^2 + (S f + f f' + S f') n^2 log n against S f f' n^2 k^2.
    """
    p = plan.problem
    area = plan.n_h * plan.n_w
    log_n = math.log2(area) / 2
    reductions = p.S * p.f * p.fp
    transforms = p.S * p.f + p.f * p.fp + p.S * p.fp
    fft_cost = reductions * area + transforms * area * log_n
    direct_cost = reductions * area * p.k_h * p.k_w
    return float(fft_cost), float(direct_cost)


def _rfft_plan_for(plan: ConvPlan) -> RfftPlan:
    return rfft_plan(plan.n_h, plan.n_w, elide_bit_reversal=plan.fft_path == FftPath.RADIX2_ELIDED)


def _check(plan: ConvPlan, conv_pass: ConvPass, first: RealTensor4, first_dims, second: RealTensor4,
           second_dims) -> None:
    if plan.conv_pass != conv_pass:
        raise PlanMismatchError(f"plan is for {plan.conv_pass.value}, not {conv_pass.value}")
    if plan.tiling is not None:
        raise PlanMismatchError("tiled plans run through the tiling module")
    if first.dims != first_dims or second.dims != second_dims:
        raise PlanMismatchError(
            f"tensors {first.dims} and {second.dims} do not match plan dims {first_dims} and {second_dims}")


def _hwbd(ft: FreqTensor, out: np.ndarray, swap_planes: bool = False) -> FreqTensor:
    """BDHW (a, b, i, j) -> HWBD (i, j, a, b), or (i, j, b, a) with swap_planes."""
    if not swap_planes:
        return transpose_bdhw_hwbd(ft, out=out)
    np.copyto(out, ft.data.transpose(2, 3, 1, 0))
    return FreqTensor(out, layout=Layout.HWBD, order=ft.order)


def _spectra(t: RealTensor4, rplan: RfftPlan, buffers: WorkBuffers, name: str) -> FreqTensor:
    A, B = t.dims[:2]
    return rfft2d_batched(t, rplan, out=buffers.view(name, (A, B, rplan.n_h, rplan.stored_w)))


def fprop_fft(x: RealTensor4, wgt: RealTensor4, plan: ConvPlan, buffers: WorkBuffers) -> RealTensor4:
    """
    Forward pass in the frequency domain:
    FFT2D(x), FFT2D(wgt) -> HWBD -> Cgemm with conjugated weights -> BDHW -> IFFT2D -> clip.
    """
    p = plan.problem
    _check(plan, ConvPass.FPROP, x, (p.S, p.f, p.h, p.w), wgt, (p.fp, p.f, p.k_h, p.k_w))
    rplan = _rfft_plan_for(plan)
    H, W = rplan.n_h, rplan.stored_w
    with buffers.lock:
        in_f = _spectra(x, rplan, buffers, "in_freq")
        wei_f = _spectra(wgt, rplan, buffers, "wei_freq")
        in_t = _hwbd(in_f, buffers.view("in_freq_t", (H, W, p.S, p.f)))
        wei_t = _hwbd(wei_f, buffers.view("wei_freq_t", (H, W, p.fp, p.f)))
        spec = CgemmBatch(bins=H * W, m=p.S, k_dim=p.f, n=p.fp,
                          conjugate_b=PASS_CONJUGATION[ConvPass.FPROP])
        out_t = cgemm_batched(in_t, wei_t, spec, plan.gemm_strategy,
                              out=buffers.view("out_freq_t", (H, W, p.S, p.fp)))
        out_f = transpose_hwbd_bdhw(out_t, out=buffers.view("out_freq", (p.S, p.fp, H, W)))
        return irfft2d_batched(out_f, rplan, p.out_h, p.out_w)


def bprop_fft(gy: RealTensor4, wgt: RealTensor4, plan: ConvPlan, buffers: WorkBuffers) -> RealTensor4:
    """
    Input gradient: full convolution of gy with the kernels (no conjugation), reduced over f',
    clipped to h x w.
    """
    p = plan.problem
    _check(plan, ConvPass.BPROP, gy, (p.S, p.fp, p.out_h, p.out_w), wgt, (p.fp, p.f, p.k_h, p.k_w))
    rplan = _rfft_plan_for(plan)
    H, W = rplan.n_h, rplan.stored_w
    with buffers.lock:
        in_f = _spectra(gy, rplan, buffers, "in_freq")
        wei_f = _spectra(wgt, rplan, buffers, "wei_freq")
        in_t = _hwbd(in_f, buffers.view("in_freq_t", (H, W, p.S, p.fp)))
        # per bin the weights act as an f x f' operand
        wei_t = _hwbd(wei_f, buffers.view("wei_freq_t", (H, W, p.f, p.fp)), swap_planes=True)
        spec = CgemmBatch(bins=H * W, m=p.S, k_dim=p.fp, n=p.f,
                          conjugate_b=PASS_CONJUGATION[ConvPass.BPROP])
        out_t = cgemm_batched(in_t, wei_t, spec, plan.gemm_strategy,
                              out=buffers.view("out_freq_t", (H, W, p.S, p.f)))
        out_f = transpose_hwbd_bdhw(out_t, out=buffers.view("out_freq", (p.S, p.f, H, W)))
        return irfft2d_batched(out_f, rplan, p.h, p.w)


def accgrad_fft(gy: RealTensor4, x: RealTensor4, plan: ConvPlan, buffers: WorkBuffers) -> RealTensor4:
    """
    Weight gradient: correlation of the (padded) input against gy, reduced over S in the
    frequency domain, clipped to k_h x k_w.
    Per bin the product is sum_s GY[s, j] * conj(X[s, i]); its conjugate is the spectrum
    of the wanted correlation.
    """
    p = plan.problem
    _check(plan, ConvPass.ACCGRAD, gy, (p.S, p.fp, p.out_h, p.out_w), x, (p.S, p.f, p.h, p.w))
    rplan = _rfft_plan_for(plan)
    H, W = rplan.n_h, rplan.stored_w
    with buffers.lock:
        in_f = _spectra(gy, rplan, buffers, "in_freq")
        wei_f = _spectra(x, rplan, buffers, "wei_freq")
        in_t = _hwbd(in_f, buffers.view("in_freq_t", (H, W, p.fp, p.S)), swap_planes=True)
        wei_t = _hwbd(wei_f, buffers.view("wei_freq_t", (H, W, p.f, p.S)), swap_planes=True)
        spec = CgemmBatch(bins=H * W, m=p.fp, k_dim=p.S, n=p.f,
                          conjugate_b=PASS_CONJUGATION[ConvPass.ACCGRAD])
        out_t = cgemm_batched(in_t, wei_t, spec, plan.gemm_strategy,
                              out=buffers.view("out_freq_t", (H, W, p.fp, p.f)))
        np.conjugate(out_t.data, out=out_t.data)
        out_f = transpose_hwbd_bdhw(out_t, out=buffers.view("out_freq", (p.fp, p.f, H, W)))
        return irfft2d_batched(out_f, rplan, p.k_h, p.k_w)


_PASSES = {
    ConvPass.FPROP: fprop_fft,
    ConvPass.BPROP: bprop_fft,
    ConvPass.ACCGRAD: accgrad_fft,
}


def run_fft_pass(plan: ConvPlan, first: RealTensor4, second: RealTensor4, buffers: WorkBuffers) -> RealTensor4:
    """Dispatch an untiled plan to its pass: (x, wgt), (gy, wgt) or (gy, x)."""
    return _PASSES[plan.conv_pass](first, second, plan, buffers)
