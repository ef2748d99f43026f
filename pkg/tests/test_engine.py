import numpy as np
import pytest
from hypothesis import HealthCheck, assume, given, settings
import hypothesis.strategies as st

from src.conv.buffers import BUFFER_NAMES, WorkBuffers
from src.conv.direct import fprop_direct, run_direct_pass
from src.conv.engine import (accgrad_fft, bprop_fft, build_plan, fprop_fft, run_fft_pass, theoretical_flops,
                             tolerance)
from src.conv.models import ConvPass, ConvPlan, ConvProblem, FftPath, GemmStrategy
from src.errors import DimensionError, PlanMismatchError, UnsupportedSizeError
from src.tensor.tensor import RealTensor4
from src.tuning.autotuner import random_operands
from src.tuning.measure import max_rel_error


def _problem(S=1, f=1, fp=1, h=8, w=8, k=3, p=0):
    return ConvProblem(S=S, f=f, fp=fp, h=h, w=w, k_h=k, k_w=k, p_h=p, p_w=p)


def test_fprop_ones(buffers):
    problem = _problem(h=3, w=3, k=2)
    plan = build_plan(problem, ConvPass.FPROP)
    y = fprop_fft(RealTensor4(np.ones((1, 1, 3, 3))), RealTensor4(np.ones((1, 1, 2, 2))), plan, buffers)
    assert np.allclose(y.data, 4, atol=1e-5)


@pytest.mark.parametrize("path", list(FftPath))
def test_identity_kernel(make_tensor, buffers, path):
    problem = _problem(S=2, h=6, w=5, k=1)
    x = make_tensor(2, 1, 6, 5)
    one = RealTensor4(np.ones((1, 1, 1, 1)))
    y = fprop_fft(x, one, build_plan(problem, ConvPass.FPROP, path), buffers)
    assert np.allclose(y.data, x.data, atol=1e-5)
    gx = bprop_fft(x, one, build_plan(problem, ConvPass.BPROP, path), buffers)
    assert np.allclose(gx.data, x.data, atol=1e-5)


def test_bprop_and_accgrad_zero_gradients(make_tensor, buffers):
    problem = _problem(S=2, f=3, fp=2)
    gy = RealTensor4.zeros((2, 2, problem.out_h, problem.out_w))
    gx = bprop_fft(gy, make_tensor(2, 3, 3, 3), build_plan(problem, ConvPass.BPROP), buffers)
    assert np.allclose(gx.data, 0)
    gw = accgrad_fft(gy, make_tensor(2, 3, 8, 8), build_plan(problem, ConvPass.ACCGRAD), buffers)
    assert np.allclose(gw.data, 0)


def test_accgrad_impulses(buffers):
    problem = _problem(h=4, w=4, k=3)
    x = np.zeros((1, 1, 4, 4))
    x[0, 0, 0, 0] = 1
    gy = np.zeros((1, 1, 2, 2))
    gy[0, 0, 0, 0] = 1
    gw = accgrad_fft(RealTensor4(gy), RealTensor4(x), build_plan(problem, ConvPass.ACCGRAD), buffers)
    expected = np.zeros((1, 1, 3, 3))
    expected[0, 0, 0, 0] = 1
    assert np.allclose(gw.data, expected, atol=1e-6)


@pytest.mark.parametrize("conv_pass,dims", [
    (ConvPass.FPROP, dict(S=4, f=8, fp=8, h=13, w=13, k=3)),
    (ConvPass.BPROP, dict(S=2, f=3, fp=2, h=8, w=8, k=3)),
    (ConvPass.ACCGRAD, dict(S=3, f=2, fp=2, h=9, w=9, k=4)),
])
@pytest.mark.parametrize("path", list(FftPath))
def test_matches_direct(rng, buffers, conv_pass, dims, path):
    problem = _problem(**dims)
    first, second = random_operands(problem, conv_pass, rng)
    plan = build_plan(problem, conv_pass, path)
    got = run_fft_pass(plan, first, second, buffers)
    assert max_rel_error(got, run_direct_pass(problem, conv_pass, first, second)) <= 1e-4


def test_default_sizes():
    problem = _problem(h=13, w=13)
    assert (build_plan(problem, ConvPass.FPROP).n_h, build_plan(problem, ConvPass.FPROP).n_w) == (14, 14)
    radix2 = build_plan(problem, ConvPass.FPROP, FftPath.RADIX2_ELIDED)
    assert (radix2.n_h, radix2.n_w) == (16, 16)
    rect = build_plan(problem, ConvPass.FPROP, n_h=15, n_w=16)
    assert (rect.n_h, rect.n_w) == (15, 16)


def test_plan_invariants():
    problem = _problem(h=13, w=13, p=1)
    with pytest.raises(DimensionError):
        build_plan(problem, ConvPass.FPROP, n_h=13)
    with pytest.raises(UnsupportedSizeError):
        build_plan(problem, ConvPass.FPROP, FftPath.RADIX2_ELIDED, n_h=14, n_w=16)
    with pytest.raises(UnsupportedSizeError):
        ConvPlan(problem=_problem(h=11, w=11), conv_pass=ConvPass.FPROP, n_h=11, n_w=12,
                 fft_path=FftPath.SMOOTH_NATURAL)


def test_plan_mismatch(make_tensor, buffers):
    problem = _problem(S=2, f=2, fp=2)
    plan = build_plan(problem, ConvPass.FPROP)
    with pytest.raises(PlanMismatchError):
        fprop_fft(make_tensor(2, 2, 7, 8), make_tensor(2, 2, 3, 3), plan, buffers)
    with pytest.raises(PlanMismatchError):
        bprop_fft(make_tensor(2, 2, 6, 6), make_tensor(2, 2, 3, 3), plan, buffers)


@settings(max_examples=200, deadline=None, suppress_health_check=[HealthCheck.too_slow])
@given(
    st.sampled_from([1, 2, 4]), st.sampled_from([1, 2, 4]), st.sampled_from([1, 2, 4]),
    st.integers(4, 16), st.integers(4, 16), st.sampled_from([1, 2, 3, 5]), st.booleans(),
    st.sampled_from(list(GemmStrategy)), st.integers(0, 2 ** 32 - 1),
)
def test_oracle_equivalence(S, f, fp, h, w, k, padded, gemm, seed):
    assume(k <= min(h, w) + (k // 2 if padded else 0))
    problem = _problem(S=S, f=f, fp=fp, h=h, w=w, k=k, p=k // 2 if padded else 0)
    rng = np.random.default_rng(seed)
    buffers = WorkBuffers()
    for conv_pass in ConvPass:
        first, second = random_operands(problem, conv_pass, rng)
        expected = run_direct_pass(problem, conv_pass, first, second)
        for path in FftPath:
            plan = build_plan(problem, conv_pass, path, gemm_strategy=gemm)
            got = run_fft_pass(plan, first, second, buffers)
            assert max_rel_error(got, expected) <= 1e-3, (conv_pass, path)


@pytest.mark.parametrize("conv_pass", list(ConvPass))
def test_paths_agree(rng, buffers, conv_pass):
    problem = _problem(S=2, f=3, fp=2, h=10, w=12, k=3)
    first, second = random_operands(problem, conv_pass, rng)
    elided = run_fft_pass(build_plan(problem, conv_pass, FftPath.RADIX2_ELIDED), first, second, buffers)
    natural = run_fft_pass(build_plan(problem, conv_pass, FftPath.SMOOTH_NATURAL), first, second, buffers)
    assert max_rel_error(elided, natural) <= 1e-4


def test_buffer_reuse_is_invisible(rng):
    shared = WorkBuffers()
    big = _problem(S=2, f=4, fp=4, h=16, w=16, k=5)
    small = _problem(S=1, f=2, fp=3, h=7, w=9, k=3)
    for problem in (big, small, big):
        x, wgt = random_operands(problem, ConvPass.FPROP, rng)
        plan = build_plan(problem, ConvPass.FPROP)
        reused, fresh = fprop_fft(x, wgt, plan, shared), fprop_fft(x, wgt, plan, WorkBuffers())
        assert np.allclose(reused.data, fresh.data, rtol=0, atol=1e-6)
    assert all(shared.capacity(name) > 0 for name in BUFFER_NAMES)


def test_buffers_grow_monotonically():
    buffers = WorkBuffers()
    buffers.view("in_freq", (4, 4))
    buffers.view("in_freq", (2, 2))
    assert buffers.capacity("in_freq") == 16
    buffers.view("in_freq", (5, 5))
    assert buffers.capacity("in_freq") == 25
    assert buffers.nbytes == 25 * 16


def _loss(x, wgt, gy, padding):
    return float(np.sum(fprop_direct(RealTensor4(x), RealTensor4(wgt), padding).data.astype(np.float64) * gy))


def _central(fn, arr, step=1e-3):
    grad = np.zeros_like(arr)
    for idx in np.ndindex(arr.shape):
        plus, minus = arr.copy(), arr.copy()
        plus[idx] += step
        minus[idx] -= step
        grad[idx] = (fn(plus) - fn(minus)) / (2 * step)
    return grad


def test_gradients_match_finite_differences(rng, buffers):
    for _ in range(20):
        S, f, fp = (int(v) for v in rng.integers(1, 4, size=3))
        problem = _problem(S=S, f=f, fp=fp, h=int(rng.integers(4, 8)), w=int(rng.integers(4, 8)),
                           k=int(rng.integers(1, 4)), p=int(rng.integers(0, 2)))
        x = rng.standard_normal((problem.S, problem.f, problem.h, problem.w))
        wgt = rng.standard_normal((problem.fp, problem.f, problem.k_h, problem.k_w))
        gy = rng.standard_normal((problem.S, problem.fp, problem.out_h, problem.out_w))
        padding = (problem.p_h, problem.p_w)
        fd_x = _central(lambda v: _loss(v, wgt, gy, padding), x)
        fd_w = _central(lambda v: _loss(x, v, gy, padding), wgt)

        for path in FftPath:
            gx = bprop_fft(RealTensor4(gy), RealTensor4(wgt), build_plan(problem, ConvPass.BPROP, path), buffers)
            assert max_rel_error(gx, fd_x) <= 1e-2
            gw = accgrad_fft(RealTensor4(gy), RealTensor4(x), build_plan(problem, ConvPass.ACCGRAD, path), buffers)
            assert max_rel_error(gw, fd_w) <= 1e-2


def test_flip_of_bprop_conjugation_breaks_equivalence(rng, buffers, monkeypatch):
    from src.conv import engine

    monkeypatch.setitem(engine.PASS_CONJUGATION, ConvPass.BPROP, True)
    problem = _problem(S=1, f=2, fp=2, h=8, w=8, k=3)
    gy, wgt = random_operands(problem, ConvPass.BPROP, rng)
    got = bprop_fft(gy, wgt, build_plan(problem, ConvPass.BPROP), buffers)
    assert max_rel_error(got, run_direct_pass(problem, ConvPass.BPROP, gy, wgt)) > 1e-2


def test_theoretical_flops():
    one = build_plan(_problem(S=2, f=3, fp=4, h=16, w=16, k=1), ConvPass.FPROP)
    fft_cost, direct_cost = theoretical_flops(one)
    assert direct_cost == 2 * 3 * 4 * 16 * 16
    assert fft_cost > direct_cost

    costs = [theoretical_flops(build_plan(_problem(h=32, w=32, k=k), ConvPass.FPROP, n_h=32, n_w=32))
             for k in (3, 5, 9)]
    assert len({fft for fft, _ in costs}) == 1
    assert costs[2][1] / costs[0][1] == pytest.approx(81 / 9)

    l3 = build_plan(_problem(S=64, f=64, fp=64, h=32, w=32, k=9), ConvPass.FPROP, n_h=32, n_w=32)
    fft_cost, direct_cost = theoretical_flops(l3)
    assert direct_cost / fft_cost > 7


def test_tolerance_widens_with_size():
    small = build_plan(_problem(), ConvPass.FPROP)
    large = build_plan(_problem(h=128, w=128), ConvPass.FPROP, n_h=128, n_w=128)
    assert tolerance(small) == pytest.approx(1e-3)
    assert tolerance(large) > tolerance(small)
