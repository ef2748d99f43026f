import numpy as np
import pytest
from hypothesis import given, settings
import hypothesis.strategies as st

from src.errors import DimensionError, LayoutError, OrderError, UnsupportedSizeError
from src.fft.fft1d import dft_naive
from src.fft.rfft import (FreqLayout, irfft1d, irfft2d, irfft2d_batched, rfft1d, rfft1d_pair, rfft2d,
                          rfft2d_batched, rfft_plan)
from src.tensor.tensor import FreqOrder, FreqTensor, Layout, RealTensor4


def naive_dft2(plane, n_h, n_w):
    padded = np.zeros((n_h, n_w))
    padded[:plane.shape[0], :plane.shape[1]] = plane
    return dft_naive(dft_naive(padded).T).T


def _rel(actual, expected) -> float:
    return float(np.abs(actual - expected).max() / np.abs(expected).max())


def test_rfft1d_impulse_and_stored_bins():
    assert np.allclose(rfft1d([1, 0, 0, 0], 4), [1, 1, 1])
    assert rfft1d([1.0], 4).shape == (3,)
    assert rfft1d(np.ones(3), 7).shape == (4,)


def test_rfft1d_matches_naive(rng):
    x = rng.standard_normal(8)
    assert _rel(rfft1d(x, 8), dft_naive(x)[:5]) <= 1e-5


def test_rfft1d_implicit_padding(rng):
    x = rng.standard_normal(5)
    padded = np.concatenate([x, np.zeros(3)])
    assert np.array_equal(rfft1d(x, 8), rfft1d(padded, 8))


def test_rfft1d_pair(rng):
    a, b = rng.standard_normal(16), rng.standard_normal(16)
    A, B = rfft1d_pair(a, b, 16)
    assert _rel(A, rfft1d(a, 16)) <= 1e-5
    assert _rel(B, rfft1d(b, 16)) <= 1e-5
    A, B = rfft1d_pair(a, np.zeros(16), 16)
    assert np.allclose(B, 0)
    A, B = rfft1d_pair(a, a, 16)
    assert np.allclose(A, B)


@pytest.mark.parametrize("n", [4, 7, 10, 16])
def test_irfft1d_round_trip(rng, n):
    x = rng.standard_normal(n)
    assert np.allclose(irfft1d(rfft1d(x, n), n), x)
    with pytest.raises(DimensionError):
        irfft1d(np.ones(n), n)


def test_rfft2d_constant_plane():
    out = rfft2d(np.ones((4, 4)), rfft_plan(4, 4))
    expected = np.zeros((4, 3))
    expected[0, 0] = 16
    assert np.allclose(out, expected)
    assert np.allclose(rfft2d([[2.5]], rfft_plan(1, 1)), [[2.5]])


@pytest.mark.parametrize("n_h,n_w", [(8, 8), (6, 10), (16, 9)])
def test_rfft2d_matches_naive(rng, n_h, n_w):
    plane = rng.standard_normal((n_h - 1, n_w - 2))
    expected = naive_dft2(plane, n_h, n_w)[:, :n_w // 2 + 1]
    assert _rel(rfft2d(plane, rfft_plan(n_h, n_w)), expected) <= 1e-5


def test_rfft2d_transposed_layout(rng):
    plane = rng.standard_normal((8, 8))
    row_major = rfft2d(plane, rfft_plan(8, 8))
    transposed = rfft2d(plane, rfft_plan(8, 8, output_layout=FreqLayout.TRANSPOSED))
    assert transposed.shape == (5, 8)
    assert np.array_equal(transposed, row_major.T)
    back = irfft2d(transposed, rfft_plan(8, 8, output_layout=FreqLayout.TRANSPOSED), 8, 8)
    assert np.allclose(back, plane)


def test_rfft2d_elided_is_bit_reversed_columns(rng):
    plane = rng.standard_normal((8, 6))
    natural = rfft2d(plane, rfft_plan(8, 8))
    elided = rfft2d(plane, rfft_plan(8, 8, elide_bit_reversal=True))
    assert np.allclose(elided, natural[[0, 4, 2, 6, 1, 5, 3, 7]])
    back = irfft2d(elided, rfft_plan(8, 8, elide_bit_reversal=True), 8, 6)
    assert np.allclose(back, plane)


def test_elision_needs_power_of_two_height():
    with pytest.raises(UnsupportedSizeError):
        rfft_plan(12, 16, elide_bit_reversal=True)


def test_irfft2d_dc_only_and_clip(rng):
    spectrum = np.zeros((4, 3), dtype=complex)
    spectrum[0, 0] = 16
    assert np.allclose(irfft2d(spectrum, rfft_plan(4, 4), 4, 4), 1)
    plane = rng.standard_normal((10, 10))
    back = irfft2d(rfft2d(plane, rfft_plan(16, 16)), rfft_plan(16, 16), 7, 5)
    assert np.allclose(back, plane[:7, :5])


def test_plane_larger_than_plan(rng):
    with pytest.raises(DimensionError):
        rfft2d(rng.standard_normal((9, 4)), rfft_plan(8, 8))


def test_hermitian_consistency(rng):
    plane = rng.standard_normal((6, 6))
    full = naive_dft2(plane, 6, 6)
    k = np.arange(6)
    assert np.allclose(full, np.conj(full[(-k) % 6][:, (-k) % 6]))
    assert np.allclose(rfft2d(plane, rfft_plan(6, 6)), full[:, :4])


@settings(max_examples=30, deadline=None)
@given(st.sampled_from([4, 6, 8, 12, 15, 16]), st.sampled_from([4, 5, 8, 14, 16]), st.integers(0, 2 ** 32 - 1))
def test_parseval_2d(n_h, n_w, seed):
    plane = np.random.default_rng(seed).standard_normal((n_h, n_w))
    stored = rfft2d(plane, rfft_plan(n_h, n_w))
    # bins 1 .. ceil(n_w/2)-1 stand for a mirrored partner as well
    weights = np.full(n_w // 2 + 1, 2.0)
    weights[0] = 1
    if n_w % 2 == 0:
        weights[-1] = 1
    energy = np.sum(weights * np.abs(stored) ** 2) / (n_h * n_w)
    assert energy == pytest.approx(np.sum(plane ** 2), rel=1e-4)


@pytest.mark.parametrize("workers", [1, 3])
def test_batched_matches_planewise(rng, workers):
    t = RealTensor4(rng.standard_normal((2, 3, 8, 8)))
    plan = rfft_plan(8, 8)
    ft = rfft2d_batched(t, plan, workers=workers)
    assert ft.dims == (2, 3, 8, 5)
    assert ft.layout == Layout.BDHW
    for s in range(2):
        for p in range(3):
            assert np.allclose(ft.data[s, p], rfft2d(t.data[s, p], plan))
    back = irfft2d_batched(ft, plan, 8, 8)
    assert np.allclose(back.data, t.data, atol=1e-5)


def test_batched_zero_and_single_plane(rng):
    plan = rfft_plan(6, 6)
    assert np.array_equal(rfft2d_batched(RealTensor4.zeros((2, 2, 6, 6)), plan).data, np.zeros((2, 2, 6, 4)))
    plane = rng.standard_normal((1, 1, 5, 5))
    assert np.allclose(rfft2d_batched(RealTensor4(plane), plan).data[0, 0],
                       rfft2d(plane[0, 0].astype(np.float32), plan))


def test_batched_into_buffer_and_order_tags(rng):
    plan = rfft_plan(8, 8, elide_bit_reversal=True)
    buf = np.empty((1, 2, 8, 5), dtype=complex)
    ft = rfft2d_batched(RealTensor4(rng.standard_normal((1, 2, 4, 4))), plan, out=buf)
    assert ft.data is buf
    assert ft.order == FreqOrder.BIT_REVERSED_DIF
    with pytest.raises(OrderError):
        irfft2d_batched(FreqTensor(buf), plan, 4, 4)
    with pytest.raises(LayoutError):
        irfft2d_batched(FreqTensor(buf.transpose(2, 3, 0, 1), layout=Layout.HWBD,
                                   order=FreqOrder.BIT_REVERSED_DIF), plan, 4, 4)
