import logging
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from src.config.settings import MAX_FFT_SIZE, SMOOTH_RADICES
from src.errors import DimensionError, OrderError, UnsupportedSizeError
from src.tensor.tensor import FreqOrder

logger = logging.getLogger(__name__)


def is_power_of_two(n: int) -> bool:
    return n >= 1 and n & (n - 1) == 0


def smooth_factors(n: int) -> tuple[int, ...] | None:
    """Factor n over {2, 3, 5, 7}; None when another prime divides it."""
    if n < 1:
        return None
    factors = []
    for p in SMOOTH_RADICES:
        while n % p == 0:
            factors.append(p)
            n //= p
    return tuple(factors) if n == 1 else None


def bit_reversal_indices(n: int) -> np.ndarray:
    if not is_power_of_two(n):
        raise UnsupportedSizeError(f"bit reversal needs a power of two, got {n}")
    bits = n.bit_length() - 1
    idx = np.arange(n)
    rev = np.zeros(n, dtype=np.intp)
    for b in range(bits):
        rev |= ((idx >> b) & 1) << (bits - 1 - b)
    return rev


@dataclass(frozen=True, eq=False)
class Radix2Plan:
    n: int
    log2n: int
    twiddles: np.ndarray  # w_n^j = exp(-2*pi*i*j/n), j < n/2
    bitrev: np.ndarray


@dataclass(frozen=True, eq=False)
class SmoothPlan:
    n: int
    factors: tuple[int, ...]
    stage_twiddles: tuple[np.ndarray, ...]  # stage i: (p_i, m_i) table of w_{n_i}^{j*k}
    leaves: dict  # radix p -> p x p DFT matrix, p in {3, 5, 7}


@lru_cache(maxsize=None)
def radix2_plan(n: int) -> Radix2Plan:
    if not is_power_of_two(n) or n > MAX_FFT_SIZE:
        raise UnsupportedSizeError(f"radix-2 plan needs a power of two <= {MAX_FFT_SIZE}, got {n}")
    twiddles = np.exp(-2j * np.pi * np.arange(n // 2) / n)
    twiddles.flags.writeable = False
    bitrev = bit_reversal_indices(n)
    bitrev.flags.writeable = False
    return Radix2Plan(n=n, log2n=n.bit_length() - 1, twiddles=twiddles, bitrev=bitrev)


@lru_cache(maxsize=None)
def smooth_plan(n: int) -> SmoothPlan:
    factors = smooth_factors(n)
    if factors is None or n > MAX_FFT_SIZE:
        # no Bluestein fallback: the autotuner only proposes 7-smooth sizes
        raise UnsupportedSizeError(f"size {n} is not 7-smooth or exceeds {MAX_FFT_SIZE}")
    stage_twiddles = []
    n_stage = n
    for p in factors:
        m = n_stage // p
        table = np.exp(-2j * np.pi * np.outer(np.arange(p), np.arange(m)) / n_stage)
        table.flags.writeable = False
        stage_twiddles.append(table)
        n_stage = m
    leaves = {}
    for p in set(factors) - {2}:
        leaves[p] = np.exp(-2j * np.pi * np.outer(np.arange(p), np.arange(p)) / p)
    logger.debug(f"Built smooth plan n={n} factors={factors}")
    return SmoothPlan(n=n, factors=factors, stage_twiddles=tuple(stage_twiddles), leaves=leaves)


def plan_for(n: int) -> Radix2Plan | SmoothPlan:
    """Radix-2 plan for powers of two, mixed-radix plan for other 7-smooth sizes."""
    return radix2_plan(n) if is_power_of_two(n) else smooth_plan(n)


def _as_complex(x, n: int) -> np.ndarray:
    arr = np.asarray(x, dtype=np.complex128)
    if arr.ndim == 0 or arr.shape[-1] != n:
        raise DimensionError(f"transform length {n} does not match input of shape {arr.shape}")
    return arr


def dft_naive(x) -> np.ndarray:
    """Direct O(n^2) evaluation of X_k = sum_j x_j w_n^{kj}; the oracle for every FFT path."""
    arr = np.asarray(x, dtype=np.complex128)
    n = arr.shape[-1]
    if n < 1:
        raise DimensionError("dft_naive needs n >= 1")
    k = np.arange(n)
    # reduce kj mod n before scaling so large n keeps exact phases
    w = np.exp(-2j * np.pi * (np.outer(k, k) % n) / n)
    return arr @ w.T


def bit_reverse_permute(x) -> np.ndarray:
    arr = np.asarray(x)
    return arr[..., bit_reversal_indices(arr.shape[-1])]


def _dit_stages(a: np.ndarray, plan: Radix2Plan, inverse: bool) -> np.ndarray:
    # input in bit-reversed order, output natural
    n = plan.n
    lead = a.shape[:-1]
    m = 2
    while m <= n:
        half = m // 2
        tw = plan.twiddles[::n // m]
        if inverse:
            tw = tw.conj()
        blocks = a.reshape(lead + (n // m, 2, half))
        u = blocks[..., 0, :]
        v = blocks[..., 1, :] * tw
        a = np.concatenate((u + v, u - v), axis=-1).reshape(lead + (n,))
        m *= 2
    return a


def fft_dit(x, plan: Radix2Plan) -> np.ndarray:
    """Radix-2 decimation in time over the last axis; natural-order output."""
    arr = _as_complex(x, plan.n)
    return _dit_stages(arr[..., plan.bitrev], plan, inverse=False)


def fft_dif_noreorder(x, plan: Radix2Plan) -> np.ndarray:
    """
    Radix-2 decimation in frequency over the last axis.
    The output is left in bit-reversed order (FreqOrder.BIT_REVERSED_DIF); it is meant for
    pointwise operations followed by ifft_dit_from_bitreversed.
    """
    a = _as_complex(x, plan.n)
    n = plan.n
    lead = a.shape[:-1]
    m = n
    while m >= 2:
        half = m // 2
        tw = plan.twiddles[::n // m]
        blocks = a.reshape(lead + (n // m, 2, half))
        u = blocks[..., 0, :]
        v = blocks[..., 1, :]
        a = np.concatenate((u + v, (u - v) * tw), axis=-1).reshape(lead + (n,))
        m //= 2
    return a


def ifft_dit_from_bitreversed(X, plan: Radix2Plan,
                              order: FreqOrder = FreqOrder.BIT_REVERSED_DIF) -> np.ndarray:
    """Normalized inverse consuming bit-reversed bins directly; no permutation pass runs."""
    if order != FreqOrder.BIT_REVERSED_DIF:
        raise OrderError(f"expected bit-reversed DIF spectrum, got {FreqOrder(order).value}")
    arr = _as_complex(X, plan.n)
    return _dit_stages(arr, plan, inverse=True) / plan.n


def _smooth_stage(x: np.ndarray, plan: SmoothPlan, stage: int) -> np.ndarray:
    if stage == len(plan.factors):
        return x
    p = plan.factors[stage]
    n = x.shape[-1]
    m = n // p
    lead = x.shape[:-1]
    # sub[..., j1, j2] = x[..., j1 + p*j2]
    sub = x.reshape(lead + (m, p)).swapaxes(-1, -2)
    y = _smooth_stage(sub, plan, stage + 1) * plan.stage_twiddles[stage]
    if p == 2:
        z = np.concatenate((y[..., 0:1, :] + y[..., 1:2, :], y[..., 0:1, :] - y[..., 1:2, :]), axis=-2)
    else:
        z = np.einsum("qj,...jk->...qk", plan.leaves[p], y)
    # X[k + m*q] = z[..., q, k]
    return z.reshape(lead + (n,))


def fft_smooth(x, plan: SmoothPlan) -> np.ndarray:
    """Mixed-radix Cooley-Tukey over {2, 3, 5, 7}; natural-order output."""
    arr = _as_complex(x, plan.n)
    return _smooth_stage(arr, plan, 0)


def fft(x, plan: Radix2Plan | SmoothPlan) -> np.ndarray:
    if isinstance(plan, Radix2Plan):
        return fft_dit(x, plan)
    return fft_smooth(x, plan)


def ifft(X, plan: Radix2Plan | SmoothPlan) -> np.ndarray:
    """Natural-order inverse, divided by n."""
    arr = _as_complex(X, plan.n)
    if isinstance(plan, Radix2Plan):
        return _dit_stages(arr[..., plan.bitrev], plan, inverse=True) / plan.n
    return np.conj(fft_smooth(np.conj(arr), plan)) / plan.n


def fft_batched(xs, plan: Radix2Plan | SmoothPlan) -> np.ndarray:
    """Transform B contiguous rows of length n; rows are independent."""
    arr = np.asarray(xs, dtype=np.complex128)
    if arr.ndim != 2:
        raise DimensionError(f"fft_batched expects a (B, n) array, got shape {arr.shape}")
    return fft(arr, plan)
