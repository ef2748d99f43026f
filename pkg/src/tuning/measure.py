import statistics
import time
from typing import Callable

import numpy as np


def max_rel_error(actual, expected) -> float:
    """Max-norm of the difference, normalised by the max-norm of `expected` (absolute when that is zero)."""
    actual = np.asarray(getattr(actual, "data", actual), dtype=np.float64)
    expected = np.asarray(getattr(expected, "data", expected), dtype=np.float64)
    diff = float(np.max(np.abs(actual - expected), initial=0.0))
    scale = float(np.max(np.abs(expected), initial=0.0))
    return diff / scale if scale > 0 else diff


def measure_median(fn: Callable[[], object], repeats: int) -> float:
    """Median wall-clock microseconds of `repeats` calls, after one discarded warmup call."""
    fn()
    samples = []
    for _ in range(max(repeats, 1)):
        start = time.perf_counter()
        fn()
        samples.append((time.perf_counter() - start) * 1e6)
    return statistics.median(samples)
