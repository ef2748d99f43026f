from src.fft.fft1d import smooth_factors


def next_pow2(n: int) -> int:
    return 1 if n <= 1 else 1 << (n - 1).bit_length()


def is_smooth(n: int) -> bool:
    return smooth_factors(n) is not None


def smooth_sizes(n: int) -> list[int]:
    """Every 7-smooth size in [n, next_pow2(n)], ascending; smooth_sizes(13) == [14, 15, 16]."""
    n = max(n, 1)
    return [i for i in range(n, next_pow2(n) + 1) if is_smooth(i)]
