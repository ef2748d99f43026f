from enum import Enum

from pydantic import BaseModel, ConfigDict, model_validator

from src.errors import DimensionError, TileRangeError, UnsupportedSizeError
from src.fft.fft1d import is_power_of_two, smooth_factors


class ConvPass(str, Enum):
    FPROP = "fprop"
    BPROP = "bprop"
    ACCGRAD = "accGrad"


class FftPath(str, Enum):
    RADIX2_ELIDED = "radix2_elided"
    SMOOTH_NATURAL = "smooth_natural"


class GemmStrategy(str, Enum):
    BATCHED = "batched"
    PER_BIN = "per_bin"
    TILED = "tiled"


class ConvProblem(BaseModel):
    """One layer pass: minibatch S, f input planes, f' output planes, h x w inputs, k_h x k_w kernels.

    Padding appends p_h rows and p_w columns of zeros to the input (placed at offset 0, like
    zero_pad), so the forward output is (h + p_h - k_h + 1) x (w + p_w - k_w + 1).
    """

    model_config = ConfigDict(frozen=True)

    S: int
    f: int
    fp: int
    h: int
    w: int
    k_h: int
    k_w: int
    p_h: int = 0
    p_w: int = 0

    @model_validator(mode="after")
    def _check(self):
        if min(self.S, self.f, self.fp, self.h, self.w, self.k_h, self.k_w) < 1:
            raise DimensionError(f"all problem counts must be >= 1: {self.key()}")
        if min(self.p_h, self.p_w) < 0:
            raise DimensionError(f"negative padding ({self.p_h}, {self.p_w})")
        if self.k_h > self.h + self.p_h or self.k_w > self.w + self.p_w:
            raise DimensionError(
                f"kernel {self.k_h}x{self.k_w} larger than padded input "
                f"{self.h + self.p_h}x{self.w + self.p_w}")
        return self

    @property
    def padded_h(self) -> int:
        return self.h + self.p_h

    @property
    def padded_w(self) -> int:
        return self.w + self.p_w

    @property
    def out_h(self) -> int:
        return self.padded_h - self.k_h + 1

    @property
    def out_w(self) -> int:
        return self.padded_w - self.k_w + 1

    @property
    def problem_size(self) -> int:
        return self.S * self.f * self.fp

    def with_boundary_padding(self) -> "ConvProblem":
        return self.model_copy(update={"p_h": self.k_h // 2, "p_w": self.k_w // 2})

    def key(self) -> tuple[int, ...]:
        return (self.S, self.f, self.fp, self.h, self.w, self.k_h, self.k_w, self.p_h, self.p_w)

    @classmethod
    def from_output_size(cls, S: int, f: int, fp: int, y: int, k: int) -> "ConvProblem":
        """Problem parameterized on output size: h = w = y + k - 1."""
        return cls(S=S, f=f, fp=fp, h=y + k - 1, w=y + k - 1, k_h=k, k_w=k)


class TileSpec(BaseModel):
    """Output tiles of length d over a valid correlation of an n-vector with a w-vector."""

    model_config = ConfigDict(frozen=True)

    n: int
    w: int
    d: int

    @model_validator(mode="after")
    def _check(self):
        if self.w < 1 or self.w > self.n:
            raise DimensionError(f"kernel length {self.w} must lie in [1, {self.n}]")
        if not 1 <= self.d <= self.out_len:
            raise TileRangeError(f"tile size {self.d} outside [1, {self.out_len}]")
        return self

    @property
    def out_len(self) -> int:
        return self.n - self.w + 1

    @property
    def tile_input_len(self) -> int:
        return self.d + self.w - 1

    @property
    def tile_count(self) -> int:
        return -(-self.out_len // self.d)

    def tiles(self) -> list[tuple[int, int]]:
        """(start, length) of every output tile; they partition [0, n - w + 1)."""
        return [(start, min(self.d, self.out_len - start)) for start in range(0, self.out_len, self.d)]


class ConvPlan(BaseModel):
    model_config = ConfigDict(frozen=True)

    problem: ConvProblem
    conv_pass: ConvPass
    n_h: int
    n_w: int
    fft_path: FftPath
    gemm_strategy: GemmStrategy = GemmStrategy.BATCHED
    tiling: tuple[TileSpec, TileSpec] | None = None
    buffer_bytes: int = 0

    @model_validator(mode="after")
    def _check(self):
        if self.tiling is None:
            need_h, need_w = self.problem.padded_h, self.problem.padded_w
        else:
            # a tiled plan's sizes describe the per-tile basis
            need_h, need_w = self.tiling[0].tile_input_len, self.tiling[1].tile_input_len
        if self.n_h < need_h or self.n_w < need_w:
            raise DimensionError(
                f"interpolation size {self.n_h}x{self.n_w} smaller than {need_h}x{need_w}")
        if self.fft_path == FftPath.RADIX2_ELIDED:
            if not (is_power_of_two(self.n_h) and is_power_of_two(self.n_w)):
                raise UnsupportedSizeError(f"radix-2 path needs powers of two, got {self.n_h}x{self.n_w}")
        elif smooth_factors(self.n_h) is None or smooth_factors(self.n_w) is None:
            raise UnsupportedSizeError(f"smooth path needs 7-smooth sizes, got {self.n_h}x{self.n_w}")
        return self

    def summary(self) -> str:
        tile = "untiled" if self.tiling is None else f"tile {self.tiling[0].d}x{self.tiling[1].d}"
        return f"{self.n_h}x{self.n_w} {self.fft_path.value} {self.gemm_strategy.value} {tile}"
