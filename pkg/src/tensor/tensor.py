import logging
from dataclasses import dataclass
from enum import Enum

import numpy as np
from pydantic import BaseModel, ConfigDict, model_validator

from src.errors import DimensionError, LayoutError

logger = logging.getLogger(__name__)

REAL_DTYPE = np.float32
COMPLEX_DTYPE = np.complex128


class Layout(str, Enum):
    BDHW = "BDHW"
    HWBD = "HWBD"


class FreqOrder(str, Enum):
    NATURAL = "natural"
    BIT_REVERSED_DIF = "bit_reversed_dif"


@dataclass(frozen=True, eq=False)
class RealTensor4:
    """Dense real 4-D tensor in BDHW order (batch, planes, height, width).

    The constructor takes a private float32 copy and marks it read-only, so a
    tensor can be shared between workers once built.
    """

    data: np.ndarray

    def __post_init__(self):
        arr = np.array(self.data, dtype=REAL_DTYPE, order="C", copy=True)
        if arr.ndim != 4:
            raise DimensionError(f"RealTensor4 needs 4 dims, got shape {arr.shape}")
        arr.flags.writeable = False
        object.__setattr__(self, "data", arr)

    layout = Layout.BDHW

    @property
    def dims(self) -> tuple[int, int, int, int]:
        return tuple(int(d) for d in self.data.shape)

    @classmethod
    def zeros(cls, dims) -> "RealTensor4":
        return cls(np.zeros(dims, dtype=REAL_DTYPE))

    def __eq__(self, other):
        if not isinstance(other, RealTensor4):
            return NotImplemented
        return self.dims == other.dims and np.array_equal(self.data, other.data)

    __hash__ = None


@dataclass(frozen=True, eq=False)
class FreqTensor:
    """Complex 4-D tensor with a layout tag and a bin-order tag.

    BDHW data has shape (A, B, H', W'); HWBD data has shape (H', W', A, B).
    Unlike RealTensor4 the array is wrapped without copying: the engine builds
    FreqTensors over views of its reusable work buffers.
    """

    data: np.ndarray
    layout: Layout = Layout.BDHW
    order: FreqOrder = FreqOrder.NATURAL

    def __post_init__(self):
        arr = np.asarray(self.data, dtype=COMPLEX_DTYPE)
        if arr.ndim != 4:
            raise DimensionError(f"FreqTensor needs 4 dims, got shape {arr.shape}")
        object.__setattr__(self, "data", arr)

    @property
    def dims(self) -> tuple[int, int, int, int]:
        return tuple(int(d) for d in self.data.shape)

    def __eq__(self, other):
        if not isinstance(other, FreqTensor):
            return NotImplemented
        return (self.layout == other.layout and self.order == other.order
                and self.dims == other.dims and np.array_equal(self.data, other.data))

    __hash__ = None


class PadSpec(BaseModel):
    model_config = ConfigDict(frozen=True)

    p_h: int = 0
    p_w: int = 0
    target_h: int
    target_w: int

    @model_validator(mode="after")
    def _check(self):
        if min(self.p_h, self.p_w) < 0:
            raise DimensionError(f"negative padding ({self.p_h}, {self.p_w})")
        if self.target_h < 1 or self.target_w < 1:
            raise DimensionError(f"target size must be positive, got {self.target_h}x{self.target_w}")
        return self

    def covers(self, h: int, w: int) -> bool:
        return self.target_h >= h + self.p_h and self.target_w >= w + self.p_w


def zero_pad(t: RealTensor4, spec: PadSpec) -> RealTensor4:
    """Embed every plane at offset (0, 0) of a zero (target_h, target_w) canvas."""
    S, P, H, W = t.dims
    if not spec.covers(H, W):
        raise DimensionError(
            f"pad target {spec.target_h}x{spec.target_w} smaller than "
            f"{H}+{spec.p_h} x {W}+{spec.p_w}")
    out = np.zeros((S, P, spec.target_h, spec.target_w), dtype=REAL_DTYPE)
    out[:, :, :H, :W] = t.data
    return RealTensor4(out)


def clip(t: RealTensor4, out_h: int, out_w: int) -> RealTensor4:
    """Top-left out_h x out_w window of every plane."""
    S, P, H, W = t.dims
    if out_h > H or out_w > W or out_h < 0 or out_w < 0:
        raise DimensionError(f"clip window {out_h}x{out_w} does not fit in {H}x{W}")
    return RealTensor4(t.data[:, :, :out_h, :out_w])


def transpose_bdhw_hwbd(t: FreqTensor, out: np.ndarray | None = None) -> FreqTensor:
    """(a, b, i, j) -> (i, j, a, b). `out` lets callers land the result in a reused buffer."""
    if t.layout != Layout.BDHW:
        raise LayoutError(f"expected BDHW input, got {t.layout.value}")
    return FreqTensor(_permute(t.data, out), layout=Layout.HWBD, order=t.order)


def transpose_hwbd_bdhw(t: FreqTensor, out: np.ndarray | None = None) -> FreqTensor:
    if t.layout != Layout.HWBD:
        raise LayoutError(f"expected HWBD input, got {t.layout.value}")
    return FreqTensor(_permute(t.data, out), layout=Layout.BDHW, order=t.order)


def _permute(data: np.ndarray, out: np.ndarray | None) -> np.ndarray:
    # (0, 1, 2, 3) -> (2, 3, 0, 1) is its own inverse
    moved = data.transpose(2, 3, 0, 1)
    if out is None:
        return np.ascontiguousarray(moved)
    if out.shape != moved.shape:
        raise DimensionError(f"transpose buffer shape {out.shape} != {moved.shape}")
    np.copyto(out, moved)
    return out
