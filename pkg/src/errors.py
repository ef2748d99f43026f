class FFTConvError(Exception):
    """Base class for every error raised by the fftconv package."""


class DimensionError(FFTConvError):
    """Tensor or problem dimensions are inconsistent."""


class TileRangeError(DimensionError):
    """Tile size outside [1, n - w + 1]."""


class LayoutError(FFTConvError):
    """A frequency tensor is not in the layout an operation expects."""


class OrderError(FFTConvError):
    """A spectrum is not in the bin order an operation expects."""


class UnsupportedSizeError(FFTConvError):
    """Transform size the library has no kernel for (not 7-smooth, or too large)."""


class PlanMismatchError(FFTConvError):
    """Plan does not match the tensors it is executed on."""


class TensorFormatError(FFTConvError):
    """Golden tensor file is malformed."""


class TruncatedPayloadError(TensorFormatError):
    """Golden tensor payload length disagrees with its header."""


class CacheParseError(FFTConvError):
    def __init__(self, line_number: int, message: str):
        super().__init__(f"line {line_number}: {message}")
        self.line_number = line_number


class GridParseError(FFTConvError):
    """Benchmark grid file is malformed."""


class VerificationError(FFTConvError):
    """Frequency-domain result disagrees with the direct oracle."""
