import logging
import threading

import numpy as np

from src.tensor.tensor import COMPLEX_DTYPE

logger = logging.getLogger(__name__)

BUFFER_NAMES = ("in_freq", "in_freq_t", "wei_freq", "wei_freq_t", "out_freq", "out_freq_t")


class WorkBuffers:
    """
    The six frequency buffers of one engine instance: a spectrum and its transposed
    copy for each of input, weight and output.
    Buffers only ever grow; a request that fits is served from the existing allocation.
    The lock makes one engine instance single-invocation-at-a-time.
    """

    def __init__(self):
        self.lock = threading.Lock()
        self._flat = {name: np.empty(0, dtype=COMPLEX_DTYPE) for name in BUFFER_NAMES}

    def view(self, name: str, shape: tuple[int, ...]) -> np.ndarray:
        """Contiguous array of `shape` carved from the front of buffer `name`."""
        size = int(np.prod(shape))
        if self._flat[name].size < size:
            logger.debug(f"Expanding buffer {name} from {self._flat[name].size} to {size} elements")
            self._flat[name] = np.empty(size, dtype=COMPLEX_DTYPE)
        return self._flat[name][:size].reshape(shape)

    def capacity(self, name: str) -> int:
        return self._flat[name].size

    @property
    def nbytes(self) -> int:
        return sum(buf.nbytes for buf in self._flat.values())
