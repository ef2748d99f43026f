import itertools
import logging

from pydantic import BaseModel, ConfigDict, model_validator

from src.config.layers import DESK_LAYERS, REPORTED_BATCH
from src.conv.models import ConvProblem
from src.errors import GridParseError

logger = logging.getLogger(__name__)

GRID_KEYS = ("S", "f", "fp", "k", "y")
REQUIRED_KEYS = ("S", "f", "k", "y")


class GridSpec(BaseModel):
    """
    Benchmark configuration grid, parameterised on output size y: each configuration runs
    an h = w = y + k - 1 input. Without an fp list the output planes follow f.
    """

    model_config = ConfigDict(frozen=True)

    S: list[int]
    f: list[int]
    k: list[int]
    y: list[int]
    fp: list[int] | None = None

    @model_validator(mode="after")
    def _check(self):
        for key in GRID_KEYS:
            values = getattr(self, key)
            if values is None:
                continue
            if not values:
                raise GridParseError(f"grid dimension {key} has no values")
            if min(values) < 1:
                raise GridParseError(f"grid dimension {key} has values below 1: {values}")
        return self

    def problems(self) -> list[ConvProblem]:
        out = []
        for S, f, k, y in itertools.product(self.S, self.f, self.k, self.y):
            for fp in (self.fp if self.fp is not None else [f]):
                out.append(ConvProblem.from_output_size(S=S, f=f, fp=fp, y=y, k=k))
        return out

    def __len__(self) -> int:
        return len(self.problems())


def parse_grid(text: str) -> GridSpec:
    """Parse `key = v1, v2, ...` lines such as `k = 3, 9`; blank lines and `#` comments are ignored."""
    values = {}
    for number, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, rest = line.partition("=")
        key = key.strip()
        if not sep:
            raise GridParseError(f"line {number}: expected 'key = values', got {raw!r}")
        if key not in GRID_KEYS:
            raise GridParseError(f"line {number}: unknown grid key {key!r}")
        if key in values:
            raise GridParseError(f"line {number}: duplicate grid key {key!r}")
        try:
            values[key] = [int(v) for v in rest.split(",") if v.strip()]
        except ValueError:
            raise GridParseError(f"line {number}: values must be integers, got {rest.strip()!r}")
    missing = [key for key in REQUIRED_KEYS if key not in values]
    if missing:
        raise GridParseError(f"grid is missing {', '.join(missing)}")
    return GridSpec(**values)


def load_grid(path) -> GridSpec:
    with open(path, "r", encoding="utf-8") as f:
        return parse_grid(f.read())


def layer_problems(layers: dict = DESK_LAYERS) -> list[ConvProblem]:
    """Square problems of a layer table; entries without S run at the reported batch size."""
    return [ConvProblem(S=spec.get("S", REPORTED_BATCH), f=spec["f"], fp=spec["fp"], h=spec["h"], w=spec["h"],
                        k_h=spec["k"], k_w=spec["k"])
            for spec in layers.values()]
