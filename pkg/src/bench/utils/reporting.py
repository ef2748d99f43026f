import csv
import logging
import os

from pydantic import BaseModel, ConfigDict, model_validator

from src.config.settings import BENCH_METHODS, CSV_COLUMNS
from src.conv.models import ConvPass, ConvProblem
from src.errors import DimensionError

logger = logging.getLogger(__name__)


class BenchRecord(BaseModel):
    model_config = ConfigDict(frozen=True)

    problem: ConvProblem
    conv_pass: ConvPass
    method: str
    plan_nh: int = 0  # 0 for direct
    plan_nw: int = 0
    time_us: float
    speedup_vs_direct: float
    tred_per_s: float
    plan_summary: str = ""

    @model_validator(mode="after")
    def _check(self):
        if self.method not in BENCH_METHODS:
            raise DimensionError(f"unknown method {self.method!r}")
        if not (self.time_us > 0 and self.tred_per_s > 0):
            raise DimensionError(f"non-positive timing for {self.method}: {self.time_us} us")
        return self

    def row(self) -> dict:
        p = self.problem
        return {
            "S": p.S, "f": p.f, "fp": p.fp, "h": p.h, "w": p.w, "kh": p.k_h, "kw": p.k_w,
            "pass": self.conv_pass.value, "method": self.method,
            "plan_nh": self.plan_nh, "plan_nw": self.plan_nw,
            "time_us": repr(self.time_us), "speedup_vs_direct": repr(self.speedup_vs_direct),
            "tred_per_s": repr(self.tred_per_s), "problem_size": p.problem_size,
        }


def write_csv(records: list[BenchRecord], path, workers: int) -> None:
    """CSV report; `#` lines ahead of the column header describe the run."""
    directory = os.path.dirname(os.fspath(path))
    if directory:
        os.makedirs(directory, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as f:
        f.write(f"# workers: {workers}\n")
        f.write("# speedup_vs_direct: direct time / method time on the same machine and data\n")
        f.write("# tred_per_s: direct multiply-add count / method time in seconds\n")
        writer = csv.DictWriter(f, fieldnames=CSV_COLUMNS, lineterminator="\n")
        writer.writeheader()
        for record in records:
            writer.writerow(record.row())
    logger.info(f"Wrote {len(records)} rows to {path}")


def read_csv(path) -> list[dict]:
    with open(path, "r", encoding="utf-8", newline="") as f:
        lines = [line for line in f if not line.startswith("#")]
    return list(csv.DictReader(lines))
