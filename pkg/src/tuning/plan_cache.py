import logging
import os
import threading
from dataclasses import dataclass

from src.config.settings import PLAN_CACHE_HEADER
from src.conv.models import ConvPass, ConvPlan, ConvProblem, FftPath, GemmStrategy
from src.conv.tiling import tile_specs
from src.errors import CacheParseError, FFTConvError

logger = logging.getLogger(__name__)

COLUMNS = ("pass", "S", "f", "fp", "h", "w", "kh", "kw", "ph", "pw",
           "n_h", "n_w", "fft_path", "gemm", "tile_h", "tile_w", "buffer_bytes", "time_us")


@dataclass(frozen=True)
class CacheEntry:
    plan: ConvPlan
    time_us: float


def cache_key(problem: ConvProblem, conv_pass: ConvPass) -> tuple:
    return problem.key() + (ConvPass(conv_pass).value,)


class PlanCache:
    """
    Fastest measured plan per (problem, pass).
    Reads are plain dict lookups; writes take the cache lock, and key_lock() hands out one
    lock per key so that a key is tuned at most once at a time.
    """

    def __init__(self):
        self._entries: dict[tuple, CacheEntry] = {}
        self._lock = threading.Lock()
        self._key_locks: dict[tuple, threading.Lock] = {}

    def get(self, problem: ConvProblem, conv_pass: ConvPass) -> CacheEntry | None:
        return self._entries.get(cache_key(problem, conv_pass))

    def put(self, plan: ConvPlan, time_us: float) -> None:
        with self._lock:
            self._entries[cache_key(plan.problem, plan.conv_pass)] = CacheEntry(plan, float(time_us))

    def key_lock(self, problem: ConvProblem, conv_pass: ConvPass) -> threading.Lock:
        with self._lock:
            return self._key_locks.setdefault(cache_key(problem, conv_pass), threading.Lock())

    def entries(self) -> list[CacheEntry]:
        return list(self._entries.values())

    def __len__(self) -> int:
        return len(self._entries)

    def __contains__(self, key) -> bool:
        return key in self._entries


def _format_entry(entry: CacheEntry) -> str:
    plan, p = entry.plan, entry.plan.problem
    tile_h, tile_w = (0, 0) if plan.tiling is None else (plan.tiling[0].d, plan.tiling[1].d)
    fields = [plan.conv_pass.value, p.S, p.f, p.fp, p.h, p.w, p.k_h, p.k_w, p.p_h, p.p_w,
              plan.n_h, plan.n_w, plan.fft_path.value, plan.gemm_strategy.value,
              tile_h, tile_w, plan.buffer_bytes, repr(entry.time_us)]
    return "\t".join(str(field) for field in fields)


def _parse_entry(line: str, line_number: int) -> CacheEntry:
    fields = line.split("\t")
    if len(fields) != len(COLUMNS):
        raise CacheParseError(line_number, f"expected {len(COLUMNS)} fields, got {len(fields)}")
    row = dict(zip(COLUMNS, fields))
    try:
        conv_pass = ConvPass(row["pass"])
        ints = {name: int(row[name]) for name in COLUMNS[1:12] + ("tile_h", "tile_w", "buffer_bytes")}
        problem = ConvProblem(S=ints["S"], f=ints["f"], fp=ints["fp"], h=ints["h"], w=ints["w"],
                              k_h=ints["kh"], k_w=ints["kw"], p_h=ints["ph"], p_w=ints["pw"])
        tiling = None
        if ints["tile_h"] or ints["tile_w"]:
            tiling = tile_specs(problem, conv_pass, ints["tile_h"], ints["tile_w"])
        plan = ConvPlan(problem=problem, conv_pass=conv_pass, n_h=ints["n_h"], n_w=ints["n_w"],
                        fft_path=FftPath(row["fft_path"]), gemm_strategy=GemmStrategy(row["gemm"]),
                        tiling=tiling, buffer_bytes=ints["buffer_bytes"])
        time_us = float(row["time_us"])
    except (ValueError, FFTConvError) as e:
        raise CacheParseError(line_number, str(e)) from e
    return CacheEntry(plan, time_us)


def load_cache(path) -> PlanCache:
    """Read a plan cache file; a missing file is an empty cache."""
    cache = PlanCache()
    if not os.path.exists(path):
        logger.info(f"No plan cache at {path}, starting empty")
        return cache
    with open(path, "r", encoding="utf-8", newline="\n") as f:
        lines = f.read().split("\n")
    if not lines or lines[0] != PLAN_CACHE_HEADER:
        raise CacheParseError(1, f"expected header {PLAN_CACHE_HEADER!r}")
    for number, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        entry = _parse_entry(line, number)
        cache.put(entry.plan, entry.time_us)
    logger.info(f"Loaded {len(cache)} cached plans from {path}")
    return cache


def save_cache(cache: PlanCache, path) -> None:
    directory = os.path.dirname(os.fspath(path))
    if directory:
        os.makedirs(directory, exist_ok=True)
    lines = [PLAN_CACHE_HEADER] + [_format_entry(entry) for entry in cache.entries()]
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        f.write("\n".join(lines) + "\n")
    logger.info(f"Saved {len(cache)} plans to {path}")
