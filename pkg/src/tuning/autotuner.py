import itertools
import logging
from dataclasses import dataclass, field

import numpy as np
from pydantic import BaseModel, ConfigDict, model_validator

from src.config.settings import DEFAULT_SEED, TIMING_REPEATS
from src.conv.buffers import WorkBuffers
from src.conv.direct import run_direct_pass
from src.conv.engine import build_plan, run_fft_pass, tolerance
from src.conv.models import ConvPass, ConvPlan, ConvProblem, FftPath, GemmStrategy
from src.conv.tiling import TILED_PASSES, best_tile, tile_specs
from src.errors import DimensionError, FFTConvError, VerificationError
from src.fft.fft1d import is_power_of_two
from src.tensor.tensor import RealTensor4
from src.tuning.measure import max_rel_error, measure_median
from src.tuning.plan_cache import PlanCache
from src.tuning.sizes import is_smooth, next_pow2, smooth_sizes

logger = logging.getLogger(__name__)


def operand_dims(problem: ConvProblem, conv_pass: ConvPass) -> tuple[tuple, tuple]:
    """Shapes of the two inputs of a pass: (x, wgt), (gy, wgt) or (gy, x)."""
    p = problem
    x = (p.S, p.f, p.h, p.w)
    wgt = (p.fp, p.f, p.k_h, p.k_w)
    gy = (p.S, p.fp, p.out_h, p.out_w)
    return {
        ConvPass.FPROP: (x, wgt),
        ConvPass.BPROP: (gy, wgt),
        ConvPass.ACCGRAD: (gy, x),
    }[ConvPass(conv_pass)]


def random_operands(problem: ConvProblem, conv_pass: ConvPass,
                    rng: np.random.Generator) -> tuple[RealTensor4, RealTensor4]:
    first, second = operand_dims(problem, conv_pass)
    return RealTensor4(rng.standard_normal(first)), RealTensor4(rng.standard_normal(second))


def execute(plan: ConvPlan, first: RealTensor4, second: RealTensor4, buffers: WorkBuffers) -> RealTensor4:
    """Run a plan for its pass, through the tiled passes when the plan carries a tiling."""
    if plan.tiling is not None:
        return TILED_PASSES[plan.conv_pass](first, second, plan, buffers)
    return run_fft_pass(plan, first, second, buffers)


class CandidateSet(BaseModel):
    """Search space of one (problem, pass): interpolation sizes x paths x gemm strategies x tilings."""

    model_config = ConfigDict(frozen=True)

    problem: ConvProblem
    conv_pass: ConvPass
    sizes: list[tuple[int, int]]
    paths: list[FftPath]
    gemm_strategies: list[GemmStrategy]
    tile_options: list[tuple[int, int] | None]

    @model_validator(mode="after")
    def _check(self):
        need_h, need_w = self.problem.padded_h, self.problem.padded_w
        for n_h, n_w in self.sizes:
            for n, need in ((n_h, need_h), (n_w, need_w)):
                if not need <= n <= next_pow2(need):
                    raise DimensionError(f"size {n} outside [{need}, {next_pow2(need)}]")
                if not (is_smooth(n) or is_power_of_two(n)):
                    raise DimensionError(f"size {n} is not 7-smooth")
        return self

    def plans(self) -> list[ConvPlan]:
        """Every runnable plan; the radix-2 path is kept only for power-of-two sizes."""
        out = []
        for tiles in self.tile_options:
            for path in self.paths:
                if tiles is None:
                    sizes = [s for s in self.sizes
                             if path != FftPath.RADIX2_ELIDED or all(is_power_of_two(n) for n in s)]
                    tiling = None
                else:
                    tiling = tile_specs(self.problem, self.conv_pass, *tiles)
                    sizes = [(None, None)]
                for (n_h, n_w), gemm in itertools.product(sizes, self.gemm_strategies):
                    out.append(build_plan(self.problem, self.conv_pass, path, n_h=n_h, n_w=n_w,
                                          gemm_strategy=gemm, tiling=tiling))
        return out


def candidates(problem: ConvProblem, conv_pass: ConvPass,
               gemm_strategies=tuple(GemmStrategy)) -> CandidateSet:
    sizes = list(itertools.product(smooth_sizes(problem.padded_h), smooth_sizes(problem.padded_w)))
    paths = [FftPath.SMOOTH_NATURAL]
    if any(is_power_of_two(n_h) and is_power_of_two(n_w) for n_h, n_w in sizes):
        paths.insert(0, FftPath.RADIX2_ELIDED)
    rows, cols = tile_specs(problem, conv_pass, 1, 1)
    tile = (best_tile(rows.n, rows.w), best_tile(cols.n, cols.w))
    tile_options = [None]
    if tile[0] < rows.out_len or tile[1] < cols.out_len:
        tile_options.append(tile)
    return CandidateSet(problem=problem, conv_pass=conv_pass, sizes=sizes, paths=paths,
                        gemm_strategies=list(gemm_strategies), tile_options=tile_options)


@dataclass
class TuneReport:
    plan: ConvPlan
    time_us: float
    cached: bool
    # (plan, median us); None marks a candidate that failed its probe check
    timings: list[tuple[ConvPlan, float | None]] = field(default_factory=list)


class Autotuner:
    """
    Measures every candidate of a (problem, pass) on synthetic data and keeps the fastest.
    Each candidate first runs on a one-plane probe of the same geometry and must match the
    direct pass within engine tolerance. Winners go into the plan cache; a cached key is
    returned without measuring.
    """

    def __init__(self, cache: PlanCache | None = None, budget: int = TIMING_REPEATS, seed: int = DEFAULT_SEED,
                 gemm_strategies=tuple(GemmStrategy)):
        if budget < 1:
            raise DimensionError(f"budget must be at least one timed run, got {budget}")
        self.cache = cache if cache is not None else PlanCache()
        self.budget = budget
        self.seed = seed
        self.gemm_strategies = tuple(gemm_strategies)
        self.measurements = 0

    def tune(self, problem: ConvProblem, conv_pass: ConvPass, budget: int | None = None) -> ConvPlan:
        return self.tune_with_report(problem, conv_pass, budget).plan

    def tune_with_report(self, problem: ConvProblem, conv_pass: ConvPass, budget: int | None = None) -> TuneReport:
        conv_pass = ConvPass(conv_pass)
        with self.cache.key_lock(problem, conv_pass):
            hit = self.cache.get(problem, conv_pass)
            if hit is not None:
                logger.info(f"Plan cache hit for {conv_pass.value} {problem.key()}: {hit.plan.summary()}")
                return TuneReport(plan=hit.plan, time_us=hit.time_us, cached=True)
            report = self._search(problem, conv_pass, budget or self.budget)
            self.cache.put(report.plan, report.time_us)
            return report

    def _probe_ok(self, plan: ConvPlan) -> bool:
        probe = plan.problem.model_copy(update={"S": 1, "f": 1, "fp": 1})
        probe_plan = plan.model_copy(update={"problem": probe})
        first, second = random_operands(probe, plan.conv_pass, np.random.default_rng(self.seed))
        try:
            got = execute(probe_plan, first, second, WorkBuffers())
        except FFTConvError as e:
            logger.warning(f"Candidate {plan.summary()} failed on probe: {e}")
            return False
        err = max_rel_error(got, run_direct_pass(probe, plan.conv_pass, first, second))
        if err > tolerance(plan):
            logger.warning(f"Candidate {plan.summary()} rejected, probe error {err:.3e}")
            return False
        return True

    def _search(self, problem: ConvProblem, conv_pass: ConvPass, budget: int) -> TuneReport:
        plans = candidates(problem, conv_pass, self.gemm_strategies).plans()
        logger.info(f"Tuning {conv_pass.value} {problem.key()} over {len(plans)} candidates")
        first, second = random_operands(problem, conv_pass, np.random.default_rng(self.seed))
        buffers = WorkBuffers()
        timings = []
        for plan in plans:
            if not self._probe_ok(plan):
                timings.append((plan, None))
                continue
            elapsed = measure_median(lambda: execute(plan, first, second, buffers), budget)
            self.measurements += 1
            timings.append((plan, elapsed))
        valid = [(plan, t) for plan, t in timings if t is not None]
        if not valid:
            raise VerificationError(f"no candidate for {conv_pass.value} {problem.key()} passed its probe")
        best, best_time = min(valid, key=lambda item: item[1])
        logger.info(f"Chose {best.summary()} at {best_time:.1f} us")
        return TuneReport(plan=best, time_us=best_time, cached=False, timings=timings)
