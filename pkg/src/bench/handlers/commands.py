import argparse
import logging

import numpy as np

from src.config.layers import REPRESENTATIVE_LAYERS
from src.config.settings import (DEFAULT_GRID, DEFAULT_SEED, GRID_DIMENSIONS, PLAN_CACHE_PATH, TIMING_REPEATS,
                                 VERIFY_TRIALS, WORKERS)
from src.bench.utils.calculations import speedup, tred_per_s
from src.bench.utils.grid import GridSpec, layer_problems, load_grid
from src.bench.utils.reporting import BenchRecord, write_csv
from src.conv.buffers import WorkBuffers
from src.conv.direct import run_direct_pass
from src.conv.engine import build_plan, theoretical_flops, tolerance
from src.conv.models import ConvPass, ConvPlan, ConvProblem, FftPath
from src.conv.tiling import best_tile, tile_specs
from src.errors import DimensionError, TensorFormatError
from src.fft.rfft import irfft2d_batched, rfft2d_batched, rfft_plan
from src.tensor.golden import read_tensor, write_tensor
from src.tensor.tensor import FreqTensor, RealTensor4
from src.tuning.autotuner import Autotuner, execute, random_operands
from src.tuning.measure import max_rel_error, measure_median
from src.tuning.plan_cache import load_cache, save_cache
from src.tuning.sizes import smooth_sizes

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_VERIFY_FAILED = 1
EXIT_USAGE = 2

# verify trials run before a benchmark unless --force
GATE_TRIALS = 3


def positive_int(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}")
    if value < 1:
        raise argparse.ArgumentTypeError(f"must be at least 1, got {value}")
    return value


def tiled_plan(problem: ConvProblem, conv_pass: ConvPass, fft_path: FftPath = FftPath.SMOOTH_NATURAL) -> ConvPlan:
    """Plan with the cost-model tile size on both axes."""
    rows, cols = tile_specs(problem, conv_pass, 1, 1)
    tiling = tile_specs(problem, conv_pass, best_tile(rows.n, rows.w), best_tile(cols.n, cols.w))
    return build_plan(problem, conv_pass, fft_path, tiling=tiling)


def _random_problem(rng: np.random.Generator) -> ConvProblem:
    h, w = (int(v) for v in rng.integers(4, 17, size=2))
    k = int(rng.choice([k for k in (1, 2, 3, 5) if k <= min(h, w)]))
    pad = int(rng.integers(0, 2)) * (k // 2)
    S, f, fp = (int(v) for v in rng.choice([1, 2, 4], size=3))
    return ConvProblem(S=S, f=f, fp=fp, h=h, w=w, k_h=k, k_w=k, p_h=pad, p_w=pad)


def _verify_plans(problem: ConvProblem, conv_pass: ConvPass, rng: np.random.Generator) -> list[ConvPlan]:
    plans = []
    for path in FftPath:
        plans.append(build_plan(problem, conv_pass, path))
        rows, cols = tile_specs(problem, conv_pass, 1, 1)
        tiling = tile_specs(problem, conv_pass, int(rng.integers(1, rows.out_len + 1)),
                            int(rng.integers(1, cols.out_len + 1)))
        plans.append(build_plan(problem, conv_pass, path, tiling=tiling))
    return plans


def run_verify(seed: int, trials: int) -> tuple[bool, dict[ConvPass, float]]:
    """
    Randomised oracle check: every pass through both FFT paths, untiled and tiled, against
    the direct passes. Returns (all passed, max relative error per pass).
    """
    rng = np.random.default_rng(seed)
    worst = {conv_pass: 0.0 for conv_pass in ConvPass}
    ok = True
    buffers = WorkBuffers()
    for trial in range(trials):
        problem = _random_problem(rng)
        for conv_pass in ConvPass:
            first, second = random_operands(problem, conv_pass, rng)
            expected = run_direct_pass(problem, conv_pass, first, second)
            for plan in _verify_plans(problem, conv_pass, rng):
                err = max_rel_error(execute(plan, first, second, buffers), expected)
                worst[conv_pass] = max(worst[conv_pass], err)
                if err > tolerance(plan):
                    ok = False
                    logger.error(f"Trial {trial} {conv_pass.value} {problem.key()} {plan.summary()}: "
                                 f"relative error {err:.3e}")
    return ok, worst


def cmd_verify(args) -> int:
    ok, worst = run_verify(args.seed, args.trials)
    for conv_pass, err in worst.items():
        print(f"{conv_pass.value}\tmax_rel_error={err:.3e}")
    print("PASS" if ok else "FAIL")
    return EXIT_OK if ok else EXIT_VERIFY_FAILED


def bench_problem(problem: ConvProblem, repeats: int, seed: int) -> list[BenchRecord]:
    """One record per (pass, method); fft methods are timed on the same data as direct."""
    rng = np.random.default_rng(seed)
    buffers = WorkBuffers()
    records = []
    for conv_pass in ConvPass:
        first, second = random_operands(problem, conv_pass, rng)
        direct_us = measure_median(lambda: run_direct_pass(problem, conv_pass, first, second), repeats)
        records.append(BenchRecord(problem=problem, conv_pass=conv_pass, method="direct", time_us=direct_us,
                                   speedup_vs_direct=1.0, tred_per_s=tred_per_s(problem, direct_us)))
        plans = {
            "fft_radix2": build_plan(problem, conv_pass, FftPath.RADIX2_ELIDED),
            "fft_smooth": build_plan(problem, conv_pass, FftPath.SMOOTH_NATURAL),
            "fft_tiled": tiled_plan(problem, conv_pass),
        }
        for method, plan in plans.items():
            elapsed = measure_median(lambda: execute(plan, first, second, buffers), repeats)
            records.append(BenchRecord(problem=problem, conv_pass=conv_pass, method=method,
                                       plan_nh=plan.n_h, plan_nw=plan.n_w, time_us=elapsed,
                                       speedup_vs_direct=speedup(direct_us, elapsed),
                                       tred_per_s=tred_per_s(problem, elapsed), plan_summary=plan.summary()))
    return records


def _bench_problems(args) -> list[ConvProblem]:
    if args.preset == "layers":
        return layer_problems()
    if args.preset == "layers-full":
        return layer_problems(REPRESENTATIVE_LAYERS)
    if args.preset == "full":
        return GridSpec(**GRID_DIMENSIONS).problems()
    grid = load_grid(args.grid) if args.grid else GridSpec(**DEFAULT_GRID)
    return grid.problems()


def cmd_bench(args) -> int:
    problems = _bench_problems(args)
    if not args.force:
        ok, _ = run_verify(args.seed, GATE_TRIALS)
        if not ok:
            logger.error("Verification failed, refusing to benchmark (use --force to override)")
            return EXIT_VERIFY_FAILED
    records = []
    for number, problem in enumerate(problems, start=1):
        logger.info(f"Benchmarking {number}/{len(problems)}: {problem.key()}")
        records.extend(bench_problem(problem, args.repeats, args.seed))
    try:
        write_csv(records, args.out, WORKERS)
    except OSError as e:
        logger.error(f"Cannot write report to {args.out}: {e}")
        return EXIT_USAGE
    print(f"wrote {len(records)} rows to {args.out}")
    return EXIT_OK


def _tile_label(plan: ConvPlan) -> str:
    return "-" if plan.tiling is None else f"{plan.tiling[0].d}x{plan.tiling[1].d}"


def cmd_plan(args) -> int:
    problem = ConvProblem(S=args.S, f=args.f, fp=args.fp or args.f, h=args.h, w=args.w or args.h,
                          k_h=args.k, k_w=args.k, p_h=args.pad, p_w=args.pad)
    conv_pass = ConvPass(args.conv_pass)
    cache = load_cache(args.cache)
    report = Autotuner(cache, budget=args.repeats, seed=args.seed).tune_with_report(problem, conv_pass)
    if report.cached:
        print(f"cached\t{report.plan.summary()}\t{report.time_us:.1f} us")
        return EXIT_OK

    print(f"candidate sizes: h {smooth_sizes(problem.padded_h)} w {smooth_sizes(problem.padded_w)}")
    print("n_h\tn_w\tpath\tgemm\ttile\ttime_us")
    for plan, elapsed in report.timings:
        shown = "rejected" if elapsed is None else f"{elapsed:.1f}"
        print(f"{plan.n_h}\t{plan.n_w}\t{plan.fft_path.value}\t{plan.gemm_strategy.value}\t"
              f"{_tile_label(plan)}\t{shown}")
    fft_cost, direct_cost = theoretical_flops(report.plan)
    print(f"winner\t{report.plan.summary()}\t{report.time_us:.1f} us")
    print(f"model\tfft={fft_cost:.3g}\tdirect={direct_cost:.3g}")
    save_cache(cache, args.cache)
    return EXIT_OK


def cmd_fft(args) -> int:
    t = read_tensor(args.input)
    if args.direction == "forward":
        if not isinstance(t, RealTensor4):
            raise TensorFormatError(f"{args.input} holds a spectrum, forward needs a real tensor")
        _, _, H, W = t.dims
        plan = rfft_plan(args.nh or smooth_sizes(H)[0], args.nw or smooth_sizes(W)[0],
                         elide_bit_reversal=args.elide)
        write_tensor(rfft2d_batched(t, plan), args.output)
    else:
        if not isinstance(t, FreqTensor):
            raise TensorFormatError(f"{args.input} holds a real tensor, inverse needs a spectrum")
        _, _, H, stored_w = t.dims
        # n_w is not recoverable from the stored bins: 2m - 2 and 2m - 1 both store m
        if args.nw is None:
            raise DimensionError("inverse needs --nw, the width the spectrum was taken at")
        if args.nw // 2 + 1 != stored_w:
            raise DimensionError(f"--nw {args.nw} stores {args.nw // 2 + 1} bins, spectrum has {stored_w}")
        plan = rfft_plan(args.nh or H, args.nw, elide_bit_reversal=args.elide)
        spectrum = FreqTensor(t.data, order=plan.column_order)
        write_tensor(irfft2d_batched(spectrum, plan, args.out_h or plan.n_h, args.out_w or plan.n_w),
                     args.output)
    logger.info(f"Wrote {args.direction} transform of {args.input} to {args.output}")
    return EXIT_OK


def register_commands(subparsers) -> None:
    """Attach verify, bench, plan and fft subcommands; each sets `handler`."""
    verify = subparsers.add_parser("verify", help="check every FFT path against the direct passes")
    verify.add_argument("--seed", type=int, default=DEFAULT_SEED)
    verify.add_argument("--trials", type=positive_int, default=VERIFY_TRIALS)
    verify.set_defaults(handler=cmd_verify)

    bench = subparsers.add_parser("bench", help="time direct and FFT passes over a configuration grid")
    bench.add_argument("--grid", help="grid file of 'key = v1, v2' lines")
    bench.add_argument("--preset", choices=["layers", "layers-full", "full"],
                       help="desk-scale layers, layers at reported scale, or the full evaluation grid")
    bench.add_argument("--out", required=True)
    bench.add_argument("--seed", type=int, default=DEFAULT_SEED)
    bench.add_argument("--repeats", type=positive_int, default=TIMING_REPEATS)
    bench.add_argument("--force", action="store_true", help="skip the verification gate")
    bench.set_defaults(handler=cmd_bench)

    plan = subparsers.add_parser("plan", help="autotune one problem and print the candidates")
    plan.add_argument("--S", type=positive_int, default=1)
    plan.add_argument("--f", type=positive_int, default=1)
    plan.add_argument("--fp", type=positive_int)
    plan.add_argument("--h", type=positive_int, required=True)
    plan.add_argument("--w", type=positive_int)
    plan.add_argument("--k", type=positive_int, required=True)
    plan.add_argument("--pad", type=int, default=0)
    plan.add_argument("--pass", dest="conv_pass", choices=[p.value for p in ConvPass], default="fprop")
    plan.add_argument("--cache", default=PLAN_CACHE_PATH)
    plan.add_argument("--seed", type=int, default=DEFAULT_SEED)
    plan.add_argument("--repeats", type=positive_int, default=TIMING_REPEATS)
    plan.set_defaults(handler=cmd_plan)

    fft = subparsers.add_parser("fft", help="2-D real transform of a tensor file")
    fft.add_argument("--input", required=True)
    fft.add_argument("--output", required=True)
    fft.add_argument("--direction", choices=["forward", "inverse"], default="forward")
    fft.add_argument("--nh", type=positive_int)
    fft.add_argument("--nw", type=positive_int, help="transform width; required for inverse")
    fft.add_argument("--out-h", type=positive_int)
    fft.add_argument("--out-w", type=positive_int)
    fft.add_argument("--elide", action="store_true", help="DIF columns, bit-reversed spectrum")
    fft.set_defaults(handler=cmd_fft)
