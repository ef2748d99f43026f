from src.conv.direct import flop_count
from src.conv.models import ConvProblem


def tred_per_s(problem: ConvProblem, time_us: float) -> float:
    """
    Equivalent time-domain reductions per second: the direct method's multiply-add count
    divided by the measured time, whatever method was timed.
    """
    return flop_count(problem) / (time_us / 1e6)


def speedup(direct_us: float, method_us: float) -> float:
    return direct_us / method_us
