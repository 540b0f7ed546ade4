import math
import time

import numpy as np


class TraceEstimationError(Exception):
    """Base class of every error raised by tracest."""
    pass


def as_vector(v, n: int = None) -> np.ndarray:
    """
    Coerce to a 1D float64 array, optionally checking the length.
    """
    v = np.asarray(v, dtype=np.float64)
    if v.ndim != 1:
        raise ValueError(f"Expected a 1D vector but received shape {v.shape}")
    if n is not None and v.size != n:
        raise ValueError(f"Expected a vector of length {n} but received {v.size}")
    return v


def snap_to_integer(value: float, rel_tol: float = 1e-9) -> float:
    """
    Snap a float onto the nearest integer when it is within rounding noise of it,
    so that ceil/floor of e.g. 6*ln(e)*4 gives 24 and not 25.
    """
    nearest = round(value)
    if abs(value - nearest) <= rel_tol * max(1.0, abs(value)):
        return float(nearest)
    return value


def ceil_bound(value: float) -> int:
    """Smallest integer N with N >= value."""
    return max(1, int(math.ceil(snap_to_integer(value))))


def strict_bound(value: float) -> int:
    """Smallest integer N with N > value."""
    return max(1, int(math.floor(snap_to_integer(value))) + 1)


class Timer:
    def __init__(self):
        self.start_time = time.perf_counter_ns()

    @property
    def elapsed_ms(self) -> float:
        return ns2ms(time.perf_counter_ns() - self.start_time)


def ns2ms(nsecs: float) -> float:
    return nsecs / 1E6
