"""
estimator.py
The Monte-Carlo trace estimator: the mean of N Rayleigh samples w^t A w.
"""

from dataclasses import dataclass

import numpy as np

from .accumulator import KahanAccumulator
from .helpers import TraceEstimationError
from .kinds import Method
from .linop import DimensionError, ImplicitOperator
from .sampler import ExhaustedError, SeededStream


@dataclass(frozen=True)
class TraceEstimate:
    value: float
    samples_used: int
    sample_mean_of_squares: float
    method: Method

    @property
    def sample_variance(self) -> float:
        """Biased (1/N) per-sample variance from the stored moments."""
        return max(0.0, self.sample_mean_of_squares - self.value * self.value)

    def relative_error(self, trace: float) -> float:
        if trace == 0:
            return float("inf") if self.value != 0 else 0.0
        return abs(self.value - trace) / abs(trace)


def rayleigh_sample(op: ImplicitOperator, w) -> float:
    """w^t (A w) for a finite probe w of length n."""
    w = np.asarray(w, dtype=np.float64)
    if w.ndim != 1 or w.size != op.dim:
        raise DimensionError(f"Probe of shape {w.shape} does not match operator dimension {op.dim}")
    return float(w @ op.matvec(w))


def unit_rayleigh_sample(op: ImplicitOperator, j: int) -> float:
    """
    n * a_jj for the probe sqrt(n) e_j, taken from one matvec with e_j so no
    rounding from sqrt(n)^2 enters.
    """
    e = np.zeros(op.dim)
    e[j] = 1.0
    return op.dim * float(op.matvec(e)[j])


def rayleigh_at(op: ImplicitOperator, method: Method, stream: SeededStream, k: int) -> float:
    """The k-th Rayleigh sample of a stream, without touching its counter."""
    if method.is_unit:
        return unit_rayleigh_sample(op, stream.unit_index_at(method, op.dim, k))
    return rayleigh_sample(op, stream.probe_at(method, op.dim, k))


def rayleigh_block(op: ImplicitOperator, method: Method, stream: SeededStream,
                   start: int, stop: int) -> np.ndarray:
    """Rayleigh samples start..stop-1 of a stream."""
    out = np.empty(stop - start)
    for i, k in enumerate(range(start, stop)):
        out[i] = rayleigh_at(op, method, stream, k)
    if not np.all(np.isfinite(out)):
        raise NonFiniteSampleError(f"Non-finite sample among draws {start}..{stop - 1}")
    return out


def estimate_trace(op: ImplicitOperator, method: Method, num_samples: int,
                   stream: SeededStream) -> TraceEstimate:
    """
    tr_D^N(A) = (1/N) sum_i w_i^t A w_i with exactly N matvecs, drawing
    sequentially from the stream.
    """
    if num_samples < 1:
        raise ValueError(f"Sample count must be at least 1, but received: {num_samples}")
    if method is Method.UNIT_WITHOUT_REPLACEMENT and num_samples > op.dim:
        raise ExhaustedError(f"Sampling without replacement exhausted: {num_samples} samples requested "
                             f"from only {op.dim} columns")
    acc = KahanAccumulator()
    for _ in range(num_samples):
        if method.is_unit:
            sample = unit_rayleigh_sample(op, stream.next_index(method, op.dim))
        else:
            sample = rayleigh_sample(op, stream.next_probe(method, op.dim))
        if not np.isfinite(sample):
            raise NonFiniteSampleError(f"Non-finite sample {sample} at draw {acc.count + 1}")
        acc.add(sample)
    return TraceEstimate(value=acc.mean, samples_used=acc.count,
                         sample_mean_of_squares=acc.mean_of_squares, method=method)


class NonFiniteSampleError(TraceEstimationError, ArithmeticError):
    """Raised when a Rayleigh sample is NaN or infinite"""
    pass
