"""
harness.py
Monte-Carlo experiments: empirical success probability of the (eps, delta)
guarantee, the minimal-N search, per-trial first-passage sample counts and
figure dispatch.

Trial t draws its probes from spawn_substream(master_seed, t), and the k-th
Rayleigh sample of that trial depends only on (master_seed, t, k). Sample
prefixes are therefore cached per trial and extended in blocks, and the
blocks can be computed by any worker in any order.
"""

import csv
import math
import multiprocessing
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .accumulator import KahanAccumulator, SampleBuffer
from .bounds import TolerancePair
from .estimator import rayleigh_at, rayleigh_block
from .helpers import TraceEstimationError, Timer
from .kinds import Method
from .linop import ImplicitOperator
from .logger import logger
from .sampler import spawn_substream
from .stats import ZeroTraceError

DEFAULT_TRIALS = 500
DEFAULT_N_MAX = 10_000
# Step size is 1 up to here, then a fraction of N
LINEAR_SCAN_LIMIT = 100
STRIDE_FRACTION = 0.05


def wilson_interval(successes: int, trials: int, z: float = 1.96) -> Tuple[float, float]:
    """Wilson score interval for a binomial proportion."""
    if trials < 1:
        raise ValueError(f"Trial count must be at least 1, but received: {trials}")
    p = successes / trials
    z2 = z * z
    denom = 1.0 + z2 / trials
    center = (p + z2 / (2 * trials)) / denom
    half = z * math.sqrt(p * (1 - p) / trials + z2 / (4 * trials * trials)) / denom
    return max(0.0, center - half), min(1.0, center + half)


@dataclass
class ExperimentRecord:
    method: Method
    n: int
    N: int
    trials: int
    successes: int
    eps: float
    delta: float
    seed: int
    wall_time_ms: float = 0.0
    ci_low: float = field(init=False)
    ci_high: float = field(init=False)

    def __post_init__(self):
        if not 0 <= self.successes <= self.trials:
            raise ValueError(f"Success count {self.successes} outside [0, {self.trials}]")
        self.ci_low, self.ci_high = wilson_interval(self.successes, self.trials)

    @property
    def success_prob(self) -> float:
        return self.successes / self.trials

    def meets(self, delta: Optional[float] = None) -> bool:
        """Whether the empirical success probability reaches 1 - delta."""
        delta = self.delta if delta is None else delta
        # Integer comparison against ceil((1 - delta) T) up to float noise
        return self.successes >= (1.0 - delta) * self.trials - 1e-9 * self.trials


@dataclass
class MinSampleResult:
    method: Method
    N_star: Optional[int]
    probe_history: List[ExperimentRecord]
    N_max: int

    @property
    def censored(self) -> bool:
        """True when the criterion was never met up to N_max."""
        return self.N_star is None

    def record_at(self, N: int) -> Optional[ExperimentRecord]:
        for record in self.probe_history:
            if record.N == N:
                return record
        return None


# Each pool process keeps its own reference to the operator so it is pickled once
_worker_op: Optional[ImplicitOperator] = None


def _init_worker(op: ImplicitOperator) -> None:
    global _worker_op
    _worker_op = op


def _sample_rows(task) -> np.ndarray:
    method, master_seed, trial_indices, start, stop = task
    rows = [rayleigh_block(_worker_op, method, spawn_substream(master_seed, t), start, stop)
            for t in trial_indices]
    return np.vstack(rows) if rows else np.zeros((0, stop - start))


def _first_passage_task(task) -> Optional[int]:
    method, master_seed, trial_index, eps, trace, N_max = task
    return first_passage_samples(_worker_op, method, eps, spawn_substream(master_seed, trial_index),
                                 N_max, trace=trace)


class TrialPool:
    """
    Distributes per-trial work over a multiprocessing pool. With workers=1
    everything runs in this process.
    """

    def __init__(self, op: ImplicitOperator, workers: Optional[int] = None):
        self.op = op
        self.workers: int = max(1, workers or os.cpu_count() or 1)
        self._pool = None

    def __enter__(self):
        if self.workers > 1:
            self._pool = multiprocessing.Pool(self.workers, initializer=_init_worker, initargs=(self.op,))
        else:
            _init_worker(self.op)
        return self

    def __exit__(self, *args):
        if self._pool is not None:
            self._pool.close()
            self._pool.join()
            self._pool = None

    def _map(self, fn, tasks: list) -> list:
        if self._pool is None:
            _init_worker(self.op)
            return [fn(task) for task in tasks]
        return self._pool.map(fn, tasks)

    def _chunks(self, trials: int) -> List[range]:
        size = max(1, math.ceil(trials / self.workers))
        return [range(lo, min(lo + size, trials)) for lo in range(0, trials, size)]

    def sample_rows(self, method: Method, master_seed: int, trials: int, start: int, stop: int) -> np.ndarray:
        """(trials x (stop - start)) Rayleigh samples, row t from trial t."""
        tasks = [(method, master_seed, list(chunk), start, stop) for chunk in self._chunks(trials)]
        return np.vstack(self._map(_sample_rows, tasks))

    def first_passages(self, method: Method, master_seed: int, trials: int, eps: float,
                       trace: float, N_max: int) -> List[Optional[int]]:
        tasks = [(method, master_seed, t, eps, trace, N_max) for t in range(trials)]
        return self._map(_first_passage_task, tasks)


class TrialSamples:
    """
    Cached Rayleigh sample prefixes for a fixed (op, method, master_seed, trials),
    grown on demand.
    """

    def __init__(self, pool: TrialPool, method: Method, trials: int, master_seed: int):
        self.pool = pool
        self.method = method
        self.trials = trials
        self.master_seed = master_seed
        self.buffer = SampleBuffer(trials)

    def ensure(self, N: int) -> None:
        have = self.buffer.size()
        if N <= have:
            return
        # Grow at least geometrically so a slow scan does not re-enter the pool per N
        stop = max(N, 2 * have)
        if self.method is Method.UNIT_WITHOUT_REPLACEMENT:
            stop = min(stop, self.pool.op.dim)
        stop = max(stop, N)
        self.buffer.extend(self.pool.sample_rows(self.method, self.master_seed, self.trials, have, stop))

    def estimates(self, N: int) -> np.ndarray:
        self.ensure(N)
        return self.buffer.means(N)


def _nonzero_trace(op: ImplicitOperator, trace: Optional[float]) -> float:
    if trace is None:
        trace = op.exact_trace()
    if trace == 0:
        raise ZeroTraceError("Relative tolerance is undefined for a matrix with zero trace")
    return trace


def _record(samples: TrialSamples, N: int, tol: TolerancePair, trace: float) -> ExperimentRecord:
    timer = Timer()
    estimates = samples.estimates(N)
    successes = int(np.count_nonzero(np.abs(estimates - trace) <= tol.eps * abs(trace)))
    record = ExperimentRecord(method=samples.method, n=samples.pool.op.dim, N=N, trials=samples.trials,
                              successes=successes, eps=tol.eps, delta=tol.delta, seed=samples.master_seed,
                              wall_time_ms=timer.elapsed_ms)
    logger.info(f"{samples.method.value}: N={N} success_prob={record.success_prob:.4f} "
                f"[{record.ci_low:.4f}, {record.ci_high:.4f}]")
    return record


def success_probability(op: ImplicitOperator, method: Method, N: int, tol: TolerancePair,
                        trials: int = DEFAULT_TRIALS, master_seed: int = 0, workers: int = 1,
                        trace: Optional[float] = None, pool: Optional[TrialPool] = None) -> ExperimentRecord:
    """
    Fraction of trials whose N-sample estimate satisfies |tr_N - tr| <= eps |tr|.
    The per-trial estimates are bit-identical to estimate_trace on the trial's substream.
    """
    if trials < 1:
        raise ValueError(f"Trial count must be at least 1, but received: {trials}")
    if N < 1:
        raise ValueError(f"Sample count must be at least 1, but received: {N}")
    trace = _nonzero_trace(op, trace)
    if pool is not None:
        return _record(TrialSamples(pool, method, trials, master_seed), N, tol, trace)
    with TrialPool(op, workers) as own_pool:
        return _record(TrialSamples(own_pool, method, trials, master_seed), N, tol, trace)


def stride_schedule(N_max: int, linear_limit: int = LINEAR_SCAN_LIMIT,
                    fraction: float = STRIDE_FRACTION):
    """1, 2, ..., linear_limit, then N + ceil(fraction N) up to and including N_max."""
    N = 1
    while N < N_max:
        yield N
        N = N + 1 if N < linear_limit else min(N_max, N + math.ceil(fraction * N))
    yield N_max


def min_sample_size(op: ImplicitOperator, method: Method, tol: TolerancePair,
                    trials: int = DEFAULT_TRIALS, master_seed: int = 0, N_max: int = DEFAULT_N_MAX,
                    workers: int = 1, trace: Optional[float] = None,
                    pool: Optional[TrialPool] = None, linear_limit: int = LINEAR_SCAN_LIMIT,
                    stride_fraction: float = STRIDE_FRACTION) -> MinSampleResult:
    """
    Increase N until the empirical success probability reaches 1 - delta. N steps
    by one up to linear_limit, then by ceil(stride_fraction N). After a strided
    step succeeds, bisect back between the last failing and the first succeeding N.
    """
    if N_max < 1:
        raise ValueError(f"N_max must be at least 1, but received: {N_max}")
    if linear_limit < 1:
        raise ValueError(f"linear_limit must be at least 1, but received: {linear_limit}")
    if not stride_fraction > 0:
        raise ValueError(f"stride_fraction must be positive, but received: {stride_fraction}")
    trace = _nonzero_trace(op, trace)
    if method is Method.UNIT_WITHOUT_REPLACEMENT:
        N_max = min(N_max, op.dim)

    def search(active: TrialPool) -> MinSampleResult:
        samples = TrialSamples(active, method, trials, master_seed)
        history: List[ExperimentRecord] = []
        last_fail = 0
        for N in stride_schedule(N_max, linear_limit, stride_fraction):
            record = _record(samples, N, tol, trace)
            history.append(record)
            if not record.meets():
                last_fail = N
                continue
            lo, hi = last_fail, N
            while hi - lo > 1:
                mid = (lo + hi) // 2
                record = _record(samples, mid, tol, trace)
                history.append(record)
                if record.meets():
                    hi = mid
                else:
                    lo = mid
            return MinSampleResult(method=method, N_star=hi, probe_history=history, N_max=N_max)
        logger.warning(f"{method.value}: criterion unmet, censored at N_max={N_max}")
        return MinSampleResult(method=method, N_star=None, probe_history=history, N_max=N_max)

    if pool is not None:
        return search(pool)
    with TrialPool(op, workers) as own_pool:
        return search(own_pool)


def first_passage_samples(op: ImplicitOperator, method: Method, eps: float, stream,
                          N_max: int = DEFAULT_N_MAX, trace: Optional[float] = None) -> Optional[int]:
    """
    The smallest N at which one trial's running estimate first satisfies
    |tr_N - tr| <= eps |tr|, or None if that never happens up to N_max.
    """
    trace = _nonzero_trace(op, trace)
    if method is Method.UNIT_WITHOUT_REPLACEMENT:
        N_max = min(N_max, op.dim)
    acc = KahanAccumulator()
    for k in range(N_max):
        acc.add(rayleigh_at(op, method, stream, k))
        if abs(acc.mean - trace) <= eps * abs(trace):
            return acc.count
    return None


def first_passage_study(op: ImplicitOperator, method: Method, eps: float, trials: int = 100,
                        master_seed: int = 0, N_max: int = DEFAULT_N_MAX, workers: int = 1,
                        pool: Optional[TrialPool] = None) -> List[Optional[int]]:
    """first_passage_samples for trials 0..trials-1, in trial order."""
    trace = _nonzero_trace(op, None)
    if pool is not None:
        return pool.first_passages(method, master_seed, trials, eps, trace, N_max)
    with TrialPool(op, workers) as own_pool:
        return own_pool.first_passages(method, master_seed, trials, eps, trace, N_max)


# Columns of every figure CSV
CSV_FIELDS = ["figure", "method", "n", "rank", "theta_or_param", "N", "trials",
              "successes", "success_prob", "eps", "delta", "seed"]


@dataclass
class FigureRow:
    figure: str
    method: str
    n: Optional[int] = None
    rank: Optional[int] = None
    theta_or_param: Optional[float] = None
    N: Optional[int] = None
    trials: Optional[int] = None
    successes: Optional[int] = None
    success_prob: Optional[float] = None
    eps: Optional[float] = None
    delta: Optional[float] = None
    seed: Optional[int] = None

    @classmethod
    def from_record(cls, figure: str, record: ExperimentRecord, **kwargs) -> "FigureRow":
        return cls(figure=figure, method=record.method.value, n=record.n, N=record.N, trials=record.trials,
                   successes=record.successes, success_prob=record.success_prob, eps=record.eps,
                   delta=record.delta, seed=record.seed, **kwargs)

    def cells(self) -> List[str]:
        return [_cell(getattr(self, name)) for name in CSV_FIELDS]


def _cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    return str(value)


def write_csv(path: Path, rows: Sequence[FigureRow]) -> Path:
    path = Path(path)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(CSV_FIELDS)
        for row in rows:
            writer.writerow(row.cells())
    return path


@dataclass
class FigureOutput:
    figure: str
    csv_path: Path
    svg_path: Path
    rows: List[FigureRow]
    # Headline numbers for the CLI, e.g. per-method mean N
    summary: Dict[str, float] = field(default_factory=dict)


def run_figure(config: Dict, out_dir, workers: int = 1) -> FigureOutput:
    """
    Run one figure. config["figure"] names it; every other key overrides the
    figure's preset.
    """
    from .figures import FIGURES

    figure = config.get("figure")
    if figure not in FIGURES:
        raise UnknownFigureError(f"Unknown figure '{figure}'. Expected one of: {', '.join(FIGURES)}")
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    timer = Timer()
    output = FIGURES[figure](config, out_dir, workers)
    logger.info(f"Wrote figure {figure} to {output.svg_path} and {output.csv_path} "
                f"in {timer.elapsed_ms:.0f} ms")
    return output


class UnknownFigureError(TraceEstimationError, ValueError):
    """Raised when run_figure receives an unknown figure identifier"""
    pass
