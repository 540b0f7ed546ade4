import numpy as np

from .helpers import TraceEstimationError


class KahanAccumulator:
    """
    Streaming compensated sum of samples and of their squares.
    """

    def __init__(self):
        self.count: int = 0
        self._sum: float = 0.0
        self._sum_c: float = 0.0
        self._sq: float = 0.0
        self._sq_c: float = 0.0

    def add(self, x: float) -> None:
        # Same operation order as kahan_rows so both paths agree bit for bit
        y = x - self._sum_c
        t = self._sum + y
        self._sum_c = (t - self._sum) - y
        self._sum = t

        y = x * x - self._sq_c
        t = self._sq + y
        self._sq_c = (t - self._sq) - y
        self._sq = t

        self.count += 1

    @property
    def total(self) -> float:
        return self._sum

    @property
    def mean(self) -> float:
        if self.count == 0:
            raise IndexError("Accumulator is empty")
        return self._sum / self.count

    @property
    def mean_of_squares(self) -> float:
        if self.count == 0:
            raise IndexError("Accumulator is empty")
        return self._sq / self.count

    @property
    def sample_variance(self) -> float:
        """Unbiased per-sample variance; 0 for a single sample."""
        if self.count < 2:
            return 0.0
        m = self.mean
        return max(0.0, (self._sq - self.count * m * m) / (self.count - 1))


def kahan_rows(values: np.ndarray, stop: int) -> np.ndarray:
    """
    Compensated sum of values[:, :stop] along each row, in column order.
    """
    values = np.asarray(values, dtype=np.float64)
    total = np.zeros(values.shape[0])
    comp = np.zeros(values.shape[0])
    for k in range(stop):
        y = values[:, k] - comp
        t = total + y
        comp = (t - total) - y
        total = t
    return total


class SampleBuffer:
    """
    Dynamically resizing buffer of Rayleigh samples implemented over a numpy array.
    Fixed num_trials rows, expanding num_samples columns.
    """

    MAX_NUM_SAMPLES = 2**24

    def __init__(self, num_trials: int, initial_num_samples: int = 64):
        # Number of rows is fixed, one per trial
        self.num_trials: int = num_trials

        # Data stored here
        self.data = np.zeros((num_trials, initial_num_samples))

        # Number of columns filled so far, identical for every trial
        self.count: int = 0

    def capacity(self) -> int:
        return self.data.shape[1]

    def size(self) -> int:
        return self.count

    def empty(self) -> bool:
        return self.count == 0

    def resize(self, at_least: int) -> None:
        "Double size until at_least columns fit"
        new_capacity = self.capacity()
        while new_capacity < at_least:
            new_capacity *= 2
        if new_capacity > self.MAX_NUM_SAMPLES:
            raise MaxSizeExceededError(f"Buffer of {self.size()} samples required resize that would exceed "
                                       f"MAX_NUM_SAMPLES: {self.MAX_NUM_SAMPLES}")
        new_data = np.zeros((self.num_trials, new_capacity))
        new_data[:, :self.count] = self.data[:, :self.count]
        self.data = new_data

    def extend(self, block: np.ndarray) -> None:
        """Append a (num_trials x k) block of new samples."""
        block = np.asarray(block, dtype=np.float64)
        if block.ndim != 2 or block.shape[0] != self.num_trials:
            raise ValueError(f"Expected a block with {self.num_trials} rows but received shape {block.shape}")
        k = block.shape[1]
        if self.count + k > self.capacity():
            self.resize(self.count + k)
        self.data[:, self.count:self.count + k] = block
        self.count += k

    def means(self, num_samples: int) -> np.ndarray:
        """Per-trial compensated mean of the first num_samples samples."""
        if not 1 <= num_samples <= self.count:
            raise IndexError(f"Requested {num_samples} samples but buffer holds {self.count}")
        return kahan_rows(self.data, num_samples) / num_samples


class MaxSizeExceededError(TraceEstimationError):
    """Raised if buffer size exceeds MAX_NUM_SAMPLES"""
    pass
