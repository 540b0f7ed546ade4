"""
sampler.py
Seeded probe vectors for the four probe distributions.

Every stream is keyed by a 64-bit seed and the k-th draw is produced by a
Philox generator whose counter is placed at k * 2**128, so a draw depends only
on (seed, k) and never on what was consumed before it.
"""

from typing import Dict

import numpy as np

from .helpers import TraceEstimationError
from .kinds import Method

MASK64 = (1 << 64) - 1
GOLDEN_GAMMA = 0x9E3779B97F4A7C15

# Counter slot for the without-replacement permutation; draw indices never reach it
PERMUTATION_SLOT = (1 << 127)


def splitmix64(x: int) -> int:
    """One SplitMix64 output step for state x."""
    z = (x + GOLDEN_GAMMA) & MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


def make_generator(seed: int, slot: int = 0) -> np.random.Generator:
    """Philox generator for (seed, slot); slot selects a disjoint counter range."""
    counter = (int(slot) << 128) & ((1 << 256) - 1)
    return np.random.Generator(np.random.Philox(key=int(seed) & MASK64, counter=counter))


def standard_normals(rng: np.random.Generator, size: int) -> np.ndarray:
    """
    Box-Muller from uniform doubles: first half uses the cosine branch, second
    half the sine branch.
    """
    half = (size + 1) // 2
    u1 = rng.random(half)
    u2 = rng.random(half)
    radius = np.sqrt(-2.0 * np.log1p(-u1))
    angle = 2.0 * np.pi * u2
    return np.concatenate((radius * np.cos(angle), radius * np.sin(angle)))[:size]


def rademacher(rng: np.random.Generator, size: int) -> np.ndarray:
    return np.where(rng.random(size) < 0.5, -1.0, 1.0)


def uniform_index(rng: np.random.Generator, n: int) -> int:
    return min(int(rng.random() * n), n - 1)


class SeededStream:
    """
    A counter-based stream of probes. Each worker owns its own stream; copies
    with the same (seed, counter) produce the same probes.
    """

    def __init__(self, seed: int, counter: int = 0):
        self.seed: int = int(seed) & MASK64
        self.counter: int = int(counter)
        # n -> permutation used by sampling without replacement
        self._permutations: Dict[int, np.ndarray] = {}

    def __repr__(self) -> str:
        return f"SeededStream(seed={self.seed}, counter={self.counter})"

    def __eq__(self, other) -> bool:
        return isinstance(other, SeededStream) and (self.seed, self.counter) == (other.seed, other.counter)

    def __hash__(self) -> int:
        return hash((self.seed, self.counter))

    def copy(self) -> "SeededStream":
        return SeededStream(self.seed, self.counter)

    def permutation(self, n: int) -> np.ndarray:
        """Uniform random permutation of range(n), fixed by the seed."""
        if n not in self._permutations:
            keys = make_generator(self.seed, PERMUTATION_SLOT).random(n)
            perm = np.argsort(keys, kind="stable")
            perm.setflags(write=False)
            self._permutations[n] = perm
        return self._permutations[n]

    def unit_index_at(self, method: Method, n: int, k: int) -> int:
        """Column index j of the k-th unit probe sqrt(n) e_j."""
        if method is Method.UNIT_WITHOUT_REPLACEMENT:
            if k >= n:
                raise ExhaustedError(f"Sampling without replacement exhausted: draw {k + 1} of only {n} columns")
            return int(self.permutation(n)[k])
        if method is Method.UNIT_WITH_REPLACEMENT:
            return uniform_index(make_generator(self.seed, k), n)
        raise ValueError(f"{method} does not draw unit probes")

    def probe_at(self, method: Method, n: int, k: int) -> np.ndarray:
        """The k-th probe vector of this stream. Pure in (seed, k)."""
        if n < 1:
            raise ValueError(f"Probe dimension must be positive, but received: {n}")
        if method.is_unit:
            w = np.zeros(n)
            w[self.unit_index_at(method, n, k)] = np.sqrt(n)
            return w
        rng = make_generator(self.seed, k)
        if method is Method.HUTCHINSON:
            return rademacher(rng, n)
        if method is Method.GAUSSIAN:
            return standard_normals(rng, n)
        raise ValueError(f"Unknown probe distribution: {method}")

    def next_index(self, method: Method, n: int) -> int:
        j = self.unit_index_at(method, n, self.counter)
        self.counter += 1
        return j

    def next_probe(self, method: Method, n: int) -> np.ndarray:
        w = self.probe_at(method, n, self.counter)
        self.counter += 1
        return w


def draw_probe(method: Method, n: int, stream: SeededStream) -> np.ndarray:
    """Draw the next probe from the stream, advancing its counter."""
    return stream.next_probe(method, n)


def spawn_substream(master_seed: int, trial_index: int) -> SeededStream:
    """
    Independent stream for one trial, derived by SplitMix64 mixing of the
    master seed and the trial index.
    """
    mixed = splitmix64(int(master_seed) & MASK64)
    mixed = splitmix64(mixed ^ ((int(trial_index) * GOLDEN_GAMMA) & MASK64))
    return SeededStream(mixed)


class ExhaustedError(TraceEstimationError, ValueError):
    """Raised when sampling without replacement runs out of columns"""
    pass
