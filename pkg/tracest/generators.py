"""
generators.py
Seeded test-matrix families. Each spec is a small dataclass whose generate()
builds the operator; the same (spec, seed) always gives the same operator.
"""

from abc import ABC, abstractmethod
from dataclasses import dataclass, fields, asdict
from typing import ClassVar, Dict, Type

import numpy as np
import scipy.sparse as sp

from .linop import (DiagonalOperator, GramOperator, ImplicitOperator,
                    LowRankOperator, RankOneOperator, RankError)
from .sampler import make_generator, standard_normals


@dataclass
class GeneratorSpec(ABC):
    n: int = 100
    seed: int = 0

    # Name in the family:key=val mini-language
    family: ClassVar[str] = ""

    def __post_init__(self):
        self.n = int(self.n)
        self.seed = int(self.seed)
        if self.n < 1:
            raise ValueError(f"Dimension must be positive, but received: {self.n}")
        self.validate()

    def validate(self) -> None:
        pass

    @abstractmethod
    def generate(self) -> ImplicitOperator:
        pass

    def params(self) -> Dict:
        return asdict(self)

    def describe(self) -> str:
        body = ",".join(f"{k}={v}" for k, v in self.params().items())
        return f"{self.family}:{body}"


@dataclass
class AllOnes(GeneratorSpec):
    family: ClassVar[str] = "all-ones"

    def generate(self) -> ImplicitOperator:
        # n * (1 1^t / n) is exactly the all-ones matrix
        return RankOneOperator(np.ones(self.n), scale=float(self.n))


@dataclass
class DecayingRankOne(GeneratorSpec):
    theta: float = 0.1

    family: ClassVar[str] = "decay"

    def validate(self) -> None:
        if not self.theta > 0:
            raise ValueError(f"theta must be positive, but received: {self.theta}")

    def vector(self) -> np.ndarray:
        j = np.arange(1, self.n + 1)
        return np.exp(-j * self.theta)

    def generate(self) -> ImplicitOperator:
        return RankOneOperator(self.vector())


def decay_norm2(theta: float, n: int) -> float:
    """Closed form of ||x||^2 for x_j = exp(-j theta), j = 1..n."""
    return (np.exp(-2 * theta) - np.exp(-2 * (n + 1) * theta)) / (1 - np.exp(-2 * theta))


@dataclass
class _Gram(GeneratorSpec):
    m: int = 200
    density: float = 1.0
    normalize: bool = True

    def validate(self) -> None:
        self.m = int(self.m)
        if self.m < 1:
            raise ValueError(f"Row count m must be positive, but received: {self.m}")
        if not 0 < self.density <= 1:
            raise ValueError(f"density must lie in (0, 1], but received: {self.density}")

    @abstractmethod
    def _values(self, rng: np.random.Generator, size: int) -> np.ndarray:
        pass

    def factor(self):
        rng = make_generator(self.seed)
        size = self.m * self.n
        values = self._values(rng, size)
        if self.density < 1:
            # Bernoulli mask, drawn after the values so density does not shift them
            mask = rng.random(size) < self.density
            rows, cols = np.divmod(np.flatnonzero(mask), self.n)
            c = sp.coo_matrix((values[mask], (rows, cols)), shape=(self.m, self.n)).tocsr()
            fro2 = float(c.multiply(c).sum())
        else:
            c = values.reshape(self.m, self.n)
            fro2 = float(np.sum(c * c))
        if self.normalize and fro2 > 0:
            c = c * (1.0 / np.sqrt(fro2))
        return c

    def generate(self) -> ImplicitOperator:
        rank_hint = min(self.m, self.n) if self.density == 1 else None
        return GramOperator(self.factor(), rank_hint=rank_hint)


@dataclass
class GramGaussian(_Gram):
    family: ClassVar[str] = "gram-gaussian"

    def _values(self, rng, size):
        return standard_normals(rng, size)


@dataclass
class GramUniform(_Gram):
    family: ClassVar[str] = "gram-uniform"

    def _values(self, rng, size):
        return rng.random(size)


def _check_rank(r: int, n: int) -> int:
    r = int(r)
    if r < 1:
        raise ValueError(f"Rank must be at least 1, but received: {r}")
    if r > n:
        raise RankError(f"Requested rank {r} exceeds dimension {n}")
    return r


@dataclass
class DiagonalSkewed(GeneratorSpec):
    r: int = 10
    skew: float = 0.0

    family: ClassVar[str] = "diag-skewed"

    def validate(self) -> None:
        self.r = _check_rank(self.r, self.n)
        if self.skew < 0:
            raise ValueError(f"skew must be nonnegative, but received: {self.skew}")

    def eigenvalues(self) -> np.ndarray:
        lam = np.zeros(self.n)
        j = np.arange(1, self.r + 1)
        lam[:self.r] = np.exp(-self.skew * j / self.r)
        return lam / lam.sum()

    def generate(self) -> ImplicitOperator:
        return DiagonalOperator(self.eigenvalues(), rank_hint=self.r)


def orthonormal_columns(rng: np.random.Generator, n: int, r: int) -> np.ndarray:
    """
    Modified Gram-Schmidt with one re-orthogonalization pass on r seeded
    standard-normal columns.
    """
    q = standard_normals(rng, n * r).reshape(r, n).T.copy()
    for k in range(r):
        v = q[:, k]
        for _ in range(2):
            for i in range(k):
                v -= (q[:, i] @ v) * q[:, i]
        norm = np.linalg.norm(v)
        if norm == 0:
            raise ArithmeticError("Degenerate column during orthonormalization")
        q[:, k] = v / norm
    return q


@dataclass
class Projection(GeneratorSpec):
    r: int = 10

    family: ClassVar[str] = "projection"

    def validate(self) -> None:
        self.r = _check_rank(self.r, self.n)

    def basis(self) -> np.ndarray:
        return orthonormal_columns(make_generator(self.seed), self.n, self.r)

    def generate(self) -> ImplicitOperator:
        return LowRankOperator(self.basis())


@dataclass
class ScaledProjection(Projection):
    """(1/r) Q Q^t: rank r, all nonzero eigenvalues equal, trace 1."""

    family: ClassVar[str] = "scaled-projection"

    def generate(self) -> ImplicitOperator:
        return LowRankOperator(self.basis(), np.full(self.r, 1.0 / self.r))


@dataclass
class RotatedDiagonal(GeneratorSpec):
    """Q D Q^t with D in [1, 1 + spread] and a seeded orthogonal Q, trace 1."""

    spread: float = 1.0

    family: ClassVar[str] = "rotated-diag"

    def validate(self) -> None:
        if self.spread < 0:
            raise ValueError(f"spread must be nonnegative, but received: {self.spread}")

    def generate(self) -> ImplicitOperator:
        rng = make_generator(self.seed)
        q = orthonormal_columns(rng, self.n, self.n)
        d = 1.0 + self.spread * rng.random(self.n)
        return LowRankOperator(q, d / d.sum())


@dataclass
class DiagonalConstant(GeneratorSpec):
    value: float = 1.0

    family: ClassVar[str] = "diag-const"

    def generate(self) -> ImplicitOperator:
        return DiagonalOperator(np.full(self.n, float(self.value)))


@dataclass
class Zero(GeneratorSpec):
    family: ClassVar[str] = "zero"

    def generate(self) -> ImplicitOperator:
        return DiagonalOperator(np.zeros(self.n))


FAMILIES: Dict[str, Type[GeneratorSpec]] = {
    cls.family: cls
    for cls in (AllOnes, DecayingRankOne, GramGaussian, GramUniform, DiagonalSkewed,
                Projection, ScaledProjection, RotatedDiagonal, DiagonalConstant, Zero)
}


def spec_fields(family: str) -> Dict[str, type]:
    cls = FAMILIES[family]
    return {f.name: f.type for f in fields(cls)}


def generate(spec: GeneratorSpec) -> ImplicitOperator:
    return spec.generate()

