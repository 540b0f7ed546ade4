"""
stats.py
Matrix diagnostics that feed the matrix-dependent bounds: the off-diagonal
energy K_H, the spectral share K_G = ||A|| / tr(A), the diagonal spread K_U,
the spectral norm by power iteration, and closed-form estimator variances.
"""

from dataclasses import dataclass
from typing import Dict, Optional, Tuple, Union

import numpy as np

from .bounds import BoundReport, TolerancePair, bound_report
from .helpers import TraceEstimationError
from .kinds import OperatorKind
from .linop import DenseOperator, ImplicitOperator
from .logger import logger
from .sampler import make_generator, standard_normals

# Largest n that may be materialized through n matvecs on request
MAX_MATERIALIZE_DIM = 10_000
# Largest n handed to the dense eigen-oracle
MAX_EIGEN_DIM = 2000
RANK_RELATIVE_CUTOFF = 1e-10

DenseLike = Union[np.ndarray, DenseOperator]


def dense_entries(a: Union[DenseLike, ImplicitOperator], materialize: bool = False) -> np.ndarray:
    """
    Entries of a as a square array. Dense inputs pass through; other operators
    are materialized column by column only when asked to and n is small enough.
    """
    if isinstance(a, DenseOperator):
        return a.entries
    if isinstance(a, ImplicitOperator):
        if not materialize:
            raise MaterializationError(f"{a!r} has no dense backing; pass materialize=True to build one "
                                       f"with {a.dim} matvecs")
        if a.dim > MAX_MATERIALIZE_DIM:
            raise MaterializationError(f"Refusing to materialize dimension {a.dim} > {MAX_MATERIALIZE_DIM}")
        logger.debug(f"Materializing {a!r} with {a.dim} matvecs")
        return a.to_dense()
    a = np.asarray(a, dtype=np.float64)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"Expected a square matrix but received shape {a.shape}")
    return a


def k_h(dense: DenseLike) -> Tuple[float, np.ndarray]:
    """
    K_H^j = (||a_j||^2 - a_jj^2) / a_jj^2 for every column with a_jj > 0, and
    K_H = max_j K_H^j. Columns with a zero diagonal vanish for SPSD matrices and
    are dropped.
    """
    a = dense_entries(dense)
    diag = np.diag(a)
    if np.any(diag < 0):
        raise NotSPSDError(f"Matrix is not SPSD: negative diagonal entry {diag.min()}")
    keep = diag > 0
    if not np.any(keep):
        return 0.0, np.zeros(0)
    d2 = diag[keep] ** 2
    col_norm2 = np.einsum("ij,ij->j", a[:, keep], a[:, keep])
    per_column = np.maximum(0.0, col_norm2 - d2) / d2
    return float(per_column.max()), per_column


@dataclass
class PairHistogram:
    """Histogram of all n (n - 1) / 2 pairwise values K_U^(i,j) = n |a_ii - a_jj| / |tr(A)|."""
    edges: np.ndarray
    counts: np.ndarray

    @property
    def total_pairs(self) -> int:
        return int(self.counts.sum())


def k_u(diag, trace: float, bins: int = 50) -> Tuple[float, PairHistogram]:
    """
    K_U = n (max_j a_jj - min_j a_jj) / |tr(A)| and the histogram of every
    pairwise K_U^(i,j). Pairs are counted from the sorted diagonal with one
    binary search per bin edge, never enumerated.
    """
    if trace == 0:
        raise ZeroTraceError("K_U is undefined for a matrix with zero trace")
    diag = np.asarray(diag, dtype=np.float64)
    n = diag.size
    values = np.sort(n * diag / abs(trace))
    spread = float(n * (diag.max() - diag.min()) / abs(trace)) if n else 0.0

    edges = np.linspace(0.0, spread if spread > 0 else 1.0, bins + 1)
    total = n * (n - 1) // 2
    index = np.arange(n)
    cumulative = np.empty(bins + 1, dtype=np.int64)
    cumulative[0] = 0
    for k in range(1, bins):
        # Pairs i < j (in sorted order) with values[j] - values[i] <= edges[k]
        upper = np.searchsorted(values, values + edges[k], side="right")
        cumulative[k] = int(np.sum(upper - index - 1))
    cumulative[bins] = total
    return spread, PairHistogram(edges=edges, counts=np.diff(cumulative))


def _power_iteration(op: ImplicitOperator, seed: int, tol: float, max_iters: int) -> Tuple[float, bool]:
    v = standard_normals(make_generator(seed), op.dim)
    v /= np.linalg.norm(v)
    previous = None
    best = 0.0
    for _ in range(max_iters):
        w = op.matvec(v)
        estimate = float(v @ w)
        norm = float(np.linalg.norm(w))
        if norm == 0.0:
            return 0.0, False
        best = max(best, estimate)
        if previous is not None and abs(estimate - previous) <= tol * abs(estimate):
            return estimate, True
        previous = estimate
        v = w / norm
    return best, False


def spectral_norm(op: ImplicitOperator, tol: float = 1e-8, max_iters: int = 5000, seed: int = 0) -> float:
    """
    Largest eigenvalue of an SPSD operator by power iteration from a seeded
    start vector. A stagnating run is restarted once from seed + 1.
    """
    best = 0.0
    hit_null_space = 0
    for attempt, start_seed in enumerate((seed, seed + 1)):
        estimate, converged = _power_iteration(op, start_seed, tol, max_iters)
        if converged:
            return estimate
        if estimate == 0.0:
            hit_null_space += 1
        best = max(best, estimate)
        if attempt == 0:
            logger.info(f"Power iteration stagnated after {max_iters} iterations at {estimate}; restarting")
    if hit_null_space == 2:
        # Both start vectors were annihilated: A v = 0 for random v means A = 0
        return 0.0
    raise ConvergenceError(f"Power iteration did not converge in {max_iters} iterations", best_estimate=best)


def k_g(op: ImplicitOperator, trace: Optional[float] = None, **kwargs) -> float:
    """K_G = ||A|| / tr(A) for SPSD A."""
    if trace is None:
        trace = op.exact_trace()
    if trace == 0:
        raise ZeroTraceError("K_G is undefined for a matrix with zero trace")
    if trace < 0:
        raise NotSPSDError(f"Matrix is not SPSD: negative trace {trace}")
    return spectral_norm(op, **kwargs) / trace


def variance_unit(diag, trace: float, n: Optional[int] = None, num_samples: int = 1,
                  without_replacement: bool = False) -> float:
    """
    Variance of the unit-vector estimator with N samples:
        with replacement     (n sum_j a_jj^2 - tr^2) / N
        without replacement  (n - N) / (N (n - 1)) * (n sum_j a_jj^2 - tr^2)
    """
    diag = np.asarray(diag, dtype=np.float64)
    if n is None:
        n = diag.size
    if num_samples < 1:
        raise VarianceDomainError(f"Sample count must be at least 1, but received: {num_samples}")
    spread = max(0.0, n * float(np.sum(diag * diag)) - trace * trace)
    if not without_replacement:
        return spread / num_samples
    if num_samples > n:
        raise VarianceDomainError(f"Sampling without replacement exhausted: {num_samples} samples "
                                  f"from only {n} columns")
    if n == 1:
        return 0.0
    return (n - num_samples) / (num_samples * (n - 1)) * spread


def variance_hutchinson(dense: DenseLike, num_samples: int = 1) -> float:
    """2 (||A||_F^2 - sum_j a_jj^2) / N for symmetric A."""
    a = dense_entries(dense)
    return 2.0 * (float(np.sum(a * a)) - float(np.sum(np.diag(a) ** 2))) / num_samples


def variance_gaussian(dense: DenseLike, num_samples: int = 1) -> float:
    """2 ||A||_F^2 / N for symmetric A."""
    a = dense_entries(dense)
    return 2.0 * float(np.sum(a * a)) / num_samples


def eigenvalues(dense: DenseLike) -> np.ndarray:
    """Eigenvalues of a symmetric matrix, largest first. Supported up to MAX_EIGEN_DIM."""
    a = dense_entries(dense)
    if a.shape[0] > MAX_EIGEN_DIM:
        raise MaterializationError(f"Eigenvalue oracle unsupported for dimension {a.shape[0]} > {MAX_EIGEN_DIM}")
    return np.linalg.eigvalsh(a)[::-1]


def rank_from_eigenvalues(eigs: np.ndarray) -> int:
    if eigs.size == 0 or eigs[0] <= 0:
        return 0
    return int(np.count_nonzero(eigs > RANK_RELATIVE_CUTOFF * eigs[0]))


# Scalar fields in the order they are serialized
DIAGNOSTIC_FIELDS = ["n", "trace", "k_h", "k_g", "k_u", "spectral_norm", "rank_estimate"]


@dataclass
class MatrixDiagnostics:
    n: int
    trace: float
    k_g: float
    spectral_norm: float
    k_u: float
    k_u_pairs: PairHistogram
    k_h: Optional[float] = None
    k_h_per_column: Optional[np.ndarray] = None
    spectrum_ratio_per_eig: Optional[np.ndarray] = None
    rank_estimate: Optional[int] = None

    def scalars(self) -> Dict[str, Optional[float]]:
        return {name: getattr(self, name) for name in DIAGNOSTIC_FIELDS}

    def to_key_values(self) -> str:
        lines = []
        for name, value in self.scalars().items():
            lines.append(f"{name}={'' if value is None else repr(value)}")
        return "\n".join(lines) + "\n"

    def csv_header(self) -> str:
        return ",".join(DIAGNOSTIC_FIELDS)

    def csv_row(self) -> str:
        return ",".join("" if v is None else repr(v) for v in self.scalars().values())

    def bound_report(self, tol: TolerancePair) -> BoundReport:
        """Every bound these diagnostics have inputs for."""
        return bound_report(tol, k_h=self.k_h, k_g=self.k_g if 0 < self.k_g <= 1 else None,
                            k_u=self.k_u, n=self.n if self.n >= 2 else None, rank=self.rank_estimate)


def diagnose(op: ImplicitOperator, materialize: bool = False, seed: int = 0,
             bins: int = 50) -> MatrixDiagnostics:
    """
    Collect every diagnostic available for op. K_G and K_U are matrix-free;
    K_H, the eigenvalue ratios and the rank estimate need dense entries, which
    come from a dense backing or from explicit materialization.
    """
    trace = op.exact_trace()
    if trace == 0:
        raise ZeroTraceError("Diagnostics are undefined for a matrix with zero trace")
    diag = op.diagonal()
    norm = spectral_norm(op, seed=seed)
    k_u_value, pairs = k_u(diag, trace, bins=bins)
    out = MatrixDiagnostics(n=op.dim, trace=trace, k_g=norm / trace, spectral_norm=norm,
                            k_u=k_u_value, k_u_pairs=pairs, rank_estimate=op.rank_hint)

    if op.kind is OperatorKind.DIAGONAL:
        if np.any(diag < 0):
            raise NotSPSDError(f"Matrix is not SPSD: negative diagonal entry {diag.min()}")
        out.k_h, out.k_h_per_column = 0.0, np.zeros(int(np.count_nonzero(diag)))
        if op.dim <= MAX_EIGEN_DIM:
            eigs = np.sort(diag)[::-1]
            out.spectrum_ratio_per_eig = eigs / trace
            out.rank_estimate = rank_from_eigenvalues(eigs)
        return out

    if not (isinstance(op, DenseOperator) or materialize):
        logger.info("Skipping K_H and eigenvalue diagnostics: no dense backing and materialization not requested")
        return out

    a = dense_entries(op, materialize=materialize)
    out.k_h, out.k_h_per_column = k_h(a)
    if op.dim <= MAX_EIGEN_DIM:
        eigs = eigenvalues(a)
        out.spectrum_ratio_per_eig = eigs / trace
        out.rank_estimate = rank_from_eigenvalues(eigs)
    return out


class NotSPSDError(TraceEstimationError, ValueError):
    """Raised when a diagnostic needs an SPSD matrix and receives something else"""
    pass


class ZeroTraceError(TraceEstimationError, ValueError):
    """Raised when a trace-relative quantity is requested for a zero-trace matrix"""
    pass


class VarianceDomainError(TraceEstimationError, ValueError):
    """Raised for sample counts outside a variance formula's domain"""
    pass


class MaterializationError(TraceEstimationError, ValueError):
    """Raised when dense entries are needed but not available or too large"""
    pass


class ConvergenceError(TraceEstimationError, ArithmeticError):
    """Raised when power iteration fails to converge; carries the best estimate seen"""

    def __init__(self, message: str, best_estimate: float):
        super().__init__(f"{message} (best estimate {best_estimate})")
        self.best_estimate = best_estimate
