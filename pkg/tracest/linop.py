"""
linop.py
Implicit square linear operators. Everything downstream touches a matrix only
through matvec; the concrete backings below exist so that matvec costs O(n)
or O(nnz) for the structured test families.
"""

from abc import ABC, abstractmethod
from typing import Optional, Sequence, Tuple

import numpy as np
import scipy.sparse as sp

from .helpers import TraceEstimationError, as_vector
from .kinds import OperatorKind


class ImplicitOperator(ABC):
    """
    Matvec-only access to a real n x n matrix. Instances are immutable after
    construction and safe to share between workers.
    """

    kind: OperatorKind = OperatorKind.COMPOSITE

    def __init__(self, dim: int, symmetric: bool = True, rank_hint: Optional[int] = None):
        if int(dim) < 1:
            raise DimensionError(f"Operator dimension must be positive, but received: {dim}")
        self._dim: int = int(dim)
        # Whether the backing is known to be exactly symmetric
        self.symmetric: bool = symmetric
        # Ground-truth rank when the generator knows it
        self.rank_hint: Optional[int] = rank_hint

    @property
    def dim(self) -> int:
        return self._dim

    @property
    def shape(self) -> Tuple[int, int]:
        return (self._dim, self._dim)

    def matvec(self, v) -> np.ndarray:
        """Return A @ v. v must have length dim and finite entries."""
        v = np.asarray(v, dtype=np.float64)
        if v.ndim != 1 or v.size != self._dim:
            raise DimensionError(f"Operator dimension {self._dim} does not match vector of shape {v.shape}")
        if not np.all(np.isfinite(v)):
            raise NonFiniteVectorError("Input vector to matvec has non-finite entries")
        return self._apply(v)

    def __matmul__(self, v) -> np.ndarray:
        return self.matvec(v)

    @abstractmethod
    def _apply(self, v: np.ndarray) -> np.ndarray:
        """Apply the operator to a validated vector."""

    def diagonal(self) -> np.ndarray:
        """
        Diagonal entries a_jj. Structured backings override this; the fallback
        costs n unit-vector matvecs.
        """
        e = np.zeros(self._dim)
        diag = np.empty(self._dim)
        for j in range(self._dim):
            e[j] = 1.0
            diag[j] = self._apply(e)[j]
            e[j] = 0.0
        return diag

    def exact_trace(self) -> float:
        """Sum of the diagonal; the ground truth the harness measures against."""
        return float(np.sum(self.diagonal()))

    def to_dense(self) -> np.ndarray:
        """Materialize column by column with n matvecs."""
        e = np.zeros(self._dim)
        out = np.empty((self._dim, self._dim))
        for j in range(self._dim):
            e[j] = 1.0
            out[:, j] = self._apply(e)
            e[j] = 0.0
        return out

    def __repr__(self) -> str:
        return f"{type(self).__name__}(dim={self._dim}, kind={self.kind.name})"


class DenseOperator(ImplicitOperator):
    """Row-major dense n x n backing."""

    kind = OperatorKind.DENSE

    def __init__(self, entries, rank_hint: Optional[int] = None):
        entries = np.array(entries, dtype=np.float64)
        if entries.ndim != 2 or entries.shape[0] != entries.shape[1]:
            raise DimensionError(f"Dense backing must be square, but received shape {entries.shape}")
        entries.setflags(write=False)
        self.entries: np.ndarray = entries
        super().__init__(entries.shape[0], symmetric=bool(np.array_equal(entries, entries.T)),
                         rank_hint=rank_hint)

    def _apply(self, v: np.ndarray) -> np.ndarray:
        return self.entries @ v

    def diagonal(self) -> np.ndarray:
        return np.diag(self.entries).copy()

    def to_dense(self) -> np.ndarray:
        return self.entries.copy()


class DiagonalOperator(ImplicitOperator):
    kind = OperatorKind.DIAGONAL

    def __init__(self, diag, rank_hint: Optional[int] = None):
        diag = as_vector(diag).copy()
        diag.setflags(write=False)
        self.diag: np.ndarray = diag
        if rank_hint is None:
            rank_hint = int(np.count_nonzero(diag))
        super().__init__(diag.size, symmetric=True, rank_hint=rank_hint)

    def _apply(self, v: np.ndarray) -> np.ndarray:
        return self.diag * v

    def diagonal(self) -> np.ndarray:
        return self.diag.copy()

    def to_dense(self) -> np.ndarray:
        return np.diag(self.diag)


class SparseOperator(ImplicitOperator):
    """Sparse backing, stored as CSR for matvec and kept square."""

    kind = OperatorKind.SPARSE_COO

    def __init__(self, matrix, rank_hint: Optional[int] = None):
        matrix = sp.csr_matrix(matrix, dtype=np.float64)
        if matrix.shape[0] != matrix.shape[1]:
            raise DimensionError(f"Sparse backing must be square, but received shape {matrix.shape}")
        matrix.sum_duplicates()
        self.matrix: sp.csr_matrix = matrix
        symmetric = (matrix != matrix.T).nnz == 0
        super().__init__(matrix.shape[0], symmetric=symmetric, rank_hint=rank_hint)

    def _apply(self, v: np.ndarray) -> np.ndarray:
        return self.matrix @ v

    def diagonal(self) -> np.ndarray:
        return self.matrix.diagonal()

    def to_dense(self) -> np.ndarray:
        return self.matrix.toarray()


class RankOneOperator(ImplicitOperator):
    """
    A = scale * x x^t / ||x||^2, applied as scale * x (x^t v) / ||x||^2.
    scale = 1 gives the orthogonal projector onto x.
    """

    kind = OperatorKind.RANK_ONE_DECAY

    def __init__(self, x, scale: float = 1.0):
        x = as_vector(x).copy()
        x.setflags(write=False)
        self.x: np.ndarray = x
        self.scale: float = float(scale)
        self.norm2: float = float(x @ x)
        if self.norm2 == 0.0:
            raise ValueError("Rank-one operator needs a nonzero vector")
        super().__init__(x.size, symmetric=True, rank_hint=1)

    def _apply(self, v: np.ndarray) -> np.ndarray:
        return self.x * (self.scale * (self.x @ v) / self.norm2)

    def diagonal(self) -> np.ndarray:
        return self.scale * self.x * self.x / self.norm2

    def exact_trace(self) -> float:
        return self.scale * float(np.sum(self.x * self.x)) / self.norm2


class GramOperator(ImplicitOperator):
    """A = C^t C for an m x n (dense or sparse) C, applied as C^t (C v)."""

    kind = OperatorKind.GRAM_PRODUCT

    def __init__(self, factor, rank_hint: Optional[int] = None):
        if sp.issparse(factor):
            factor = sp.csr_matrix(factor, dtype=np.float64)
        else:
            factor = np.array(factor, dtype=np.float64)
            if factor.ndim != 2:
                raise DimensionError(f"Gram factor must be 2D, but received shape {factor.shape}")
            factor.setflags(write=False)
        self.factor = factor
        self._factor_t = factor.T.tocsr() if sp.issparse(factor) else factor.T
        super().__init__(factor.shape[1], symmetric=True, rank_hint=rank_hint)

    def _apply(self, v: np.ndarray) -> np.ndarray:
        return self._factor_t @ (self.factor @ v)

    def diagonal(self) -> np.ndarray:
        if sp.issparse(self.factor):
            return np.asarray(self.factor.multiply(self.factor).sum(axis=0)).ravel()
        return np.einsum("ij,ij->j", self.factor, self.factor)

    def to_dense(self) -> np.ndarray:
        c = self.factor.toarray() if sp.issparse(self.factor) else self.factor
        return c.T @ c


class LowRankOperator(ImplicitOperator):
    """
    A = Q diag(w) Q^t for Q with orthonormal columns, applied as Q (w * (Q^t v)).
    Unit weights give the projector Q Q^t.
    """

    kind = OperatorKind.SCALED_PROJECTION

    def __init__(self, basis, weights=None):
        basis = np.array(basis, dtype=np.float64)
        if basis.ndim != 2 or basis.shape[1] > basis.shape[0]:
            raise DimensionError(f"Basis must be n x r with r <= n, but received shape {basis.shape}")
        if weights is None:
            weights = np.ones(basis.shape[1])
        weights = as_vector(weights, basis.shape[1]).copy()
        basis.setflags(write=False)
        weights.setflags(write=False)
        self.basis: np.ndarray = basis
        self.weights: np.ndarray = weights
        super().__init__(basis.shape[0], symmetric=True, rank_hint=int(np.count_nonzero(weights)))

    def _apply(self, v: np.ndarray) -> np.ndarray:
        return self.basis @ (self.weights * (self.basis.T @ v))

    def diagonal(self) -> np.ndarray:
        return (self.basis * self.basis) @ self.weights

    def to_dense(self) -> np.ndarray:
        return (self.basis * self.weights) @ self.basis.T


class CompositeOperator(ImplicitOperator):
    """Linear combination sum_k coef_k * A_k of operators of equal dimension."""

    kind = OperatorKind.COMPOSITE

    def __init__(self, terms: Sequence[Tuple[float, ImplicitOperator]]):
        terms = [(float(c), op) for (c, op) in terms]
        if not terms:
            raise ValueError("Composite operator needs at least one term")
        dim = terms[0][1].dim
        for _, op in terms:
            if op.dim != dim:
                raise DimensionError(f"Composite terms disagree on dimension: {op.dim} vs {dim}")
        self.terms = tuple(terms)
        super().__init__(dim, symmetric=all(op.symmetric for _, op in terms))

    def _apply(self, v: np.ndarray) -> np.ndarray:
        out = np.zeros(self.dim)
        for c, op in self.terms:
            out += c * op._apply(v)
        return out

    def diagonal(self) -> np.ndarray:
        out = np.zeros(self.dim)
        for c, op in self.terms:
            out += c * op.diagonal()
        return out


def matvec(op: ImplicitOperator, v) -> np.ndarray:
    return op.matvec(v)


def exact_trace(op: ImplicitOperator) -> float:
    return op.exact_trace()


def scaled(op: ImplicitOperator, factor: float) -> CompositeOperator:
    return CompositeOperator([(factor, op)])


class DimensionError(TraceEstimationError, ValueError):
    """Raised on a dimension mismatch between an operator and a vector"""
    pass


class NonFiniteVectorError(TraceEstimationError, ValueError):
    """Raised when matvec receives NaN or infinite entries"""
    pass


class RankError(TraceEstimationError, ValueError):
    """Raised when a requested rank exceeds the dimension"""
    pass
