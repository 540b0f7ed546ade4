"""
bounds.py
Sample-size bounds for the (eps, delta) guarantee

    Pr(|tr_D^N(A) - tr(A)| <= eps * tr(A)) >= 1 - delta.

Six sufficient bounds (two per estimator family) and the necessary bound for
the Gaussian estimator. Strict conditions "N > B" round to floor(B) + 1 and
non-strict "N >= B" round to ceil(B); see each function.
"""

import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

from .helpers import TraceEstimationError, ceil_bound, strict_bound
from .logger import logger
from .specialfn import DomainError, reg_gamma_p, reg_gamma_q

NECESSARY_SEARCH_CAP = 10**9


@dataclass(frozen=True)
class TolerancePair:
    eps: float
    delta: float

    def __post_init__(self):
        if not 0 < self.eps < 1:
            raise ToleranceError(f"Invalid tolerance: eps must lie in (0, 1), but received: {self.eps}")
        if not 0 < self.delta < 1:
            raise ToleranceError(f"Invalid tolerance: delta must lie in (0, 1), but received: {self.delta}")


def c_factor(tol: TolerancePair) -> float:
    """c(eps, delta) = eps^-2 ln(2 / delta)."""
    return math.log(2.0 / tol.delta) / (tol.eps * tol.eps)


def hutchinson_sufficient(tol: TolerancePair) -> int:
    """N >= 6 c(eps, delta)."""
    return ceil_bound(6.0 * c_factor(tol))


def gaussian_sufficient(tol: TolerancePair) -> int:
    """N >= 8 c(eps, delta)."""
    return ceil_bound(8.0 * c_factor(tol))


def hutchinson_matrix_bound(k_h: float, tol: TolerancePair) -> int:
    """
    N > 2 K_H c(eps, delta). K_H = 0 is the diagonal case where one probe is exact.
    """
    if k_h < 0:
        raise ValueError(f"K_H must be nonnegative, but received: {k_h}")
    if k_h == 0:
        return 1
    return strict_bound(2.0 * k_h * c_factor(tol))


def gaussian_matrix_bound(k_g: float, tol: TolerancePair) -> int:
    """N > 8 K_G c(eps, delta), with K_G = ||A|| / tr(A) in (0, 1] for SPSD A."""
    if not 0 < k_g <= 1:
        raise InvalidKGError(f"Invalid K_G: must lie in (0, 1], but received: {k_g}")
    return strict_bound(8.0 * k_g * c_factor(tol))


def projection_rank_samples(rank: int, delta: float) -> int:
    """
    N >= 8 r ln(2 / delta) Gaussian samples recover the rank r of an orthogonal
    projector as round(tr_G^N(A)) with probability at least 1 - delta.
    """
    if rank < 1:
        raise ValueError(f"Rank must be at least 1, but received: {rank}")
    if not 0 < delta < 1:
        raise ToleranceError(f"Invalid tolerance: delta must lie in (0, 1), but received: {delta}")
    return ceil_bound(8.0 * rank * math.log(2.0 / delta))


def tau_factor(theta: float) -> float:
    """(ln(1 + theta) - ln(1 - theta)) / (2 theta)."""
    return (math.log1p(theta) - math.log1p(-theta)) / (2.0 * theta)


def phi(theta: float, x: float) -> float:
    """
    P(x/2, tau (1 - theta) x / 2) + Q(x/2, tau (1 + theta) x / 2): the smallest
    failure probability a Gaussian estimate with x = N r chi-squared degrees of
    freedom can reach at relative tolerance theta.
    """
    if not 0 < theta < 1:
        raise DomainError(f"phi domain error: theta must lie in (0, 1), but received: {theta}")
    if not x > 0:
        raise DomainError(f"phi domain error: x must be positive, but received: {x}")
    tau = tau_factor(theta)
    half = x / 2.0
    return reg_gamma_p(half, tau * (1.0 - theta) * half) + reg_gamma_q(half, tau * (1.0 + theta) * half)


def gaussian_necessary_min_n(rank: int, tol: TolerancePair) -> int:
    """
    Smallest N >= 1 with phi(eps, N r) <= delta. Doubling bracket, then
    bisection; if phi is seen to increase along the bracket the search falls
    back to a linear scan.
    """
    if rank < 1:
        raise ValueError(f"Rank must be at least 1, but received: {rank}")

    def failure(n: int) -> float:
        return phi(tol.eps, float(n) * rank)

    if failure(1) <= tol.delta:
        return 1

    lo, hi = 1, 2
    prev = failure(lo)
    monotone = True
    while True:
        current = failure(hi)
        if current > prev:
            monotone = False
        if current <= tol.delta:
            break
        if hi >= NECESSARY_SEARCH_CAP:
            raise UnreachableBoundError(f"Necessary bound unreachable: no N <= {NECESSARY_SEARCH_CAP} "
                                        f"satisfies phi <= {tol.delta} for rank {rank}")
        lo, prev = hi, current
        hi = min(2 * hi, NECESSARY_SEARCH_CAP)

    if not monotone:
        logger.info(f"phi is not monotone along the bracket for rank {rank}; scanning linearly")
        for n in range(1, hi + 1):
            if failure(n) <= tol.delta:
                return n
        return hi

    # Invariant: failure(lo) > delta >= failure(hi)
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if failure(mid) <= tol.delta:
            hi = mid
        else:
            lo = mid
    return hi


def unit_factor(k_u: float, tol: TolerancePair) -> float:
    """The intermediate F = K_U^2 c(eps, delta) / 2 shared by both unit-vector bounds."""
    return k_u * k_u * c_factor(tol) / 2.0


def unit_with_replacement_bound(k_u: float, tol: TolerancePair) -> int:
    """N > F. K_U = 0 (equal diagonal) needs a single sample."""
    if k_u < 0:
        raise ValueError(f"K_U must be nonnegative, but received: {k_u}")
    if k_u == 0:
        return 1
    return strict_bound(unit_factor(k_u, tol))


def unit_without_replacement_bound(k_u: float, n: int, tol: TolerancePair) -> int:
    """
    N >= (n + 1) / (1 + (n - 1) / F), capped at n since n draws without
    replacement recover the trace exactly, and never above the with-replacement
    bound.
    """
    if k_u < 0:
        raise ValueError(f"K_U must be nonnegative, but received: {k_u}")
    if n < 2:
        raise ValueError(f"Dimension must be at least 2, but received: {n}")
    if k_u == 0:
        return 1
    f = unit_factor(k_u, tol)
    if math.isinf(f):
        return n
    return min(n, strict_bound(f), ceil_bound((n + 1) / (1.0 + (n - 1) / f)))


# Row order and labels for rendered reports
BOUND_LABELS: Dict[str, Tuple[str, str]] = {
    "hutchinson_simple": ("Hutchinson", "N >= 6c"),
    "hutchinson_matrix": ("Hutchinson", "N > 2 K_H c"),
    "gaussian_simple": ("Gaussian", "N >= 8c"),
    "gaussian_matrix": ("Gaussian", "N > 8 K_G c"),
    "gaussian_necessary": ("Gaussian (necessary)", "Phi_eps(N r) <= delta"),
    "unit_with_repl": ("Unit with replacement", "N > K_U^2 c / 2"),
    "unit_without_repl": ("Unit without replacement", "N >= (n+1) / (1 + (n-1)/F)"),
}


@dataclass
class BoundReport:
    tol: TolerancePair
    c_factor: float
    hutchinson_simple: int
    gaussian_simple: int
    hutchinson_matrix: Optional[int] = None
    gaussian_matrix: Optional[int] = None
    unit_with_repl: Optional[int] = None
    unit_without_repl: Optional[int] = None
    gaussian_necessary: Optional[int] = None
    # Inputs the report was built from, None when not supplied
    inputs: Dict[str, Optional[float]] = field(default_factory=dict)

    @property
    def effective_hutchinson(self) -> int:
        """Both Hutchinson bounds are independently sufficient; take the smaller."""
        if self.hutchinson_matrix is None:
            return self.hutchinson_simple
        return min(self.hutchinson_simple, self.hutchinson_matrix)

    @property
    def effective_gaussian(self) -> int:
        if self.gaussian_matrix is None:
            return self.gaussian_simple
        return min(self.gaussian_simple, self.gaussian_matrix)

    def rows(self) -> List[Tuple[str, str, str, Optional[int]]]:
        """(key, method, condition, value) in display order; None renders as a dash."""
        return [(key, method, condition, getattr(self, key))
                for key, (method, condition) in BOUND_LABELS.items()]

    def as_dict(self) -> Dict:
        out = {"eps": self.tol.eps, "delta": self.tol.delta, "c_factor": self.c_factor}
        out.update({key: value for key, _, _, value in self.rows()})
        out["effective_hutchinson"] = self.effective_hutchinson
        out["effective_gaussian"] = self.effective_gaussian
        out.update({f"input_{k}": v for k, v in self.inputs.items()})
        return out


def bound_report(tol: TolerancePair, k_h: Optional[float] = None, k_g: Optional[float] = None,
                 k_u: Optional[float] = None, n: Optional[int] = None,
                 rank: Optional[int] = None) -> BoundReport:
    """Every bound whose inputs are available; missing inputs leave their bound as None."""
    report = BoundReport(
        tol=tol,
        c_factor=c_factor(tol),
        hutchinson_simple=hutchinson_sufficient(tol),
        gaussian_simple=gaussian_sufficient(tol),
        inputs={"k_h": k_h, "k_g": k_g, "k_u": k_u, "n": n, "rank": rank},
    )
    if k_h is not None:
        report.hutchinson_matrix = hutchinson_matrix_bound(k_h, tol)
    if k_g is not None:
        report.gaussian_matrix = gaussian_matrix_bound(k_g, tol)
    if k_u is not None:
        report.unit_with_repl = unit_with_replacement_bound(k_u, tol)
        if n is not None:
            report.unit_without_repl = unit_without_replacement_bound(k_u, n, tol)
    if rank is not None:
        report.gaussian_necessary = gaussian_necessary_min_n(rank, tol)
    return report


class ToleranceError(TraceEstimationError, ValueError):
    """Raised when eps or delta lies outside (0, 1)"""
    pass


class InvalidKGError(TraceEstimationError, ValueError):
    """Raised when K_G lies outside (0, 1]"""
    pass


class UnreachableBoundError(TraceEstimationError, ArithmeticError):
    """Raised when the necessary-bound search hits its cap"""
    pass
