import math

import pytest
import numpy as np
from tracest.estimator import (NonFiniteSampleError, TraceEstimate, estimate_trace, rayleigh_at,
                               rayleigh_sample, unit_rayleigh_sample)
from tracest.generators import AllOnes, DecayingRankOne, DiagonalConstant, GramGaussian, Zero
from tracest.kinds import Method
from tracest.linop import DenseOperator, DiagonalOperator, DimensionError
from tracest.sampler import ExhaustedError, SeededStream, spawn_substream

ALL_METHODS = list(Method)


@pytest.fixture
def spsd():
    return DenseOperator(GramGaussian(n=20, m=8, seed=4, normalize=False).generate().to_dense())


def test_hutchinson_exact_on_diagonal():
    op = DiagonalOperator([1.0, 2.0, 3.0, 4.0])
    est = estimate_trace(op, Method.HUTCHINSON, 1, SeededStream(0))
    assert est.value == pytest.approx(10.0, rel=1e-12)


@pytest.mark.parametrize("method", [Method.UNIT_WITH_REPLACEMENT, Method.UNIT_WITHOUT_REPLACEMENT])
def test_unit_exact_on_constant_diagonal(method):
    op = DiagonalConstant(n=5, value=2.0).generate()
    assert estimate_trace(op, method, 1, SeededStream(3)).value == 10.0


def test_unit_exact_on_all_ones():
    op = AllOnes(n=1000).generate()
    assert estimate_trace(op, Method.UNIT_WITH_REPLACEMENT, 1, SeededStream(0)).value == pytest.approx(1000.0)


@pytest.mark.parametrize("method", ALL_METHODS)
def test_zero_matrix(method):
    est = estimate_trace(Zero(n=10).generate(), method, 3, SeededStream(1))
    assert est.value == 0.0
    assert est.relative_error(0.0) == 0.0


def test_without_replacement_exhausted(spsd):
    with pytest.raises(ExhaustedError):
        estimate_trace(spsd, Method.UNIT_WITHOUT_REPLACEMENT, spsd.dim + 1, SeededStream(0))


def test_full_sweep_is_exact(spsd):
    """Test that n draws without replacement recover the trace"""
    est = estimate_trace(spsd, Method.UNIT_WITHOUT_REPLACEMENT, spsd.dim, SeededStream(9))
    assert est.value == pytest.approx(spsd.exact_trace(), rel=1e-10)


def test_rayleigh_sample_examples():
    op = DiagonalOperator([1.0, 2.0, 3.0])
    w = np.zeros(3)
    w[1] = math.sqrt(3.0)
    assert rayleigh_sample(op, w) == pytest.approx(6.0)
    assert unit_rayleigh_sample(op, 1) == 6.0
    assert rayleigh_sample(op, np.zeros(3)) == 0.0
    spec = DecayingRankOne(n=10, theta=0.2)
    x = spec.vector()
    assert rayleigh_sample(spec.generate(), x) == pytest.approx(float(x @ x), rel=1e-12)


def test_rayleigh_dimension_mismatch():
    with pytest.raises(DimensionError):
        rayleigh_sample(DiagonalOperator([1.0, 2.0]), np.ones(3))


@pytest.mark.parametrize("method", ALL_METHODS)
def test_estimate_is_mean_of_indexed_samples(spsd, method):
    stream = SeededStream(21)
    samples = [rayleigh_at(spsd, method, stream, k) for k in range(7)]
    est = estimate_trace(spsd, method, 7, stream)
    assert stream.counter == 7
    assert est.samples_used == 7
    assert est.value == pytest.approx(np.mean(samples), rel=1e-14)


@pytest.mark.parametrize("method", ALL_METHODS)
def test_same_stream_same_estimate(spsd, method):
    first = estimate_trace(spsd, method, 5, SeededStream(8))
    second = estimate_trace(spsd, method, 5, SeededStream(8))
    assert first == second


def test_non_finite_sample_raises():
    op = DiagonalOperator([np.inf, 1.0])
    with pytest.raises(NonFiniteSampleError):
        estimate_trace(op, Method.HUTCHINSON, 1, SeededStream(0))


def test_invalid_sample_count():
    with pytest.raises(ValueError):
        estimate_trace(DiagonalOperator([1.0]), Method.GAUSSIAN, 0, SeededStream(0))


def test_trace_estimate_properties():
    est = TraceEstimate(value=2.0, samples_used=4, sample_mean_of_squares=5.0, method=Method.GAUSSIAN)
    assert est.sample_variance == 1.0
    assert est.relative_error(4.0) == 0.5


@pytest.mark.slow
@pytest.mark.parametrize("method", [Method.HUTCHINSON, Method.GAUSSIAN, Method.UNIT_WITH_REPLACEMENT])
def test_unbiased(method):
    op = DenseOperator(GramGaussian(n=50, m=20, seed=6, normalize=False).generate().to_dense())
    trials = 10000
    est = estimate_trace(op, method, trials, SeededStream(123))
    standard_error = math.sqrt(est.sample_variance / trials)
    assert abs(est.value - op.exact_trace()) <= 5 * standard_error


@pytest.mark.slow
def test_unbiased_without_replacement():
    op = DenseOperator(GramGaussian(n=50, m=20, seed=6, normalize=False).generate().to_dense())
    samples = np.array([estimate_trace(op, Method.UNIT_WITHOUT_REPLACEMENT, 1, spawn_substream(5, t)).value
                        for t in range(10000)])
    standard_error = samples.std() / math.sqrt(samples.size)
    assert abs(samples.mean() - op.exact_trace()) <= 5 * standard_error


@pytest.mark.slow
def test_gaussian_sample_variance():
    """Test Var of one Gaussian sample against 2 ||A||_F^2"""
    op = DenseOperator(GramGaussian(n=5, m=3, seed=2, normalize=False).generate().to_dense())
    est = estimate_trace(op, Method.GAUSSIAN, 100000, SeededStream(77))
    assert est.sample_variance == pytest.approx(2.0 * np.sum(op.entries ** 2), rel=0.1)
