import pytest
import numpy as np
from tracest.bounds import TolerancePair
from tracest.generators import AllOnes, DecayingRankOne, DiagonalConstant, GramGaussian, Projection, Zero
from tracest.harness import TrialPool, TrialSamples
from tracest.kinds import Method
from tracest.linop import DenseOperator, DiagonalOperator
from tracest.stats import (ConvergenceError, MaterializationError, NotSPSDError, VarianceDomainError,
                           ZeroTraceError, diagnose, eigenvalues, k_g, k_h, k_u, rank_from_eigenvalues,
                           spectral_norm, variance_gaussian, variance_hutchinson, variance_unit)


@pytest.fixture
def gram_dense():
    return GramGaussian(n=40, m=10, seed=3, normalize=False).generate().to_dense()


def test_k_h_diagonal():
    value, per_column = k_h(np.diag([1.0, 2.0, 3.0]))
    assert value == 0.0
    assert np.array_equal(per_column, np.zeros(3))


def test_k_h_all_ones():
    value, _ = k_h(AllOnes(n=6).generate().to_dense())
    assert value == pytest.approx(5.0, rel=1e-12)


def test_k_h_decay():
    spec = DecayingRankOne(n=20, theta=0.1)
    x = spec.vector()
    value, per_column = k_h(spec.generate().to_dense())
    expected = (x @ x) / x ** 2 - 1.0
    assert np.allclose(per_column, expected, rtol=1e-9)
    assert value == pytest.approx(expected[-1], rel=1e-9)


def test_k_h_prunes_zero_diagonal():
    value, per_column = k_h(np.diag([1.0, 0.0, 2.0]))
    assert per_column.size == 2
    assert value == 0.0
    assert k_h(np.zeros((3, 3)))[0] == 0.0


def test_k_h_negative_diagonal_raises():
    with pytest.raises(NotSPSDError, match="not SPSD"):
        k_h(np.diag([1.0, -1.0]))


def test_k_u_examples():
    assert k_u([0.5, 0.5, 0.5], 1.5)[0] == 0.0
    assert k_u([1.0, 0.0], 1.0)[0] == 2.0
    spec = DecayingRankOne(n=30, theta=0.2)
    op = spec.generate()
    x = spec.vector()
    expected = 30 * (x[0] ** 2 - x[-1] ** 2) / (x @ x)
    assert k_u(op.diagonal(), op.exact_trace())[0] == pytest.approx(expected, rel=1e-9)


def test_k_u_zero_trace_raises():
    with pytest.raises(ZeroTraceError, match="zero trace"):
        k_u([1.0, -1.0], 0.0)


def test_pair_histogram_matches_enumeration():
    diag = np.random.default_rng(8).random(30)
    trace = float(diag.sum())
    spread, hist = k_u(diag, trace, bins=10)
    assert hist.total_pairs == 30 * 29 // 2
    scaled = 30 * diag / trace
    i, j = np.triu_indices(30, k=1)
    edges = hist.edges.copy()
    edges[-1] = 2.0 * spread + 1.0
    brute, _ = np.histogram(np.abs(scaled[i] - scaled[j]), bins=edges)
    assert np.abs(brute - hist.counts).sum() <= 2
    assert hist.edges[-1] == spread


def test_spectral_norm():
    assert spectral_norm(DiagonalOperator([3.0, 1.0])) == pytest.approx(3.0, rel=1e-7)
    assert spectral_norm(Projection(n=30, r=4, seed=1).generate()) == pytest.approx(1.0, rel=1e-7)
    assert spectral_norm(DecayingRankOne(n=30, theta=0.3).generate()) == pytest.approx(1.0, rel=1e-7)
    assert spectral_norm(Zero(n=5).generate()) == 0.0


def test_spectral_norm_no_convergence():
    with pytest.raises(ConvergenceError) as info:
        spectral_norm(DiagonalOperator([3.0, 1.0]), max_iters=1)
    assert info.value.best_estimate > 0


def test_k_g_matches_eigenvalues(gram_dense: np.ndarray):
    op = DenseOperator(gram_dense)
    expected = eigenvalues(gram_dense)[0] / np.trace(gram_dense)
    assert k_g(op) == pytest.approx(expected, rel=1e-6)
    assert 0 < k_g(op) <= 1


def test_k_g_zero_trace_raises():
    with pytest.raises(ZeroTraceError):
        k_g(Zero(n=3).generate())


def test_scale_invariance(gram_dense: np.ndarray):
    for scale in (1e-3, 7.0):
        assert k_h(scale * gram_dense)[0] == pytest.approx(k_h(gram_dense)[0], rel=1e-10)
        diag = np.diag(gram_dense)
        assert k_u(scale * diag, scale * diag.sum())[0] == pytest.approx(k_u(diag, diag.sum())[0], rel=1e-10)
        assert k_g(DenseOperator(scale * gram_dense)) == pytest.approx(k_g(DenseOperator(gram_dense)), rel=1e-6)


def test_variance_unit_examples():
    assert variance_unit([1.0, 0.0], 1.0) == 1.0
    assert variance_unit([1.0, 0.0], 1.0, num_samples=2, without_replacement=True) == 0.0
    assert variance_unit([0.3, 0.3, 0.3], 0.9) == pytest.approx(0.0, abs=1e-15)


def test_variance_unit_brute_force():
    diag = np.array([0.5, 1.0, 2.5, 4.0])
    samples = diag.size * diag
    assert variance_unit(diag, diag.sum()) == pytest.approx(samples.var(), rel=1e-12)


def test_variance_unit_finite_population_ratio():
    diag = np.random.default_rng(2).random(20)
    for n_samples in (1, 5, 19, 20):
        with_rep = variance_unit(diag, diag.sum(), num_samples=n_samples)
        without = variance_unit(diag, diag.sum(), num_samples=n_samples, without_replacement=True)
        assert without == pytest.approx(with_rep * (20 - n_samples) / 19, rel=1e-12, abs=1e-15)


def test_variance_unit_domain():
    with pytest.raises(VarianceDomainError):
        variance_unit([1.0, 2.0], 3.0, num_samples=3, without_replacement=True)
    with pytest.raises(VarianceDomainError):
        variance_unit([1.0, 2.0], 3.0, num_samples=0)


def test_quadratic_form_variances(gram_dense: np.ndarray):
    fro2 = np.sum(gram_dense ** 2)
    assert variance_gaussian(gram_dense, 4) == pytest.approx(2 * fro2 / 4)
    assert variance_hutchinson(gram_dense) == pytest.approx(2 * (fro2 - np.sum(np.diag(gram_dense) ** 2)))
    assert variance_hutchinson(np.diag([1.0, 2.0])) == 0.0


def test_rank_from_eigenvalues():
    assert rank_from_eigenvalues(np.array([2.0, 1.0, 1e-14, 0.0])) == 2
    assert rank_from_eigenvalues(np.zeros(3)) == 0


def test_diagnose_dense(gram_dense: np.ndarray):
    diag = diagnose(DenseOperator(gram_dense))
    assert diag.k_h is not None
    assert diag.rank_estimate == 10
    assert diag.k_u_pairs.total_pairs == 40 * 39 // 2
    assert diag.spectrum_ratio_per_eig.sum() == pytest.approx(1.0, rel=1e-10)
    assert "k_g=" in diag.to_key_values()
    assert diag.csv_header().split(",") == list(diag.scalars())
    report = diag.bound_report(TolerancePair(0.05, 0.05))
    assert report.hutchinson_matrix is not None
    assert report.gaussian_necessary is not None


def test_diagnose_without_dense_backing():
    op = GramGaussian(n=30, m=5, seed=1).generate()
    assert diagnose(op).k_h is None
    assert diagnose(op, materialize=True).k_h is not None


def test_diagnose_diagonal():
    diag = diagnose(DiagonalConstant(n=10, value=2.0).generate())
    assert diag.k_h == 0.0
    assert diag.k_u == 0.0
    assert diag.k_g == pytest.approx(0.1, rel=1e-12)
    assert diag.rank_estimate == 10


def test_diagnose_zero_trace_raises():
    with pytest.raises(ZeroTraceError):
        diagnose(Zero(n=4).generate())


def test_materialization_needs_opt_in():
    with pytest.raises(MaterializationError):
        k_h(AllOnes(n=3).generate())


@pytest.mark.slow
def test_unit_variance_matches_seeded_trials():
    """Test the closed-form unit-vector variances against 1e5 seeded estimator trials"""
    op = GramGaussian(n=10, m=10, seed=12).generate()
    diag, trace = op.diagonal(), op.exact_trace()
    with TrialPool(op, workers=1) as pool:
        with_rep = TrialSamples(pool, Method.UNIT_WITH_REPLACEMENT, trials=100000, master_seed=5)
        without = TrialSamples(pool, Method.UNIT_WITHOUT_REPLACEMENT, trials=100000, master_seed=6)
        for n_samples in (1, 3, 7):
            var_with = with_rep.estimates(n_samples).var()
            var_without = without.estimates(n_samples).var()
            assert var_with == pytest.approx(variance_unit(diag, trace, num_samples=n_samples), rel=0.05)
            assert var_without == pytest.approx(
                variance_unit(diag, trace, num_samples=n_samples, without_replacement=True), rel=0.05)
            assert var_without / var_with == pytest.approx((10 - n_samples) / 9, rel=0.05)
