import pytest
import numpy as np
from tracest.generators import (FAMILIES, AllOnes, DecayingRankOne, DiagonalConstant, DiagonalSkewed,
                                GramGaussian, GramUniform, Projection, RotatedDiagonal,
                                ScaledProjection, Zero, generate, orthonormal_columns, spec_fields)
from tracest.linop import RankError
from tracest.sampler import make_generator


@pytest.fixture(params=[
    AllOnes(n=12),
    DecayingRankOne(n=12, theta=0.3),
    GramGaussian(n=12, m=5, seed=1),
    GramUniform(n=12, m=5, density=0.5, seed=2),
    DiagonalSkewed(n=12, r=4, skew=2.0),
    Projection(n=12, r=3, seed=3),
    ScaledProjection(n=12, r=3, seed=3),
    RotatedDiagonal(n=12, spread=2.0, seed=4),
    DiagonalConstant(n=12, value=0.5),
    Zero(n=12),
])
def spec(request):
    return request.param


def test_every_family_registered():
    assert set(FAMILIES) == {"all-ones", "decay", "gram-gaussian", "gram-uniform", "diag-skewed",
                             "projection", "scaled-projection", "rotated-diag", "diag-const", "zero"}


def test_positive_semidefinite(spec):
    op = generate(spec)
    rng = np.random.default_rng(0)
    for _ in range(20):
        v = rng.standard_normal(op.dim)
        assert v @ op.matvec(v) >= -1e-12 * (v @ v)


def test_same_seed_same_operator(spec):
    assert np.array_equal(spec.generate().to_dense(), spec.generate().to_dense())


def test_all_ones_is_all_ones():
    assert np.allclose(AllOnes(n=5).generate().to_dense(), np.ones((5, 5)), rtol=1e-15)


def test_projection_eigenvalues():
    op = Projection(n=20, r=5, seed=7).generate()
    assert op.exact_trace() == pytest.approx(5.0, abs=1e-8)
    eig = np.linalg.eigvalsh(op.to_dense())
    assert np.all(np.minimum(np.abs(eig), np.abs(eig - 1.0)) < 1e-10)
    assert op.rank_hint == 5


def test_scaled_projection_has_unit_trace():
    op = ScaledProjection(n=20, r=4, seed=1).generate()
    assert op.exact_trace() == pytest.approx(1.0, abs=1e-10)
    eig = np.sort(np.linalg.eigvalsh(op.to_dense()))[::-1]
    assert np.allclose(eig[:4], 0.25, atol=1e-10)
    assert np.allclose(eig[4:], 0.0, atol=1e-10)


def test_orthonormal_columns():
    q = orthonormal_columns(make_generator(3), 30, 10)
    assert np.allclose(q.T @ q, np.eye(10), atol=1e-12)


def test_rank_exceeding_dimension_raises():
    with pytest.raises(RankError, match="exceeds dimension"):
        Projection(n=20, r=30)
    with pytest.raises(RankError, match="exceeds dimension"):
        DiagonalSkewed(n=5, r=6)


def test_invalid_parameters_raise():
    with pytest.raises(ValueError):
        DecayingRankOne(n=5, theta=0.0)
    with pytest.raises(ValueError):
        GramGaussian(n=5, density=1.5)
    with pytest.raises(ValueError):
        AllOnes(n=0)


def test_normalized_gram_has_unit_trace():
    for spec in (GramGaussian(n=30, m=10, seed=2), GramUniform(n=30, m=10, density=0.3, seed=2)):
        assert spec.generate().exact_trace() == pytest.approx(1.0, rel=1e-12)


def test_gram_density():
    c = GramUniform(n=100, m=200, density=0.3, seed=9).factor()
    assert c.nnz / (100 * 200) == pytest.approx(0.3, abs=0.03)


def test_diag_skewed_eigenvalues():
    flat = DiagonalSkewed(n=10, r=4, skew=0.0).eigenvalues()
    assert np.allclose(flat[:4], 0.25)
    assert np.all(flat[4:] == 0.0)
    skewed = DiagonalSkewed(n=10, r=4, skew=3.0).eigenvalues()
    assert skewed.sum() == pytest.approx(1.0)
    assert np.all(np.diff(skewed[:4]) < 0)


def test_rotated_diagonal_spread():
    op = RotatedDiagonal(n=15, spread=2.0, seed=5).generate()
    eig = np.linalg.eigvalsh(op.to_dense())
    assert op.exact_trace() == pytest.approx(1.0, rel=1e-12)
    assert eig.max() / eig.min() <= 3.0 + 1e-9


def test_describe():
    assert DecayingRankOne(n=10, theta=0.1).describe() == "decay:n=10,seed=0,theta=0.1"
    assert spec_fields("decay") == {"n": int, "seed": int, "theta": float}
