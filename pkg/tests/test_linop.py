import pytest
import numpy as np
import scipy.sparse as sp
from tracest.generators import AllOnes, DecayingRankOne, DiagonalConstant, decay_norm2
from tracest.linop import (CompositeOperator, DenseOperator, DiagonalOperator, DimensionError,
                           GramOperator, LowRankOperator, NonFiniteVectorError, RankOneOperator,
                           SparseOperator, exact_trace, matvec, scaled)


def _operators():
    rng = np.random.default_rng(1)
    c = rng.standard_normal((4, 8))
    q, _ = np.linalg.qr(rng.standard_normal((8, 3)))
    dense = c.T @ c
    return [
        DenseOperator(dense),
        DiagonalOperator(rng.random(8)),
        SparseOperator(sp.csr_matrix(dense)),
        RankOneOperator(rng.random(8) + 0.1, scale=2.0),
        GramOperator(c),
        GramOperator(sp.csr_matrix(c)),
        LowRankOperator(q, [3.0, 2.0, 1.0]),
        CompositeOperator([(1.0, DenseOperator(dense)), (0.5, DiagonalOperator(np.ones(8)))]),
    ]


@pytest.fixture(params=range(8))
def operator(request):
    return _operators()[request.param]


def test_diagonal_matvec():
    op = DiagonalOperator([1.0, 2.0, 3.0])
    assert np.array_equal(matvec(op, np.ones(3)), [1.0, 2.0, 3.0])


def test_all_ones_matvec():
    op = AllOnes(n=3).generate()
    assert np.allclose(op.matvec([1.0, 0.0, 0.0]), np.ones(3), rtol=1e-15)


def test_rank_one_fixes_its_vector():
    spec = DecayingRankOne(n=20, theta=0.1)
    x = spec.vector()
    assert np.allclose(spec.generate().matvec(x), x, rtol=1e-12)


def test_dimension_mismatch_raises(operator):
    with pytest.raises(DimensionError, match="dimension"):
        operator.matvec(np.ones(operator.dim + 1))


def test_non_finite_input_raises(operator):
    v = np.ones(operator.dim)
    v[0] = np.nan
    with pytest.raises(NonFiniteVectorError):
        operator.matvec(v)


def test_linearity(operator):
    """Test A(au + bv) = aAu + bAv on random combinations"""
    rng = np.random.default_rng(2)
    for _ in range(100):
        u, v = rng.standard_normal((2, operator.dim))
        a, b = rng.standard_normal(2)
        lhs = operator.matvec(a * u + b * v)
        rhs = a * operator.matvec(u) + b * operator.matvec(v)
        assert np.linalg.norm(lhs - rhs) <= 1e-10 * max(1.0, np.linalg.norm(rhs))


def test_symmetry(operator):
    rng = np.random.default_rng(3)
    for _ in range(20):
        u, v = rng.standard_normal((2, operator.dim))
        assert u @ operator.matvec(v) == pytest.approx(v @ operator.matvec(u), rel=1e-10, abs=1e-12)


def test_positive_semidefinite(operator):
    rng = np.random.default_rng(4)
    for _ in range(20):
        v = rng.standard_normal(operator.dim)
        assert v @ operator.matvec(v) >= -1e-12 * (v @ v)


def test_diagonal_matches_dense(operator):
    assert np.allclose(operator.diagonal(), np.diag(operator.to_dense()), rtol=1e-12, atol=1e-14)
    assert exact_trace(operator) == pytest.approx(np.trace(operator.to_dense()), rel=1e-12)


def test_exact_trace_examples():
    assert DiagonalConstant(n=5, value=2.0).generate().exact_trace() == 10.0
    assert AllOnes(n=7).generate().exact_trace() == pytest.approx(7.0, rel=1e-15)
    assert DecayingRankOne(n=4, theta=0.1).generate().exact_trace() == pytest.approx(1.0, rel=1e-15)


def test_decay_norm2_closed_form():
    for theta, n in ((0.1, 50), (0.5, 10), (1e-3, 1000)):
        x = DecayingRankOne(n=n, theta=theta).vector()
        assert decay_norm2(theta, n) == pytest.approx(float(x @ x), rel=1e-10)


def test_scaled():
    op = scaled(DiagonalOperator([1.0, 2.0]), 3.0)
    assert np.array_equal(op.matvec([1.0, 1.0]), [3.0, 6.0])
    assert op.exact_trace() == 9.0


def test_composite_dimension_mismatch_raises():
    with pytest.raises(DimensionError):
        CompositeOperator([(1.0, DiagonalOperator([1.0])), (1.0, DiagonalOperator([1.0, 2.0]))])


def test_non_square_dense_raises():
    with pytest.raises(DimensionError):
        DenseOperator(np.ones((2, 3)))


def test_dense_symmetry_flag():
    assert DenseOperator([[1.0, 2.0], [2.0, 1.0]]).symmetric
    assert not DenseOperator([[1.0, 2.0], [0.0, 1.0]]).symmetric
