import pytest
import numpy as np
from scipy import stats
from tracest.kinds import Method
from tracest.sampler import (ExhaustedError, SeededStream, draw_probe, make_generator,
                             spawn_substream, standard_normals)


@pytest.fixture
def stream():
    return SeededStream(42)


def test_rademacher_support(stream: SeededStream):
    w = stream.probe_at(Method.HUTCHINSON, 1000, 0)
    assert set(np.unique(w)) <= {-1.0, 1.0}


def test_unit_probe_shape(stream: SeededStream):
    for method in (Method.UNIT_WITH_REPLACEMENT, Method.UNIT_WITHOUT_REPLACEMENT):
        w = stream.probe_at(method, 3, 0)
        assert np.count_nonzero(w) == 1
        assert w.max() == pytest.approx(np.sqrt(3.0))


def test_without_replacement_is_permutation(stream: SeededStream):
    drawn = [stream.next_index(Method.UNIT_WITHOUT_REPLACEMENT, 5) for _ in range(5)]
    assert sorted(drawn) == [0, 1, 2, 3, 4]
    with pytest.raises(ExhaustedError, match="exhausted"):
        stream.next_index(Method.UNIT_WITHOUT_REPLACEMENT, 5)


def test_probe_depends_only_on_index(stream: SeededStream):
    """Test that the k-th draw does not depend on what was consumed before it"""
    expected = stream.probe_at(Method.GAUSSIAN, 10, 3)
    for _ in range(3):
        draw_probe(Method.GAUSSIAN, 10, stream)
    assert stream.counter == 3
    assert np.array_equal(draw_probe(Method.GAUSSIAN, 10, stream), expected)


def test_copy_reproduces(stream: SeededStream):
    stream.next_probe(Method.HUTCHINSON, 4)
    other = stream.copy()
    assert other == stream
    assert np.array_equal(other.next_probe(Method.HUTCHINSON, 4), stream.next_probe(Method.HUTCHINSON, 4))


def test_spawn_substream():
    assert spawn_substream(0, 1) == spawn_substream(0, 1)
    seeds = {spawn_substream(0, t).seed for t in range(1000)}
    assert len(seeds) == 1000
    assert spawn_substream(0, 1).seed != spawn_substream(1, 1).seed


def test_slots_differ():
    assert make_generator(1, 0).random() != make_generator(1, 1).random()


def test_odd_normal_count():
    assert standard_normals(make_generator(0), 5).shape == (5,)


def test_hutchinson_entries_centered():
    stream = SeededStream(7)
    w = np.concatenate([stream.next_probe(Method.HUTCHINSON, 1000) for _ in range(1000)])
    assert abs(w.mean()) <= 0.004


def test_gaussian_moments():
    stream = SeededStream(11)
    w = np.concatenate([stream.next_probe(Method.GAUSSIAN, 1000) for _ in range(1000)])
    assert abs(w.mean()) <= 0.005
    assert 0.99 <= w.var() <= 1.01
    assert stats.kstest(w[:20000], "norm").pvalue > 1e-3


@pytest.mark.slow
def test_unit_indices_uniform():
    stream = SeededStream(3)
    counts = np.bincount([stream.next_index(Method.UNIT_WITH_REPLACEMENT, 10) for _ in range(100000)],
                         minlength=10)
    assert stats.chisquare(counts).pvalue > 1e-3


def test_unit_probe_rejects_other_methods(stream: SeededStream):
    with pytest.raises(ValueError):
        stream.unit_index_at(Method.GAUSSIAN, 5, 0)
