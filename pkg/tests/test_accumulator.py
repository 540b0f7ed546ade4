import pytest
import numpy as np
from tracest.accumulator import KahanAccumulator, MaxSizeExceededError, SampleBuffer, kahan_rows


@pytest.fixture
def empty_buffer():
    data = SampleBuffer(3, 4)
    return data


@pytest.fixture
def loaded_buffer(empty_buffer: SampleBuffer):
    rng = np.random.default_rng(0)
    for _ in range(10):
        empty_buffer.extend(rng.random((3, 5)))
    return empty_buffer


@pytest.fixture
def sample_block():
    return np.array([[1.0, 2.0, 3.0], [4.0, 5.0, 6.0], [7.0, 8.0, 9.0]])


def test_empty(empty_buffer: SampleBuffer):
    """Test that an empty buffer is empty"""
    assert empty_buffer.empty()
    assert empty_buffer.size() == 0


def test_extend(empty_buffer: SampleBuffer, sample_block: np.ndarray):
    """Test addition of a single block"""
    empty_buffer.extend(sample_block)
    assert empty_buffer.size() == 3
    assert np.array_equal(empty_buffer.data[:, :3], sample_block)


def test_extend_doubles_capacity(empty_buffer: SampleBuffer):
    """Test that capacity doubles until the new block fits"""
    empty_buffer.extend(np.ones((3, 10)))
    assert empty_buffer.capacity() == 16
    assert empty_buffer.size() == 10


def test_resize_keeps_data(loaded_buffer: SampleBuffer):
    before = loaded_buffer.data[:, :loaded_buffer.size()].copy()
    loaded_buffer.resize(4 * loaded_buffer.capacity())
    assert np.array_equal(loaded_buffer.data[:, :loaded_buffer.size()], before)


def test_wrong_row_count_raises(empty_buffer: SampleBuffer):
    with pytest.raises(ValueError):
        empty_buffer.extend(np.ones((2, 3)))


def test_max_size_raises(empty_buffer: SampleBuffer, monkeypatch):
    monkeypatch.setattr(SampleBuffer, "MAX_NUM_SAMPLES", 8)
    with pytest.raises(MaxSizeExceededError):
        empty_buffer.extend(np.ones((3, 9)))


def test_means(loaded_buffer: SampleBuffer):
    """Test per-trial means of a prefix against numpy"""
    means = loaded_buffer.means(17)
    assert means.shape == (3,)
    assert np.allclose(means, loaded_buffer.data[:, :17].mean(axis=1), rtol=1e-14)


def test_means_beyond_count_raises(loaded_buffer: SampleBuffer):
    with pytest.raises(IndexError):
        loaded_buffer.means(loaded_buffer.size() + 1)
    with pytest.raises(IndexError):
        loaded_buffer.means(0)


def test_accumulator_matches_rows():
    """Test that streaming and row-wise compensated sums agree bit for bit"""
    values = np.random.default_rng(5).standard_normal(1000) * 1e3
    acc = KahanAccumulator()
    for x in values:
        acc.add(float(x))
    assert acc.total == kahan_rows(values[None, :], values.size)[0]
    assert acc.mean == kahan_rows(values[None, :], values.size)[0] / values.size


def test_compensated_sum_is_accurate():
    acc = KahanAccumulator()
    acc.add(1.0)
    for _ in range(10000):
        acc.add(1e-16)
    assert acc.total == pytest.approx(1.0 + 1e-12, abs=1e-15)


def test_accumulator_moments():
    acc = KahanAccumulator()
    for x in (1.0, 2.0, 3.0, 4.0):
        acc.add(x)
    assert acc.count == 4
    assert acc.mean == 2.5
    assert acc.mean_of_squares == 7.5
    assert acc.sample_variance == pytest.approx(5.0 / 3.0)


def test_empty_accumulator_raises():
    with pytest.raises(IndexError):
        KahanAccumulator().mean
