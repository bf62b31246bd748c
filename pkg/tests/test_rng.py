import numpy as np

from levylab.rng import RngStream


def test_same_pair_reproduces_sequence():
    a = RngStream(123, 4).generator().normal(size=100)
    b = RngStream(123, 4).generator().normal(size=100)
    assert np.array_equal(a, b)


def test_distinct_streams_differ():
    a = RngStream(123, 0).generator().normal(size=100)
    b = RngStream(123, 1).generator().normal(size=100)
    c = RngStream(124, 0).generator().normal(size=100)
    assert not np.array_equal(a, b)
    assert not np.array_equal(a, c)


def test_substream_deterministic_and_independent():
    root = RngStream(7)
    a1 = root.substream(3).generator().normal(size=50)
    a2 = root.substream(3).generator().normal(size=50)
    b = root.substream(4).generator().normal(size=50)
    assert np.array_equal(a1, a2)
    assert not np.array_equal(a1, b)


def test_nested_substreams_distinct_from_flat():
    root = RngStream(7)
    nested = root.substream(1).substream(2).generator().normal(size=50)
    flat = root.substream(1, 2).generator().normal(size=50)
    # both spellings address the same child stream
    assert np.array_equal(nested, flat)
    assert not np.array_equal(nested, root.substream(1).generator().normal(size=50))
