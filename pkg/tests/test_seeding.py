import itertools

import numpy as np

from blockboot.seeding import float_key, standard_normal_stream, subseed, substream


def test_substream_is_deterministic():
    a = substream(42, 1, 2).standard_normal(100)
    b = substream(42, 1, 2).standard_normal(100)
    assert np.array_equal(a, b)


def test_substream_keys_matter():
    base = substream(42).standard_normal(1000)
    for keys in [(0,), (1,), (0, 0), (42,)]:
        other = substream(42, *keys).standard_normal(1000)
        assert np.any(base != other)


def test_substream_accepts_negative_seed():
    a = substream(-7).standard_normal(10)
    b = substream(-7).standard_normal(10)
    assert np.array_equal(a, b)


def test_subseed_repeatable_and_distinct():
    assert subseed(1, 2, 3) == subseed(1, 2, 3)
    seen = {subseed(9, k) for k in range(1000)}
    assert len(seen) == 1000


def test_float_key_distinguishes_values():
    assert float_key(0.5) == float_key(0.5)
    assert float_key(0.5) != float_key(0.75)
    assert float_key(1.0) != float_key(-1.0)


def test_stream_law_of_large_numbers():
    draws = np.fromiter(itertools.islice(standard_normal_stream(42), 10**6), dtype=float)
    assert abs(draws.mean()) < 4 / np.sqrt(10**6)
    assert abs(draws.var() - 1.0) < 0.01


def test_stream_determinism_bitwise():
    a = np.fromiter(itertools.islice(standard_normal_stream(42), 10_000), dtype=float)
    b = np.fromiter(itertools.islice(standard_normal_stream(42), 10_000), dtype=float)
    assert np.array_equal(a, b)


def test_stream_seed_sensitivity():
    a = np.fromiter(itertools.islice(standard_normal_stream(1), 1000), dtype=float)
    b = np.fromiter(itertools.islice(standard_normal_stream(2), 1000), dtype=float)
    assert np.any(a != b)
