import numpy as np

from levylab import substream


def test_substream_deterministic():
    a = substream(42, 1, 2).standard_normal(8)
    b = substream(42, 1, 2).standard_normal(8)
    assert np.array_equal(a, b)


def test_substream_path_separation():
    draws = {
        path: tuple(substream(42, *path).standard_normal(4))
        for path in [(0,), (1,), (0, 0), (0, 1), (1, 0)]
    }
    vals = list(draws.values())
    assert len(set(vals)) == len(vals)


def test_substream_master_seed_separation():
    a = substream(1, 5).standard_normal(4)
    b = substream(2, 5).standard_normal(4)
    assert not np.array_equal(a, b)
