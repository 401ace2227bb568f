"""Low-discrepancy sampler: determinism, range, prefix property."""

import numpy as np
import pytest

from arcrom.sampling import halton, halton_unit_box


def test_deterministic():
    assert np.array_equal(halton(5, 40, start=7), halton(5, 40, start=7))


def test_range_and_shape():
    pts = halton(8, 100)
    assert pts.shape == (100, 8)
    assert np.all(pts >= 0) and np.all(pts < 1)


def test_start_offsets_are_prefix_consistent():
    long = halton(3, 30, start=0)
    tail = halton(3, 20, start=10)
    assert np.array_equal(long[10:], tail)


def test_unit_box_is_centered():
    pts = halton_unit_box(4, 200)
    assert np.all(np.abs(pts) <= 0.5)
    assert np.abs(pts.mean(axis=0)).max() < 0.05


def test_first_van_der_corput_values():
    pts = halton(2, 4)
    assert np.allclose(pts[:, 0], [0.5, 0.25, 0.75, 0.125])
    assert np.allclose(pts[:, 1], [1 / 3, 2 / 3, 1 / 9, 4 / 9])


def test_dimension_limit():
    with pytest.raises(ValueError):
        halton(64, 10)
