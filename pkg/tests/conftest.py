"""Shared fixtures: the benchmark arc family and material parameters."""

import numpy as np
import pytest

from arcrom.geometry import ArcFamily, GlobalGeometry, ring_segments, sample_arcs, trig_basis
from arcrom.kernel import ElasticParams


@pytest.fixture(scope="session")
def bench_geom():
    return GlobalGeometry(box_half_width=10.0, r_min=0.56, r_max=0.93,
                          d_min=5.0, d_max=21.0, s=12)


@pytest.fixture(scope="session")
def bench_basis():
    return trig_basis()


@pytest.fixture(scope="session")
def bench_family(bench_geom, bench_basis):
    return ArcFamily(bench_geom, bench_basis)


@pytest.fixture(scope="session")
def elastic_params():
    return ElasticParams(omega=10.0, lame_lambda=2.0, lame_mu=1.0)


@pytest.fixture(scope="session")
def ring_segs(bench_geom):
    return ring_segments(bench_geom)


@pytest.fixture
def make_arcs(ring_segs, bench_family):
    def _make(seed=0, count=None):
        rng = np.random.default_rng(seed)
        arcs = sample_arcs(ring_segs, bench_family, rng)
        return arcs if count is None else arcs[:count]
    return _make
