import math

import numpy as np
import pytest

from concept_forge.cqm import CqmConfig, evaluate
from concept_forge.synthgen import (AIRFOIL_SETUPS, INCONSISTENT, BlobSpec, airfoil_surrogate, blobs,
                                    cost_quality_demo, enclosing_grid, figure1_fixture)


def lloyd(x, k, seed, iters=100):
    rng = np.random.default_rng(seed)
    c = x[rng.choice(len(x), k, replace=False)]
    for _ in range(iters):
        lab = np.argmin(((x[:, None] - c[None]) ** 2).sum(axis=2), axis=1)
        c = np.array([x[lab == j].mean(axis=0) for j in range(k)])
    return lab


def separable(x, lab):
    a, b = x[lab == 0], x[lab == 1]
    if len(a) == 0 or len(b) == 0:
        return False
    lo, hi = (a, b) if a[:, 0].mean() < b[:, 0].mean() else (b, a)
    return lo[:, 0].max() < hi[:, 0].min() and lo[:, 1].max() < hi[:, 1].min()


class TestFigure1:
    def test_shape(self):
        d, p, grid = figure1_fixture()
        assert d.n_samples == 10 and p.dims == (2, 2, 2)
        assert grid.n_concepts == 3 and d.is_normalized


class TestBlobs:
    def test_deterministic(self):
        spec = BlobSpec.separated((2, 3), 3, 100, 0.7, seed=4)
        a, b = blobs(spec), blobs(spec)
        np.testing.assert_array_equal(a.dataset.samples, b.dataset.samples)
        np.testing.assert_array_equal(a.labels, b.labels)

    def test_consistent_enclosing_grid_is_optimal(self):
        spec = BlobSpec.separated((2, 2), 3, 300, 1.0, seed=0)
        s = blobs(spec)
        r = evaluate(enclosing_grid(spec, s.dataset), s.dataset, s.partition, None, CqmConfig(0.0, 0.0))
        assert r.total_q == 1.0
        np.testing.assert_array_equal(r.labels, s.labels)

    def test_samples_lie_in_their_balls(self):
        spec = BlobSpec.separated((3, 1, 2), 4, 200, 0.6, seed=2)
        s = blobs(spec)
        grid = enclosing_grid(spec, s.dataset)
        xs = s.partition.project(s.dataset)
        for i in range(0, 200, 7):
            for k in range(3):
                assert grid[int(s.identities[i, k])][k].contains(xs[i, s.partition.space_slice(k)])

    @pytest.mark.parametrize("consistency", [0.0, 0.5, 0.8, 1.0])
    def test_inconsistent_fraction(self, consistency):
        n = 2000
        s = blobs(BlobSpec.separated((2, 2), 3, n, consistency, seed=1))
        frac = np.mean(s.labels == INCONSISTENT)
        p = 1 - consistency
        assert abs(frac - p) <= 3 * math.sqrt(p * (1 - p) / n) + 1e-12
        bad = s.labels == INCONSISTENT
        # inconsistent samples really disagree across spaces; consistent ones agree
        assert np.all(np.any(s.identities[bad] != s.identities[bad, :1], axis=1))
        assert np.all(s.identities[~bad] == s.labels[~bad, None])

    @pytest.mark.parametrize("kwargs", [dict(dims=()), dict(consistency=1.5), dict(n_blobs=0)])
    def test_invalid_spec(self, kwargs):
        base = dict(dims=(2,), n_blobs=1, centers=(((0.5, 0.5),),), spreads=((0.1,),))
        base.update(kwargs)
        with pytest.raises(ValueError):
            BlobSpec(**base)


class TestCostQuality:
    def test_partitions(self):
        d, parts = cost_quality_demo(50, 0)
        assert d.feature_names == ("cost", "quality")
        assert parts["joint"].dims == (2,) and parts["separate"].dims == (1, 1)

    @pytest.mark.parametrize("seed", range(5))
    def test_joint_clustering_does_not_separate(self, seed):
        # the baseline the separate-space setup is meant to beat
        d, _ = cost_quality_demo(200, seed)
        assert not separable(d.samples, lloyd(d.samples, 2, seed))


class TestAirfoil:
    @pytest.mark.parametrize("name", sorted(AIRFOIL_SETUPS))
    def test_shapes(self, name):
        dims = AIRFOIL_SETUPS[name]
        s = airfoil_surrogate(dims, n_samples=300, seed=0)
        assert s.partition.dims == dims
        assert s.dataset.n_samples == 300 and s.dataset.n_features == sum(dims)

    def test_camber_features_follow_design(self):
        s = airfoil_surrogate((4, 5, 2, 2, 2), n_samples=500, seed=0)
        x = s.dataset.samples
        design = np.hstack([x[:, :4], np.ones((500, 1))])
        coef, *_ = np.linalg.lstsq(design, x[:, 4:9], rcond=None)
        resid = x[:, 4:9] - design @ coef
        r2 = 1 - resid.var(axis=0) / x[:, 4:9].var(axis=0)
        assert np.all(r2 > 0.75)
