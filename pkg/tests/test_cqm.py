import math

import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from concept_forge import kernels
from concept_forge.cqm import (ConceptAssignment, CqmConfig, assign, concept_quality, evaluate,
                               quality_from_counts, scaling_f, total_quality)
from concept_forge.dataset import Dataset, PreferenceSet, normalize, partition_features
from concept_forge.regions import EllipsoidRegion, RegionGrid, candidate_sets, decode, genome_length

from conftest import brute_force_assign

# candidate sets of the ten-sample walkthrough, 1-based sample numbers
FIG1_SETS = [
    [{1, 2, 3, 4, 5}, {2, 3, 4, 5, 6, 9}, {1, 2, 3, 4, 5, 6}],
    [{6, 7, 8, 9}, {4, 7, 8}, {1, 5, 6, 7, 8, 9}],
    [{8, 10}, {5, 9, 10}, {4, 10}],
]


def hand_f(x, y):
    # quarter-ellipse ramps written out independently of the library
    if y == 0 or (x >= y and 1 - x >= y):
        return 1.0
    t = (x - y) / y if x < y else (y - (1 - x)) / y
    return math.sqrt(1 - t * t)


class TestScalingF:
    def test_reference_value(self):
        assert scaling_f(0.1, 0.15) == pytest.approx(0.9428, abs=1e-4)
        assert scaling_f(0.1, 0.15) == pytest.approx(math.sqrt(8) / 3)

    @settings(max_examples=300)
    @given(st.floats(0, 1), st.floats(0, 0.5))
    def test_properties(self, x, y):
        f = scaling_f(x, y)
        assert 0.0 <= f <= 1.0
        assert f == pytest.approx(hand_f(x, y), abs=1e-12)
        # mirror symmetry, wherever 1 - x is exact in floating point
        assume(1 - (1 - x) == x)
        assert f == pytest.approx(scaling_f(1 - x, y), abs=1e-9)
        if x >= y and 1 - x >= y:
            assert f == 1.0

    @given(st.floats(0, 0.5, exclude_min=True))
    def test_endpoints(self, y):
        assert scaling_f(0.0, y) == 0.0
        assert scaling_f(1.0, y) == 0.0

    def test_y_zero_disables(self):
        assert scaling_f(0.0, 0.0) == 1.0 and scaling_f(1.0, 0.0) == 1.0

    @pytest.mark.parametrize("x, y", [(-0.1, 0.1), (1.1, 0.1), (0.5, 0.6), (0.5, -0.1)])
    def test_domain(self, x, y):
        with pytest.raises(ValueError):
            scaling_f(x, y)


class TestAssign:
    @settings(max_examples=200, deadline=None)
    @given(st.integers(1, 4), st.integers(1, 4), st.integers(1, 30), st.integers(0, 2**31), st.floats(0.1, 0.9))
    def test_matches_brute_force(self, nc, nds, nd, seed, density):
        cand = np.random.default_rng(seed).random((nc, nds, nd)) < density
        a = assign(cand)
        np.testing.assert_array_equal(a.labels, brute_force_assign(cand))
        np.testing.assert_array_equal(a.candidate_counts, cand.sum(axis=2))

    def test_concepts_are_disjoint_and_inside_their_regions(self):
        cand = np.random.default_rng(0).random((3, 2, 200)) < 0.4
        a = assign(cand)
        sets = a.concept_sets
        for i, s in enumerate(sets):
            for j in range(i + 1, len(sets)):
                assert not set(s) & set(sets[j])
            assert cand[i][:, s].all()

    def test_needs_3d(self):
        with pytest.raises(ValueError):
            assign(np.ones((2, 2), dtype=bool))


class TestWorkedExample:
    def test_candidate_sets(self, fig1):
        d, p, grid = fig1
        cand = candidate_sets(grid, d, p)
        for a in range(3):
            for k in range(3):
                assert set((np.flatnonzero(cand[a, k]) + 1).tolist()) == FIG1_SETS[a][k]

    def test_quality(self, fig1):
        d, p, grid = fig1
        r = evaluate(grid, d, p, None, CqmConfig(s=0.15, p=0.01))
        assert [set(np.array(s) + 1) for s in r.assignment.concept_sets] == [{2, 3}, {7}, {10}]
        expected = []
        for members, sets in zip((2, 1, 1), FIG1_SETS):
            geo = math.prod(members / len(c) for c in sets) ** (1 / 3)
            expected.append(geo * hand_f(members / 10, 0.15))
        got = [rec.q_alpha for rec in r.per_concept]
        np.testing.assert_allclose(got, expected, rtol=1e-12)
        assert r.total_q == pytest.approx(math.prod(expected), rel=1e-12)
        assert r.total_q == pytest.approx(0.0330584, abs=1e-7)


class TestQuality:
    def test_empty_candidate_region_zeroes_concept(self):
        a = ConceptAssignment(np.array([-1, -1]), np.array([[2, 0]]))
        rec = concept_quality(a, 0, 2, None, CqmConfig())
        assert rec.q_alpha == 0.0

    def test_single_sample_single_concept(self):
        d = Dataset(np.array([[0.3]]), ("a",))
        p = partition_features(d, [["a"]])
        grid = RegionGrid(((EllipsoidRegion.ball([0.3], 0.1),),))
        assert evaluate(grid, d, p, None, CqmConfig(s=0.0, p=0.0)).total_q == 1.0
        # the concept holds the whole dataset, a fraction of 1, which the size ramp sends to 0
        assert evaluate(grid, d, p, None, CqmConfig(s=0.01, p=0.0)).total_q == 0.0

    def test_preference_factor(self):
        labels = np.array([0, 0, 0, -1])
        a = ConceptAssignment(labels, np.array([[3, 3]]))
        prefs = PreferenceSet((0, 3))
        rec = concept_quality(a, 0, 4, prefs, CqmConfig(s=0.0, p=0.5))
        assert rec.n_preferences == 1
        assert rec.preference_factor == pytest.approx(hand_f(0.5, 0.5))
        no_pref = concept_quality(a, 0, 4, None, CqmConfig(s=0.0, p=0.5))
        assert no_pref.preference_factor == 1.0

    def test_total_is_product(self):
        a = assign(np.random.default_rng(1).random((3, 2, 40)) < 0.3)
        recs = [concept_quality(a, k, 40, None, CqmConfig()) for k in range(3)]
        assert total_quality(recs) == pytest.approx(math.prod(r.q_alpha for r in recs))
        with pytest.raises(ValueError):
            total_quality([])

    @pytest.mark.parametrize("bad", [dict(s=-0.1), dict(s=0.6), dict(p=0.51)])
    def test_config_domain(self, bad):
        with pytest.raises(ValueError):
            CqmConfig(**bad)

    def test_report_is_one_based(self, fig1):
        d, p, grid = fig1
        doc = evaluate(grid, d, p, None, CqmConfig(0.15, 0.01)).to_json_dict()
        assert [c["concept"] for c in doc["concepts"]] == [1, 2, 3]
        assert doc["n_unassigned"] == 6


class TestInvariances:
    def test_concept_permutation(self, fig1):
        d, p, grid = fig1
        cfg = CqmConfig(0.15, 0.01)
        base = evaluate(grid, d, p, None, cfg)
        perm = [2, 0, 1]
        shuffled = evaluate(RegionGrid(tuple(grid.regions[i] for i in perm)), d, p, None, cfg)
        assert shuffled.total_q == pytest.approx(base.total_q, rel=1e-12)
        assert [shuffled.assignment.concept_sets[j] for j in range(3)] == \
            [base.assignment.concept_sets[i] for i in perm]

    @settings(max_examples=20, deadline=None)
    @given(arrays(np.float64, 2, elements=st.floats(0.1, 100)), arrays(np.float64, 2, elements=st.floats(-50, 50)))
    def test_raw_affine_rescaling(self, scale, shift):
        # normalization absorbs any positive per-feature affine map of the raw data
        raw = np.random.default_rng(5).uniform(0, 1, (60, 2))
        d1 = normalize(Dataset(raw, ("a", "b")))
        d2 = normalize(Dataset(raw * scale + shift, ("a", "b")))
        p = partition_features(d1, [["a"], ["b"]])
        grid = decode(np.random.default_rng(6).normal(0.5, 0.3, genome_length(p.dims, 2)), p, 2)
        q1 = evaluate(grid, d1, p).total_q
        q2 = evaluate(grid, d2, p).total_q
        np.testing.assert_allclose(d1.samples, d2.samples, atol=1e-9)
        assert q1 == pytest.approx(q2, abs=1e-12)

    @pytest.mark.parametrize("seed", range(10))
    def test_counts_path_matches_evaluate(self, seed):
        rng = np.random.default_rng(seed)
        d = Dataset(rng.uniform(0, 1, (80, 4)), ("a", "b", "c", "d"))
        p = partition_features(d, [["a", "b"], ["c", "d"]])
        genome = rng.normal(0.5, 0.2, genome_length(p.dims, 3))
        prefs = PreferenceSet(tuple(rng.choice(80, 7, replace=False)))
        cfg = CqmConfig(0.05, 0.1)
        labels = np.empty(80, dtype=np.int64)
        cand, members = kernels.genome_counts(genome, p.project(d), np.array(p.dims), 3, labels)
        hits = labels[prefs.as_array()]
        pm = np.bincount(hits[hits >= 0], minlength=3)
        q_fast = quality_from_counts(cand, members, pm, 80, len(prefs), cfg)
        assert q_fast == evaluate(decode(genome, p, 3), d, p, prefs, cfg).total_q
