import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import naive_f
from spatial_greedy import (
    Box,
    CovarianceModel,
    ProblemInstance,
    SelectionState,
    centroid_greedy,
    greedy_select,
    grid_greedy,
    marginal_gain_sweep,
    matched_rho,
    objective,
)
from spatial_greedy.estimation import extend
from spatial_greedy.selection import GreedyEngine, centroid_ground_set

HALF = CovarianceModel(1.0, 1 / math.sqrt(2), 1.0)


def instance_1d(points, k, lo=None, hi=None, model=HALF):
    pts = np.asarray(points, dtype=float).reshape(-1, 1)
    lo = pts.min() if lo is None else lo
    hi = pts.max() if hi is None else hi
    return ProblemInstance(Box((lo,), (hi,)), pts, k, model)


def random_instance(rng, n_omega, k, d=2, side=3.0):
    model = CovarianceModel(float(rng.uniform(0.5, 2)), float(rng.uniform(0.3, 1.2)), float(rng.uniform(0.05, 0.5)))
    omega = rng.uniform(0, side, size=(n_omega, d))
    return ProblemInstance(Box((0.0,) * d, (side,) * d), omega, k, model)


class TestProblemInstance:
    def test_rejects_outside_points(self):
        with pytest.raises(ValueError, match="outside"):
            ProblemInstance(Box.square(1.0), [[0.5, 1.5]], 1, HALF)

    def test_rejects_bad_budget(self):
        with pytest.raises(ValueError):
            ProblemInstance(Box.square(1.0), [[0.5, 0.5]], 0, HALF)


class TestGreedySelect:
    def test_single_point(self, field_model):
        inst = ProblemInstance(Box.square(40.0), [[10.0, 10.0]], 1, field_model)
        rep = greedy_select(inst, [[10.0, 10.0]])
        np.testing.assert_array_equal(rep.selected, [[10.0, 10.0]])
        s2 = field_model.prior_var
        assert rep.objective == pytest.approx(s2**2 / (s2 + field_model.noise_var), rel=1e-12)

    def test_reselection_when_budget_exceeds_ground_set(self, unit_model):
        inst = instance_1d([0.0, 3.0], 5, model=unit_model)
        ground = np.array([[0.0], [3.0]])
        rep = greedy_select(inst, ground)
        assert len(rep.selected) == 5
        assert len(np.unique(rep.selected)) == 2
        # every repeat adds strictly positive value by direct evaluation
        for i in range(1, 6):
            assert naive_f(unit_model, inst.omega, rep.selected[:i]) > naive_f(unit_model, inst.omega, rep.selected[:i - 1])

    def test_gains_equal_direct_differences(self, rng):
        inst = random_instance(rng, 25, 6)
        ground = rng.uniform(0, 3, size=(40, 2))
        rep = greedy_select(inst, ground)
        for i, g in enumerate(rep.gains):
            before = naive_f(inst.model, inst.omega, rep.selected[:i])
            after = naive_f(inst.model, inst.omega, rep.selected[:i + 1])
            assert g == pytest.approx(after - before, rel=1e-8, abs=1e-8)
        assert sum(rep.gains) == pytest.approx(rep.objective, rel=1e-8)
        assert rep.objective == pytest.approx(objective(inst.model, inst.omega, rep.selected), rel=1e-12)
        assert rep.total_mse == pytest.approx(25 * inst.model.prior_var - rep.objective, rel=1e-12)

    def test_picks_argmax_of_sweep(self, rng):
        inst = random_instance(rng, 15, 5)
        ground = rng.uniform(0, 3, size=(30, 2))
        rep = greedy_select(inst, ground)
        state = SelectionState.empty(inst.model, inst.omega)
        for p in rep.selected:
            gains = marginal_gain_sweep(state, ground)
            np.testing.assert_array_equal(ground[int(np.argmax(gains))], p)
            state = extend(state, p)

    def test_tie_breaks_to_lowest_index(self, unit_model):
        inst = instance_1d([0.0], 1, lo=-1.0, hi=1.0, model=unit_model)
        rep = greedy_select(inst, [[0.5], [-0.5]])
        np.testing.assert_array_equal(rep.selected, [[0.5]])

    def test_close_to_brute_force(self, rng):
        ratios = []
        for _ in range(10):
            inst = random_instance(rng, 10, 3)
            ground = rng.uniform(0, 3, size=(6, 2))
            rep = greedy_select(inst, ground)
            best = max(objective(inst.model, inst.omega, ground[list(c)])
                       for c in itertools.combinations(range(6), 3))
            ratios.append(rep.objective / best)
            assert rep.objective >= 0.5 * best
        assert np.mean(ratios) > 0.95

    def test_early_stop(self, unit_model):
        inst = ProblemInstance(Box((0.0,), (1e4,)), [[0.0]], 3, unit_model)
        rep = greedy_select(inst, [[1e4]])
        assert len(rep.selected) == 0 and rep.objective == 0.0
        assert "stopped early" in rep.notes[0]

    def test_empty_ground_set(self, unit_model):
        with pytest.raises(ValueError):
            greedy_select(instance_1d([0.0], 1, model=unit_model), np.zeros((0, 1)))

    def test_uncached_engine_matches(self, rng):
        inst = random_instance(rng, 30, 8)
        ground = rng.uniform(0, 3, size=(200, 2))
        a = greedy_select(inst, ground)
        b = greedy_select(inst, ground, cache_bytes=0)
        np.testing.assert_array_equal(a.selected, b.selected)
        np.testing.assert_allclose(a.gains, b.gains, rtol=1e-9)

    def test_engine_gains_match_sweep(self, rng):
        inst = random_instance(rng, 20, 4)
        ground = rng.uniform(0, 3, size=(25, 2))
        eng = GreedyEngine(inst.model, inst.omega, ground, 4)
        state = SelectionState.empty(inst.model, inst.omega)
        for j in (3, 7, 3, 0):
            np.testing.assert_allclose(eng.gains(), marginal_gain_sweep(state, ground), rtol=1e-9, atol=1e-12)
            eng.add(j)
            state = extend(state, ground[j])

    def test_deterministic(self, rng):
        inst = random_instance(rng, 30, 6)
        a, b = centroid_greedy(inst), centroid_greedy(inst)
        np.testing.assert_array_equal(a.selected, b.selected)
        assert a.gains == b.gains and a.objective == b.objective


class TestGridGreedy:
    def test_connected_pair_finds_midpoint(self):
        inst = instance_1d([0.0, 0.9], 1)
        rep = grid_greedy(inst, 1001)
        assert rep.ground_set_size == 1001
        assert abs(rep.selected[0, 0] - 0.45) <= 0.9 / 1000

    def test_rho_one_center(self, field_model):
        inst = ProblemInstance(Box.square(40.0), [[5.0, 5.0], [30.0, 12.0]], 3, field_model)
        rep = grid_greedy(inst, 1)
        assert rep.ground_set_size == 1
        assert (rep.selected == [20.0, 20.0]).all() and len(rep.selected) == 3

    @pytest.mark.parametrize("n,rho", [(20, 7), (300, 25), (1000, 45)])
    def test_matched_rho(self, n, rho):
        assert matched_rho(n) == rho

    @given(st.integers(1, 100_000))
    def test_matched_rho_covers(self, n):
        rho = matched_rho(n)
        assert rho * rho >= 2 * n > (rho - 1) ** 2
        assert rho == math.ceil(math.sqrt(2 * n))

    def test_grid_size_reported(self, rng):
        inst = random_instance(rng, 10, 2)
        assert grid_greedy(inst, 6).ground_set_size == 36


class TestCentroidGreedy:
    def test_connected_pair_picks_midpoint(self):
        rep = centroid_greedy(instance_1d([0.0, 0.9], 1))
        assert rep.ground_set_size == 3
        assert rep.selected[0, 0] == pytest.approx(0.45, abs=1e-15)

    def test_disconnected_pair_picks_endpoint(self):
        inst = instance_1d([0.0, 1.1], 1)
        rep = centroid_greedy(inst)
        # no edge, so only the two points themselves are candidates
        assert rep.ground_set_size == 2
        assert rep.selected[0, 0] in (0.0, 1.1)
        # the excluded midpoint is a local minimum of the continuous objective
        mid = naive_f(HALF, inst.omega, [[0.55]])
        assert naive_f(HALF, inst.omega, [[0.5]]) > mid < naive_f(HALF, inst.omega, [[0.6]])

    def test_single_prediction_point(self, field_model):
        inst = ProblemInstance(Box.square(40.0), [[3.0, 4.0]], 1, field_model)
        rep = centroid_greedy(inst)
        np.testing.assert_array_equal(rep.selected, [[3.0, 4.0]])

    @settings(max_examples=25, deadline=None)
    @given(seed=st.integers(0, 2**32 - 1), n=st.integers(1, 40))
    def test_ground_set_bounded(self, seed, n):
        inst = random_instance(np.random.default_rng(seed), n, 3)
        ground = centroid_ground_set(inst)
        assert len(ground) <= 2 * n
        assert inst.box.contains(ground).all()
        rep = centroid_greedy(inst)
        assert rep.objective == pytest.approx(sum(rep.gains), rel=1e-8, abs=1e-10)
        assert all(g >= 0 for g in rep.gains)
