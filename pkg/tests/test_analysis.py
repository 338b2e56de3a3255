import itertools
import math

import numpy as np
import pytest

from conftest import naive_f
from spatial_greedy import Box, CovarianceModel, ProblemInstance, greedy_select, objective
from spatial_greedy.analysis import (
    BOUNDARY_RESOLUTION,
    ENDPOINT_RATIO_BOUND,
    OneDTwoPointCase,
    brute_force_subsets,
    check_endpoint_ratio,
    check_midpoint_criterion,
    dense_line_search,
    midpoint_is_local_min,
    reproduce_example1,
    run_verification,
)

HALF = CovarianceModel(1.0, 1 / math.sqrt(2), 1.0)


def small_instance(rng, n_omega=8, k=2):
    model = CovarianceModel(1.0, 0.7, 0.2)
    omega = rng.uniform(0, 2, size=(n_omega, 2))
    return ProblemInstance(Box.square(2.0), omega, k, model)


class TestBruteForce:
    def test_full_set(self, rng):
        inst = small_instance(rng)
        ground = rng.uniform(0, 2, size=(4, 2))
        res = brute_force_subsets(inst, ground, 4)
        assert res.evaluations == 1
        assert res.best_value == pytest.approx(objective(inst.model, inst.omega, ground), rel=1e-12)

    def test_k1_is_single_argmax(self, rng):
        inst = small_instance(rng)
        ground = rng.uniform(0, 2, size=(7, 2))
        res = brute_force_subsets(inst, ground, 1)
        singles = [naive_f(inst.model, inst.omega, ground[[i]]) for i in range(7)]
        np.testing.assert_array_equal(res.best_set, ground[[int(np.argmax(singles))]])

    def test_matches_naive_enumeration(self, rng):
        inst = small_instance(rng)
        ground = rng.uniform(0, 2, size=(6, 2))
        res = brute_force_subsets(inst, ground, 2)
        naive = max(naive_f(inst.model, inst.omega, ground[list(c)]) for c in itertools.combinations(range(6), 2))
        assert res.best_value == pytest.approx(naive, rel=1e-10)
        assert res.evaluations == 15

    def test_guard(self, rng):
        inst = small_instance(rng)
        with pytest.raises(ValueError, match="exceeds"):
            brute_force_subsets(inst, rng.uniform(0, 2, size=(60, 2)), 8)


class TestDenseSearch:
    def test_connected_case(self):
        res = dense_line_search(OneDTwoPointCase(0.0, 0.9, HALF))
        assert abs(res.best_set[0, 0] - 0.45) <= res.step

    def test_disconnected_case(self):
        case = OneDTwoPointCase(0.0, 1.1, HALF)
        res = dense_line_search(case)
        assert abs(res.best_set[0, 0] - 0.55) > 0.05
        assert midpoint_is_local_min(case)

    def test_boundary_midpoint_attains_max(self):
        case = OneDTwoPointCase(0.0, math.sqrt(2) * HALF.length_scale, HALF)
        res = dense_line_search(case, BOUNDARY_RESOLUTION)
        assert float(case.value(case.midpoint)) >= res.best_value * (1 - 1e-12)

    def test_closed_form_matches_objective(self):
        model = CovarianceModel(1.7, 0.4, 0.3)
        case = OneDTwoPointCase(0.2, 1.0, model)
        omega = np.array([[0.2], [1.0]])
        for x in (0.2, 0.5, 0.77):
            assert float(case.value(x)) == pytest.approx(naive_f(model, omega, [[x]]), rel=1e-12)

    def test_resolution_floor(self):
        with pytest.raises(ValueError):
            dense_line_search(OneDTwoPointCase(0.0, 1.0, HALF), 100)


class TestMidpointCriterion:
    def test_figure_cases(self):
        assert check_midpoint_criterion(OneDTwoPointCase(0.0, 0.9, HALF))
        assert not check_midpoint_criterion(OneDTwoPointCase(0.0, 1.1, HALF))

    @pytest.mark.parametrize("L", [0.5, 1 / math.sqrt(2), 8.33])
    def test_threshold_both_sides(self, L):
        model = CovarianceModel(1.0, L, 1.0)
        thr = math.sqrt(2) * L
        assert check_midpoint_criterion(OneDTwoPointCase(0.0, thr * (1 - 1e-3), model), BOUNDARY_RESOLUTION)
        assert check_midpoint_criterion(OneDTwoPointCase(0.0, thr, model), BOUNDARY_RESOLUTION)
        assert not check_midpoint_criterion(OneDTwoPointCase(0.0, thr * (1 + 1e-3), model), BOUNDARY_RESOLUTION)

    def test_case_validation(self):
        with pytest.raises(ValueError):
            OneDTwoPointCase(1.0, 1.0, HALF)


class TestEndpointRatio:
    def test_far_apart_is_one(self):
        ratio = check_endpoint_ratio(OneDTwoPointCase(0.0, 100 * HALF.length_scale, HALF))
        assert ratio == pytest.approx(1.0, abs=1e-12)

    def test_just_above_threshold(self):
        L = HALF.length_scale
        for sep in (math.sqrt(2) * L * (1 + 1e-6), 1.5 * L, 2 * L):
            ratio = check_endpoint_ratio(OneDTwoPointCase(0.0, sep, HALF))
            assert ENDPOINT_RATIO_BOUND - 1e-6 <= ratio <= 1.0

    def test_bound_value(self):
        assert ENDPOINT_RATIO_BOUND == pytest.approx(0.622459331201854564638900565746, rel=1e-15)

    def test_precondition(self):
        with pytest.raises(ValueError):
            check_endpoint_ratio(OneDTwoPointCase(0.0, 0.5, HALF))

    def test_greedy_prediction_point_vs_continuous(self):
        # k=1 greedy over the two prediction points alone keeps the ratio bound
        for sep in (1.05, 1.3, 2.0, 4.0):
            case = OneDTwoPointCase(0.0, sep, HALF)
            inst = ProblemInstance(Box((0.0,), (sep,)), [[0.0], [sep]], 1, HALF)
            rep = greedy_select(inst, inst.omega)
            best = dense_line_search(case).best_value
            assert rep.objective / best >= 0.62


class TestExample1:
    def test_values(self):
        ga, gb = reproduce_example1()
        assert ga == pytest.approx(0.1021, abs=5e-4)
        assert gb == pytest.approx(0.1025, abs=5e-4)
        assert ga < gb

    def test_swapped_roles_reverse(self):
        ga, gb = reproduce_example1()
        assert not gb < ga

    @pytest.mark.parametrize("scale", [0.01, 3.0, 8.33])
    def test_scale_invariant(self, scale):
        ga, gb = reproduce_example1()
        sa, sb = reproduce_example1(scale)
        assert sa == pytest.approx(ga, rel=1e-10)
        assert sb == pytest.approx(gb, rel=1e-10)


def test_run_verification_small():
    report = run_verification(sweep_size=20, resolution=20_001)
    assert report.passed, report.lines()
    assert len(report.lines()) == 5
