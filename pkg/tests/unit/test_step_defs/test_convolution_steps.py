"""Unit tests for convolution and positivity step definitions.

Tests cover:
- evaluate_exponential / value_is / series_agrees
- convolve_with_itself / convolution_square_value
- trotter_approximation / trotter_error_is and the perturbed sweep
- q-matrix state checks
"""

from __future__ import annotations

import pytest

from tests.scenario_context import ScenarioContext
from tests.step_defs.convolution_steps import (
    convergence_order,
    convolution_square_value,
    convolve_with_itself,
    counit_at_zero,
    evaluate_exponential,
    perturbed_error,
    perturbed_trotter_sweep,
    series_agrees,
    trotter_approximation,
    trotter_error_is,
    value_is,
)
from tests.step_defs.positivity_steps import (
    check_q_matrix,
    q_matrix_functional,
    state_check_result,
)


class TestExponentialSteps:

    def test_fourth_moment(self, gaussian_context: ScenarioContext):
        evaluate_exponential(2.0, "x x x x", gaussian_context)
        value_is(12.0, gaussian_context)
        series_agrees(8, gaussian_context)

    def test_wrong_value_fails(self, gaussian_context: ScenarioContext):
        evaluate_exponential(1.0, "x x", gaussian_context)
        with pytest.raises(AssertionError, match="Expected 2"):
            value_is(2.0, gaussian_context)

    def test_value_before_evaluation(self, gaussian_context: ScenarioContext):
        with pytest.raises(AssertionError, match="No value stored"):
            value_is(1.0, gaussian_context)

    def test_counit_at_zero(self, gaussian_context: ScenarioContext):
        counit_at_zero(4, gaussian_context)

    def test_convolution_square(self, gaussian_context: ScenarioContext):
        convolve_with_itself(gaussian_context)
        convolution_square_value(6.0, "x x x x", gaussian_context)


class TestTrotterSteps:

    @pytest.mark.parametrize("n", [2, 4, 8])
    def test_error_is_three_over_n(self, gaussian_context: ScenarioContext, n):
        trotter_approximation(n, 1.0, "x x x x", gaussian_context)
        trotter_error_is(n, 1e-12, gaussian_context)

    def test_perturbed_sweep(self, gaussian_context: ScenarioContext):
        perturbed_trotter_sweep("x x x x", gaussian_context)
        convergence_order(gaussian_context)
        perturbed_error(gaussian_context)


class TestStateSteps:

    @pytest.mark.parametrize(("q", "expected"), [(0.5, "false"), (1.0, "true")])
    def test_q_matrix(self, scenario_context: ScenarioContext, q, expected):
        q_matrix_functional(q, scenario_context)
        check_q_matrix(1, scenario_context)
        state_check_result(expected, scenario_context)
