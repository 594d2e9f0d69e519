"""Unit tests for Levy process step definitions.

Tests cover:
- check_projectivity / refinement_residuals
- weak_continuity_holds
"""

from __future__ import annotations

import pytest

from tests.scenario_context import ScenarioContext
from tests.step_defs.levy_steps import (
    check_projectivity,
    refinement_residuals,
    weak_continuity_holds,
)


class TestProjectivitySteps:

    def test_fifty_triples_pass(self, gaussian_context: ScenarioContext):
        check_projectivity(50, 1, gaussian_context)
        assert len(gaussian_context.report) == 50
        refinement_residuals(1e-9, gaussian_context)


class TestContinuitySteps:

    def test_variance_shrinks(self, gaussian_context: ScenarioContext):
        weak_continuity_holds("x x", "1, 0.1, 0.01", gaussian_context)

    def test_value_above_bound_fails(self, gaussian_context: ScenarioContext):
        # tensor: φ_0.5(x⁴) = 3 · 0.25 = 0.75 > √0.5
        with pytest.raises(AssertionError, match="bound"):
            weak_continuity_holds("x x x x", "1, 0.5", gaussian_context)
