"""Unit test conftest for step definitions.

Step functions are plain callables; these fixtures hand them a scenario
context that the Background steps have already filled in.
"""

import pytest

from tests.scenario_context import ScenarioContext
from tests.step_defs.background_steps import (
    gaussian_generator,
    primitive_dual_semigroup,
    product_kind,
)


@pytest.fixture
def gaussian_context(scenario_context: ScenarioContext) -> ScenarioContext:
    """Primitive dual semigroup, Gaussian generator, tensor product."""
    primitive_dual_semigroup(scenario_context)
    gaussian_generator(scenario_context)
    product_kind("tensor", scenario_context)
    return scenario_context
