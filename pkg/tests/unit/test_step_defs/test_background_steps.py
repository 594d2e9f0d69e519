"""Unit tests for background step definitions.

Tests cover:
- primitive_dual_semigroup / gaussian_generator
- random_gns_generator (seeded)
- product_kind parsing
"""

from __future__ import annotations

import pytest

from dualconv.exceptions import ConfigError
from dualconv.products import ProductKind
from tests.scenario_context import ScenarioContext
from tests.step_defs.background_steps import (
    gaussian_generator,
    primitive_dual_semigroup,
    product_kind,
    random_gns_generator,
)


class TestBackgroundSteps:

    def test_gaussian_context(self, gaussian_context: ScenarioContext):
        assert gaussian_context.dual_semigroup.name == "primitive:1"
        assert gaussian_context.generator(("x", "x")) == 1
        assert gaussian_context.generator(("x",) * 4) == 0
        assert gaussian_context.kind is ProductKind.TENSOR

    def test_random_generator_is_seeded(self, scenario_context: ScenarioContext):
        primitive_dual_semigroup(scenario_context)
        random_gns_generator(2, 7, scenario_context)
        first = scenario_context.generator
        random_gns_generator(2, 7, scenario_context)
        assert first(("x", "x", "x")) == pytest.approx(scenario_context.generator(("x", "x", "x")))

    def test_product_kind_is_lenient(self, scenario_context: ScenarioContext):
        product_kind("Antimonotone", scenario_context)
        assert scenario_context.kind is ProductKind.ANTIMONOTONE

    def test_unknown_product(self, scenario_context: ScenarioContext):
        with pytest.raises(ConfigError):
            product_kind("quantum", scenario_context)

    def test_generator_needs_a_dual_semigroup(self, scenario_context: ScenarioContext):
        with pytest.raises(AttributeError):
            gaussian_generator(scenario_context)
