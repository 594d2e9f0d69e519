"""Unit test conftest for Robot keyword libraries.

Mirrors tests/unit/test_step_defs/conftest.py structure.
"""

import pytest

from .dualconv_keywords_loader import DualconvKeywords


@pytest.fixture
def keywords() -> DualconvKeywords:
    """DualconvKeywords library instance for testing."""
    return DualconvKeywords()


@pytest.fixture
def gaussian_keywords(keywords: DualconvKeywords) -> DualconvKeywords:
    """Keywords with the primitive dual semigroup, Gaussian generator and tensor product."""
    keywords.primitive_dual_semigroup()
    keywords.gaussian_generator()
    keywords.select_product("tensor")
    return keywords
