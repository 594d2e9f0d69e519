"""Tests package for dualconv.

This package contains:
- Feature files (Gherkin scenarios for the acceptance criteria)
- Step definitions (thin pytest-bdd wrappers around dualconv)
- Unit and property-based tests per module
"""
