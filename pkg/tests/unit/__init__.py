"""Unit tests for dualconv modules and step definitions."""
