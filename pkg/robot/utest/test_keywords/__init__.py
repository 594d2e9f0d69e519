"""Robot keyword unit tests."""
