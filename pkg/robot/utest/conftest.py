"""Conftest for Robot keyword unit tests.

Makes the repository root importable so the keyword tests can share
tests.scenario_context with the pytest-bdd unit tests.
"""

import sys
from pathlib import Path

_root = Path(__file__).resolve().parents[2]
if str(_root) not in sys.path:
    sys.path.insert(0, str(_root))
