"""Load dualconv_keywords without going through the robot/libraries package.

The directory is named like Robot Framework's own ``robot.libraries``, so a
plain import would resolve to the installed package. We load
dualconv_keywords.py directly for unit tests.
"""

import importlib.util
from pathlib import Path

_root = Path(__file__).resolve().parents[3]
_keywords_path = _root / "robot" / "libraries" / "dualconv_keywords.py"

_spec = importlib.util.spec_from_file_location("dualconv_keywords", _keywords_path)
_dualconv_keywords = importlib.util.module_from_spec(_spec)
_spec.loader.exec_module(_dualconv_keywords)

DualconvKeywords = _dualconv_keywords.DualconvKeywords
