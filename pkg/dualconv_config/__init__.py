"""dualconv configs package."""

import json
from pathlib import Path

LOGGING_CONFIG = json.loads(
    (Path(__file__).parent / "logging.json").read_text(encoding="utf-8"),
)

DEFAULTS = json.loads(
    (Path(__file__).parent / "defaults.json").read_text(encoding="utf-8"),
)

JOBS_DIR = (Path(__file__).parent / "jobs").resolve()
