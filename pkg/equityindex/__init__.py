"""
equityindex - demographic bias metrics for biometric verification scores.
"""

from ._version import __version__  # noqa: F401
from .core import (  # noqa: F401
    EvalConfig,
    MetricReport,
    Polarity,
    ScoreSet,
    evaluate_all,
    ingest,
)
from .report import parse_report, render_report  # noqa: F401
from .scenarios import ScenarioSpec, generate  # noqa: F401
