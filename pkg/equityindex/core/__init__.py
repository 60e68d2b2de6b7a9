"""
Numerical core: score data, histogram distributions, error rates and metrics.
"""

from .distribution import (  # noqa: F401
    BinGrid,
    Distribution,
    ErrorSide,
    SplitDistribution,
    build_distribution,
    kl_divergence,
    mean_distribution,
    percentile_threshold,
    split,
)
from .evaluation import (  # noqa: F401
    CeiCell,
    EvalConfig,
    MetricFailure,
    MetricReport,
    ReportFormat,
    evaluate_all,
)
from .metrics import (  # noqa: F401
    CeiConfig,
    InequityReference,
    ThresholdSource,
    Variant,
    cei,
    cei_scores,
    dfi,
    garbe,
    inequity,
)
from .rates import (  # noqa: F401
    GroupRates,
    OperatingPoint,
    RateKind,
    fmr_at,
    fnmr_at,
    group_rates,
    pooled_rates,
    rate_sweep,
    threshold_at_global_fmr,
)
from .scores import (  # noqa: F401
    Kind,
    Polarity,
    ScoreRecord,
    ScoreSet,
    ValidationReport,
    ingest,
    ingest_csv,
    ingest_json,
    validate_for_fairness,
)
