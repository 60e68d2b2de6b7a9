"""
Evaluation of all metrics for one score set.

:func:`evaluate_all` computes the distribution fairness index, the differential outcome
metrics at an operating point and a sweep of the comprehensive equity index over split
percentiles and weight pairs. Errors of single metrics are collected in the report
instead of aborting the evaluation.
"""
import json
from enum import Enum
from logging import getLogger
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple, TypeVar, Union

from ..errors import ConfigError, EquityIndexError
from .distribution import DEFAULT_N_BINS, DEFAULT_SMOOTHING, BinGrid
from .metrics import (
    InequityReference,
    ThresholdSource,
    Variant,
    cei_breakdown,
    check_weights,
    clamp_index,
    combined_distributions,
    divergence_index,
    floored_groups,
    garbe,
    group_divergences,
    inequity,
)
from .rates import (
    GroupRates,
    OperatingPoint,
    RateKind,
    group_rates,
    pooled_rates,
    threshold_at_global_fmr,
)
from .scores import (
    DEFAULT_MIN_PER_CELL,
    Kind,
    Polarity,
    ScoreSet,
    validate_for_fairness,
)

_logger = getLogger(__name__)

SCHEMA_VERSION: int = 1
"""Version of the JSON report schema"""

DEFAULT_TARGET_FMR: float = 3e-4
"""Default pooled false match rate of the operating point"""

DEFAULT_PERCENTILES: Tuple[float, ...] = (75.0, 90.0, 95.0)
"""Default split percentiles of the CEI sweep"""

DEFAULT_WEIGHT_SETS: Tuple[Tuple[float, float], ...] = (
    (0.2, 0.8),
    (0.5, 0.5),
    (0.8, 0.2),
)
"""Default (tail, center) weight pairs of the CEI sweep"""

METRICS: Tuple[str, ...] = ("dfi", "inequity", "garbe", "cei")
"""Metric families which can be selected"""

_RENDERING_KEYS = ("output", "format")

T = TypeVar("T")


class ReportFormat(Enum):
    """
    Output format of reports.
    """

    JSON = "json"
    MARKDOWN = "markdown"

    @classmethod
    def from_report_format(
        cls, report_format: Union["ReportFormat", str]
    ) -> "ReportFormat":
        """
        Get report format from :class:`ReportFormat` or string value.

        Parameters
        ----------
        report_format
            Value to convert to enum value (can be
            ``"json"``/:attr:`ReportFormat.JSON` or
            ``"markdown"``/:attr:`ReportFormat.MARKDOWN`)

        Returns
        -------
        ReportFormat
            Enum value
        """
        if isinstance(report_format, str):
            return cls[report_format.upper()]
        return report_format


class EvalConfig:
    """
    Complete configuration of an evaluation.

    Instances are immutable, use :meth:`replace` to derive modified configurations.
    """

    scores_path: Optional[str]
    """Score file to evaluate"""

    polarity: Optional[Polarity]
    """Polarity of the scores, required to read a score file"""

    n_bins: int
    """Number of bins of every grid"""

    smoothing: float
    """Additive smoothing of divergences"""

    target_fmr: float
    """Pooled false match rate of the operating point"""

    percentiles: Tuple[float, ...]
    """Split percentiles of the CEI sweep"""

    weight_sets: Tuple[Tuple[float, float], ...]
    """(tail, center) weight pairs of the CEI sweep"""

    metrics: Tuple[str, ...]
    """Selected metric families, a subset of :data:`METRICS`"""

    output: Optional[str]
    """Path the report is written to"""

    format: ReportFormat
    """Format of the written report"""

    min_per_cell: int
    """Minimum number of records per (group, kind) cell before it is flagged"""

    threshold_source: ThresholdSource
    """Distribution the CEI split threshold is derived from"""

    inequity_reference: InequityReference
    """Reference rate of the inequity metric"""

    allow_unnormalized_weights: bool
    """Accept weight pairs which do not sum to one"""

    def __init__(  # pylint: disable=too-many-arguments
        self,
        scores_path: Optional[str] = None,
        polarity: Optional[Union[Polarity, str]] = None,
        n_bins: int = DEFAULT_N_BINS,
        smoothing: float = DEFAULT_SMOOTHING,
        target_fmr: float = DEFAULT_TARGET_FMR,
        percentiles: Sequence[float] = DEFAULT_PERCENTILES,
        weight_sets: Sequence[Sequence[float]] = DEFAULT_WEIGHT_SETS,
        metrics: Sequence[str] = METRICS,
        output: Optional[str] = None,
        format: Union[ReportFormat, str] = ReportFormat.JSON,  # noqa: A002
        min_per_cell: int = DEFAULT_MIN_PER_CELL,
        threshold_source: Union[ThresholdSource, str] = ThresholdSource.MEAN,
        inequity_reference: Union[InequityReference, str] = InequityReference.GEOMETRIC,
        allow_unnormalized_weights: bool = False,
    ):
        """
        Initialize.

        See the attribute documentation for the meaning of the parameters. Enum values
        can be given as strings.

        Raises
        ------
        ConfigError
            A value cannot be converted
        """
        try:
            self.scores_path = scores_path
            self.polarity = (
                None if polarity is None else Polarity.from_polarity(polarity)
            )
            self.n_bins = n_bins
            self.smoothing = float(smoothing)
            self.target_fmr = float(target_fmr)
            self.percentiles = tuple(float(p) for p in percentiles)
            self.weight_sets = tuple(
                (float(w[0]), float(w[1])) if len(w) == 2 else tuple(w)
                for w in weight_sets
            )
            self.metrics = tuple(str(m).lower() for m in metrics)
            self.output = output
            self.format = ReportFormat.from_report_format(format)
            self.min_per_cell = min_per_cell
            self.threshold_source = ThresholdSource.from_threshold_source(
                threshold_source
            )
            self.inequity_reference = InequityReference.from_inequity_reference(
                inequity_reference
            )
            self.allow_unnormalized_weights = bool(allow_unnormalized_weights)
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError("invalid configuration value: {}".format(exc))

    def validate(self) -> "EvalConfig":
        """
        Check all values before any computation starts.

        Returns
        -------
        :obj:`EvalConfig`
            ``self``

        Raises
        ------
        ConfigError
            A value is invalid
        """
        if not self.metrics:
            raise ConfigError("no metrics selected")
        unknown = [m for m in self.metrics if m not in METRICS]
        if unknown:
            raise ConfigError(
                "unknown metric(s) {}, choose from {}".format(unknown, list(METRICS))
            )
        if isinstance(self.n_bins, bool) or not isinstance(self.n_bins, int):
            raise ConfigError("n_bins must be an integer, got {!r}".format(self.n_bins))
        if self.n_bins < 1:
            raise ConfigError("n_bins must be positive, got {}".format(self.n_bins))
        if not self.smoothing > 0:
            raise ConfigError(
                "smoothing must be positive, got {}".format(self.smoothing)
            )
        if not 0 < self.target_fmr <= 1:
            raise ConfigError(
                "target FMR must be in (0, 1], got {}".format(self.target_fmr)
            )
        if not isinstance(self.min_per_cell, int) or self.min_per_cell < 0:
            raise ConfigError(
                "min_per_cell must be a non-negative integer, got {!r}".format(
                    self.min_per_cell
                )
            )

        if "cei" in self.metrics:
            if not self.percentiles:
                raise ConfigError("CEI selected without percentiles")
            if not self.weight_sets:
                raise ConfigError("CEI selected without weight sets")
            for percentile in self.percentiles:
                if not 0 < percentile < 100:
                    raise ConfigError(
                        "percentiles must be in (0, 100), got {}".format(percentile)
                    )
            for weights in self.weight_sets:
                if len(weights) != 2:
                    raise ConfigError(
                        "weight sets are (tail, center) pairs, got {}".format(weights)
                    )
                try:
                    check_weights(*weights, self.allow_unnormalized_weights)
                except EquityIndexError as exc:
                    raise ConfigError(str(exc))

        return self

    def replace(self, **overrides: Any) -> "EvalConfig":
        """
        Derive a configuration with some values replaced.

        Parameters
        ----------
        **overrides
            Values to replace, ``None`` values are ignored

        Returns
        -------
        :obj:`EvalConfig`
            New configuration
        """
        values = self.to_dict()
        unknown = set(overrides) - set(values)
        if unknown:
            raise ConfigError("unknown configuration key(s) {}".format(sorted(unknown)))
        values.update({k: v for k, v in overrides.items() if v is not None})
        return self.from_dict(values)

    def to_dict(self) -> Dict[str, Any]:
        """
        Get JSON-ready representation.
        """
        values = {
            "scores_path": self.scores_path,
            "polarity": self.polarity,
            "n_bins": self.n_bins,
            "smoothing": self.smoothing,
            "target_fmr": self.target_fmr,
            "percentiles": list(self.percentiles),
            "weight_sets": [list(w) for w in self.weight_sets],
            "metrics": list(self.metrics),
            "output": self.output,
            "format": self.format,
            "min_per_cell": self.min_per_cell,
            "threshold_source": self.threshold_source,
            "inequity_reference": self.inequity_reference,
            "allow_unnormalized_weights": self.allow_unnormalized_weights,
        }
        return {k: v.value if isinstance(v, Enum) else v for k, v in values.items()}

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "EvalConfig":
        """
        Create a configuration from a dictionary mirroring :meth:`to_dict`.

        Parameters
        ----------
        data
            Configuration values, missing keys take their defaults

        Returns
        -------
        :obj:`EvalConfig`
            Configuration

        Raises
        ------
        ConfigError
            ``data`` holds unknown keys or invalid values
        """
        known = set(cls().to_dict())
        unknown = set(data) - known
        if unknown:
            raise ConfigError("unknown configuration key(s) {}".format(sorted(unknown)))
        return cls(**data)

    @classmethod
    def from_json(cls, path: str) -> "EvalConfig":
        """
        Read a configuration from a JSON file mirroring :meth:`to_dict`.

        Raises
        ------
        ConfigError
            The file cannot be read or holds invalid values
        """
        try:
            with open(path, encoding="utf-8") as fh:
                data = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError("cannot read configuration `{}`: {}".format(path, exc))
        if not isinstance(data, dict):
            raise ConfigError("configuration `{}` must hold an object".format(path))

        return cls.from_dict(data)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, EvalConfig):
            return NotImplemented
        return self.to_dict() == other.to_dict()

    def __repr__(self) -> str:
        return "EvalConfig({})".format(self.to_dict())


class CeiCell:
    """
    CEI values of both comparison kinds for one (percentile, weights) pair.
    """

    percentile: float
    """Split percentile"""

    w_tail: float
    """Weight of the tail divergence"""

    w_center: float
    """Weight of the center divergence"""

    values: Dict[str, Optional[float]]
    """Index per ``"<variant>_<kind>"`` key, e.g. ``"normal_genuine"``"""

    thresholds: Dict[str, Dict[str, float]]
    """Split threshold per kind and group"""

    tail_masses: Dict[str, Dict[str, float]]
    """Tail mass before renormalization per kind and group"""

    clamped: Tuple[str, ...]
    """Keys of :attr:`values` which were clamped to [0, 1]"""

    def __init__(
        self,
        percentile: float,
        w_tail: float,
        w_center: float,
        values: Dict[str, Optional[float]],
        thresholds: Dict[str, Dict[str, float]],
        tail_masses: Dict[str, Dict[str, float]],
        clamped: Sequence[str] = (),
    ):
        self.percentile = percentile
        self.w_tail = w_tail
        self.w_center = w_center
        self.values = values
        self.thresholds = thresholds
        self.tail_masses = tail_masses
        self.clamped = tuple(clamped)

    @property
    def weights(self) -> Tuple[float, float]:
        """
        tuple: (tail, center) weights
        """
        return (self.w_tail, self.w_center)

    def value(
        self, variant: Union[Variant, str], kind: Union[Kind, str]
    ) -> Optional[float]:
        """
        Get the index of one variant and kind, ``None`` if it could not be computed.
        """
        key = "{}_{}".format(
            Variant.from_variant(variant).value, Kind.from_kind(kind).value
        )
        return self.values.get(key)

    def to_dict(self) -> Dict[str, Any]:
        """
        Get JSON-ready representation.
        """
        return {
            "percentile": self.percentile,
            "w_tail": self.w_tail,
            "w_center": self.w_center,
            "values": self.values,
            "thresholds": self.thresholds,
            "tail_masses": self.tail_masses,
            "clamped": list(self.clamped),
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "CeiCell":
        """
        Create a cell from its :meth:`to_dict` representation.
        """
        return cls(**data)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, CeiCell):
            return NotImplemented
        return self.to_dict() == other.to_dict()

    def __repr__(self) -> str:
        return "CeiCell(P{}, w={}, {})".format(
            self.percentile, self.weights, self.values
        )


class MetricFailure:
    """
    A metric which could not be computed.
    """

    metric: str
    """Name of the metric"""

    module: str
    """Module the error originated in"""

    message: str
    """Error message"""

    def __init__(self, metric: str, module: str, message: str):
        self.metric = metric
        self.module = module
        self.message = message

    def to_dict(self) -> Dict[str, str]:
        """
        Get JSON-ready representation.
        """
        return {"metric": self.metric, "module": self.module, "message": self.message}

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, MetricFailure):
            return NotImplemented
        return self.to_dict() == other.to_dict()

    def __str__(self) -> str:
        return "{} [{}]: {}".format(self.metric, self.module, self.message)


_SCALAR_METRICS: Dict[str, Tuple[str, ...]] = {
    "dfi": ("dfi_n", "dfi_e"),
    "inequity": ("in_fmr", "in_fnmr"),
    "garbe": ("garbe_fmr", "garbe_fnmr"),
}


class MetricReport:
    """
    All metric values of one evaluation together with the configuration and the
    intermediate quantities which produced them.
    """

    metrics: Dict[str, Optional[float]]
    """Scalar metrics (``dfi_n``, ``dfi_e``, ``in_fmr``, ``in_fnmr``, ``garbe_fmr``,
    ``garbe_fnmr``) which were selected, ``None`` if they failed"""

    cei: Tuple[CeiCell, ...]
    """CEI sweep, one cell per (percentile, weights) pair in configuration order"""

    operating_point: Optional[OperatingPoint]
    """Operating point of the differential outcome metrics"""

    group_rates: Tuple[GroupRates, ...]
    """Error rates of every group at the operating point"""

    pooled_rates: Dict[str, float]
    """Pooled ``fmr`` and ``fnmr`` at the operating point"""

    counts: Dict[str, Dict[str, int]]
    """Number of records per group and kind"""

    grids: Dict[str, Dict[str, Any]]
    """Grids used, keyed by ``combined``, ``genuine`` and ``impostor``"""

    config: Dict[str, Any]
    """Configuration (see :meth:`EvalConfig.to_dict`) without output path and
    format, so identical computations give identical reports"""

    provenance: Dict[str, Any]
    """Origin of the scores, e.g. the file or the synthetic scenario and seed"""

    flags: Tuple[str, ...]
    """Warnings: validation flags, floored rates, clamped indices"""

    failures: Tuple[MetricFailure, ...]
    """Metrics which could not be computed"""

    schema_version: int
    """Version of the JSON schema"""

    def __init__(  # pylint: disable=too-many-arguments
        self,
        metrics: Dict[str, Optional[float]],
        cei: Sequence[CeiCell],
        operating_point: Optional[OperatingPoint],
        group_rates: Sequence[GroupRates],
        pooled_rates: Dict[str, float],
        counts: Dict[str, Dict[str, int]],
        grids: Dict[str, Dict[str, Any]],
        config: Dict[str, Any],
        provenance: Dict[str, Any],
        flags: Sequence[str],
        failures: Sequence[MetricFailure],
        schema_version: int = SCHEMA_VERSION,
    ):
        self.metrics = metrics
        self.cei = tuple(cei)
        self.operating_point = operating_point
        self.group_rates = tuple(group_rates)
        self.pooled_rates = pooled_rates
        self.counts = counts
        self.grids = grids
        self.config = config
        self.provenance = provenance
        self.flags = tuple(flags)
        self.failures = tuple(failures)
        self.schema_version = schema_version

    @property
    def ok(self) -> bool:
        """
        bool: ``True`` if every selected metric was computed
        """
        return not self.failures

    def __getattr__(self, name: str) -> Optional[float]:
        # dfi_n, in_fmr, ... as attributes
        if name in {m for names in _SCALAR_METRICS.values() for m in names}:
            return self.__dict__.get("metrics", {}).get(name)
        raise AttributeError(name)

    def cei_cell(
        self, percentile: float, weights: Sequence[float]
    ) -> Optional[CeiCell]:
        """
        Get the CEI cell of a (percentile, weights) pair.

        Parameters
        ----------
        percentile
            Split percentile
        weights
            (tail, center) weights

        Returns
        -------
        :obj:`CeiCell` or None
            The cell, ``None`` if the pair was not part of the sweep
        """
        for cell in self.cei:
            if cell.percentile == percentile and cell.weights == tuple(weights):
                return cell
        return None

    def to_dict(self) -> Dict[str, Any]:
        """
        Get JSON-ready representation.
        """
        return {
            "schema_version": self.schema_version,
            "metrics": self.metrics,
            "cei": [c.to_dict() for c in self.cei],
            "operating_point": (
                None if self.operating_point is None else self.operating_point.to_dict()
            ),
            "group_rates": [r.to_dict() for r in self.group_rates],
            "pooled_rates": self.pooled_rates,
            "counts": self.counts,
            "grids": self.grids,
            "config": self.config,
            "provenance": self.provenance,
            "flags": list(self.flags),
            "failures": [f.to_dict() for f in self.failures],
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "MetricReport":
        """
        Create a report from its :meth:`to_dict` representation.

        Raises
        ------
        ValueError
            The schema version is not supported
        """
        version = data.get("schema_version")
        if version != SCHEMA_VERSION:
            raise ValueError("unsupported report schema version {!r}".format(version))

        operating_point = data.get("operating_point")
        return cls(
            metrics=data["metrics"],
            cei=[CeiCell.from_dict(c) for c in data["cei"]],
            operating_point=(
                None
                if operating_point is None
                else OperatingPoint.from_dict(operating_point)
            ),
            group_rates=[GroupRates.from_dict(r) for r in data["group_rates"]],
            pooled_rates=data["pooled_rates"],
            counts=data["counts"],
            grids=data["grids"],
            config=data["config"],
            provenance=data["provenance"],
            flags=data["flags"],
            failures=[MetricFailure(**f) for f in data["failures"]],
            schema_version=version,
        )

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, MetricReport):
            return NotImplemented
        return self.to_dict() == other.to_dict()

    def __repr__(self) -> str:
        return "<MetricReport: {}, {} CEI cell(s), {} failure(s)>".format(
            self.metrics, len(self.cei), len(self.failures)
        )


def _attempt(
    failures: List[MetricFailure],
    metric: str,
    module: str,
    func: Callable[..., T],
    *args: Any,
    **kwargs: Any
) -> Optional[T]:
    try:
        return func(*args, **kwargs)
    except EquityIndexError as exc:
        _logger.warning("%s failed in %s: %s", metric, module, exc)
        failures.append(MetricFailure(metric, module, str(exc)))
        return None


def _evaluate_cei(
    score_set: ScoreSet,
    config: EvalConfig,
    grids: Dict[str, Dict[str, Any]],
    flags: List[str],
    failures: List[MetricFailure],
) -> List[CeiCell]:
    breakdowns = {}
    for kind in Kind:
        group_scores = score_set.partition(kind)
        grid = _attempt(
            failures,
            "cei_{}".format(kind.value),
            "distribution",
            BinGrid.spanning,
            *group_scores.values(),
            n_bins=config.n_bins
        )
        if grid is None:
            continue
        grids[kind.value] = grid.to_dict()
        for percentile in config.percentiles:
            breakdowns[kind, percentile] = _attempt(
                failures,
                "cei_{}@P{:g}".format(kind.value, percentile),
                "fairness-metrics",
                cei_breakdown,
                group_scores,
                grid,
                kind,
                percentile,
                score_set.polarity,
                config.smoothing,
                config.threshold_source,
            )

    cells = []
    for percentile in config.percentiles:
        for w_tail, w_center in config.weight_sets:
            values: Dict[str, Optional[float]] = {}
            thresholds = {}
            tail_masses = {}
            clamped = []
            for kind in Kind:
                breakdown = breakdowns.get((kind, percentile))
                for variant in Variant:
                    key = "{}_{}".format(variant.value, kind.value)
                    if breakdown is None:
                        values[key] = None
                        continue
                    dissimilarities = breakdown.dissimilarities(w_tail, w_center)
                    value, was_clamped = clamp_index(
                        divergence_index(list(dissimilarities.values()), variant)
                    )
                    values[key] = value
                    if was_clamped:
                        clamped.append(key)
                        flags.append(
                            "CEI {} clamped to {} at P{:g}, w=({:g}, {:g})".format(
                                key, value, percentile, w_tail, w_center
                            )
                        )
                if breakdown is not None:
                    thresholds[kind.value] = breakdown.thresholds
                    tail_masses[kind.value] = breakdown.tail_masses

            cells.append(
                CeiCell(
                    percentile,
                    w_tail,
                    w_center,
                    values,
                    thresholds,
                    tail_masses,
                    clamped,
                )
            )

    return cells


def evaluate_all(
    score_set: ScoreSet,
    config: EvalConfig,
    provenance: Optional[Dict[str, Any]] = None,
) -> MetricReport:
    """
    Compute all selected metrics.

    Parameters
    ----------
    score_set
        Scores to evaluate
    config
        Configuration. Its polarity, if set, must match the polarity of
        ``score_set``.
    provenance
        Origin of the scores, stored in the report

    Returns
    -------
    :obj:`MetricReport`
        Report. Metrics which could not be computed are ``None`` and listed in
        :attr:`MetricReport.failures`.

    Raises
    ------
    ConfigError
        ``config`` is invalid
    """
    config.validate()
    if config.polarity is not None and config.polarity != score_set.polarity:
        raise ConfigError(
            "configured polarity {} does not match the scores' polarity {}".format(
                config.polarity.value, score_set.polarity.value
            )
        )

    validation = validate_for_fairness(score_set, config.min_per_cell)
    flags = list(validation.flags)
    failures: List[MetricFailure] = []
    metrics: Dict[str, Optional[float]] = {}
    grids: Dict[str, Dict[str, Any]] = {}

    if "dfi" in config.metrics:
        dists = _attempt(
            failures,
            "dfi",
            "distribution",
            combined_distributions,
            score_set,
            config.n_bins,
        )
        divergences = None
        if dists is not None:
            grids["combined"] = next(iter(dists.values())).grid.to_dict()
            divergences = group_divergences(list(dists.values()), config.smoothing)
        for variant, name in zip(Variant, _SCALAR_METRICS["dfi"]):
            metrics[name] = None
            if divergences is not None:
                metrics[name] = _attempt(
                    failures,
                    name,
                    "fairness-metrics",
                    divergence_index,
                    divergences,
                    variant,
                )

    operating_point = None
    rates: List[GroupRates] = []
    pooled: Dict[str, float] = {}
    if "inequity" in config.metrics or "garbe" in config.metrics:
        operating_point = _attempt(
            failures,
            "operating_point",
            "error-rates",
            threshold_at_global_fmr,
            score_set,
            config.target_fmr,
        )
        if operating_point is not None:
            rates = group_rates(score_set, operating_point.threshold)
            fmr_fnmr = _attempt(
                failures,
                "pooled_rates",
                "error-rates",
                pooled_rates,
                score_set,
                operating_point.threshold,
            )
            if fmr_fnmr is not None:
                pooled = {"fmr": fmr_fnmr[0], "fnmr": fmr_fnmr[1]}

        for family, func in (("inequity", inequity), ("garbe", garbe)):
            if family not in config.metrics:
                continue
            for which, name in zip(RateKind, _SCALAR_METRICS[family]):
                if operating_point is None:
                    metrics[name] = None
                    continue
                args: Tuple[Any, ...] = (rates, which)
                if family == "inequity":
                    args += (config.inequity_reference,)
                    floored = floored_groups(rates, which)
                    if floored and all(r.rate(which) is not None for r in rates):
                        flags.append(
                            "{}: zero rate floored to 1/(2n) for {}".format(
                                name.upper(), floored
                            )
                        )
                metrics[name] = _attempt(
                    failures, name, "fairness-metrics", func, *args
                )

    cells: List[CeiCell] = []
    if "cei" in config.metrics:
        cells = _evaluate_cei(score_set, config, grids, flags, failures)

    counts = {
        str(group): {str(kind): int(n) for kind, n in row.items()}
        for group, row in validation.counts.iterrows()
    }

    return MetricReport(
        metrics=metrics,
        cei=cells,
        operating_point=operating_point,
        group_rates=rates,
        pooled_rates=pooled,
        counts=counts,
        grids=grids,
        config={
            k: v for k, v in config.to_dict().items() if k not in _RENDERING_KEYS
        },
        provenance=dict(provenance or {}),
        flags=flags,
        failures=failures,
    )
