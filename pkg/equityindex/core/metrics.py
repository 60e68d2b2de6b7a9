"""
Demographic fairness metrics.

Two families are implemented:

- differential outcome metrics compare per-group error rates at an operating point
  (:func:`inequity` and :func:`garbe`)
- differential performance metrics compare per-group score distributions with their
  mean distribution using Kullback-Leibler divergence (:func:`dfi` and :func:`cei`)

For the divergence based indices a value of 1 means that all groups share the same
distribution. The comprehensive equity index (CEI) splits the distribution of one
comparison kind into its error-side tail and its center and weights the divergences of
both pieces, which makes it sensitive to differences that only show in the tails.
"""
from enum import Enum
from logging import getLogger
from typing import Dict, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np
import scipy.stats

from ..errors import (
    InvalidWeightsError,
    KTooSmallError,
    UndefinedRateError,
    ZeroMeanRateError,
)
from .distribution import (
    DEFAULT_N_BINS,
    DEFAULT_SMOOTHING,
    BinGrid,
    Distribution,
    SplitDistribution,
    build_distribution,
    kl_divergence,
    mean_distribution,
    percentile_threshold,
    split,
)
from .rates import GroupRates, RateKind
from .scores import Kind, Polarity, ScoreSet

_logger = getLogger(__name__)

_WEIGHT_TOLERANCE = 1e-9


class Variant(Enum):
    """
    Aggregation of per-group divergences into an index.
    """

    NORMAL = "normal"
    """Average over all groups"""

    EXTREME = "extreme"
    """Group diverging the most from the mean"""

    @classmethod
    def from_variant(cls, variant: Union["Variant", str]) -> "Variant":
        """
        Get variant from :class:`Variant` or string value.

        Parameters
        ----------
        variant
            Value to convert to enum value (can be
            ``"normal"``/:attr:`Variant.NORMAL` or
            ``"extreme"``/:attr:`Variant.EXTREME`)

        Returns
        -------
        Variant
            Enum value
        """
        if isinstance(variant, str):
            return cls[variant.upper()]
        return variant


class ThresholdSource(Enum):
    """
    Distribution the CEI split threshold is derived from.
    """

    MEAN = "mean"
    """Percentile of the mean distribution, shared by all groups"""

    POOLED = "pooled"
    """Percentile of the pooled scores of all groups, shared by all groups"""

    GROUP = "group"
    """Percentile of every group's own distribution"""

    @classmethod
    def from_threshold_source(
        cls, threshold_source: Union["ThresholdSource", str]
    ) -> "ThresholdSource":
        """
        Get threshold source from :class:`ThresholdSource` or string value.

        Parameters
        ----------
        threshold_source
            Value to convert to enum value (can be ``"mean"``, ``"pooled"`` or
            ``"group"`` or the corresponding enum values)

        Returns
        -------
        ThresholdSource
            Enum value
        """
        if isinstance(threshold_source, str):
            return cls[threshold_source.upper()]
        return threshold_source


class InequityReference(Enum):
    """
    Reference rate the largest group rate is compared to in :func:`inequity`.
    """

    GEOMETRIC = "geometric"
    """Geometric mean of all group rates"""

    MINIMUM = "minimum"
    """Smallest group rate (less robust, kept for comparison with older reports)"""

    @classmethod
    def from_inequity_reference(
        cls, reference: Union["InequityReference", str]
    ) -> "InequityReference":
        """
        Get inequity reference from :class:`InequityReference` or string value.

        Parameters
        ----------
        reference
            Value to convert to enum value (can be ``"geometric"`` or ``"minimum"``
            or the corresponding enum values)

        Returns
        -------
        InequityReference
            Enum value
        """
        if isinstance(reference, str):
            return cls[reference.upper()]
        return reference


def check_weights(
    w_tail: float, w_center: float, allow_unnormalized: bool = False
) -> None:
    """
    Check a pair of CEI weights.

    Parameters
    ----------
    w_tail
        Weight of the tail divergence
    w_center
        Weight of the center divergence
    allow_unnormalized
        Accept weights which do not sum to one

    Raises
    ------
    InvalidWeightsError
        A weight is negative or not finite, or the weights do not sum to one and
        ``allow_unnormalized`` is ``False``
    """
    if not (np.isfinite(w_tail) and np.isfinite(w_center)):
        raise InvalidWeightsError("weights must be finite")
    if w_tail < 0 or w_center < 0:
        raise InvalidWeightsError(
            "weights must be non-negative, got ({}, {})".format(w_tail, w_center)
        )
    if not allow_unnormalized and abs(w_tail + w_center - 1) > _WEIGHT_TOLERANCE:
        raise InvalidWeightsError(
            "weights must sum to 1, got ({}, {})".format(w_tail, w_center)
        )


class CeiConfig:
    """
    Configuration of one CEI evaluation.
    """

    percentile: float
    """Percentile of the split threshold, in (0, 100)"""

    w_tail: float
    """Weight of the tail divergence"""

    w_center: float
    """Weight of the center divergence"""

    kind: Kind
    """Comparison kind the index is computed for"""

    def __init__(
        self,
        percentile: float,
        w_tail: float,
        w_center: float,
        kind: Union[Kind, str],
        allow_unnormalized: bool = False,
    ):
        """
        Initialize.

        Parameters
        ----------
        percentile
            Percentile of the split threshold, in (0, 100)
        w_tail
            Weight of the tail divergence
        w_center
            Weight of the center divergence
        kind
            Comparison kind the index is computed for
        allow_unnormalized
            Accept weights which do not sum to one

        Raises
        ------
        ValueError
            ``percentile`` is outside of (0, 100)
        InvalidWeightsError
            Weights are invalid, see :func:`check_weights`
        """
        if not 0 < percentile < 100:
            raise ValueError(
                "percentile must be in (0, 100), got {}".format(percentile)
            )
        check_weights(w_tail, w_center, allow_unnormalized)

        self.percentile = float(percentile)
        self.w_tail = float(w_tail)
        self.w_center = float(w_center)
        self.kind = Kind.from_kind(kind)

    def __repr__(self) -> str:
        return "CeiConfig(percentile={!r}, w_tail={!r}, w_center={!r}, kind={})".format(
            self.percentile, self.w_tail, self.w_center, self.kind.value
        )


def divergence_index(
    divergences: Sequence[float], variant: Union[Variant, str] = Variant.NORMAL
) -> float:
    """
    Turn per-group divergences (in bits) into an index.

    The normal variant is ``1 - sum(S) / (K * log2(K))``, the extreme variant
    ``1 - max(S) / log2(K)``. The result is not clamped.

    Parameters
    ----------
    divergences
        Divergence of every group from the mean, one value per group
    variant
        Aggregation variant

    Returns
    -------
    float
        Index, 1 if all divergences are zero

    Raises
    ------
    KTooSmallError
        Fewer than two groups
    """
    divergences = np.asarray(divergences, dtype=float)
    k = divergences.size
    if k < 2:
        raise KTooSmallError("at least 2 groups are required, got {}".format(k))

    if Variant.from_variant(variant) == Variant.NORMAL:
        return float(1 - divergences.sum() / (k * np.log2(k)))
    return float(1 - divergences.max() / np.log2(k))


def clamp_index(value: float) -> Tuple[float, bool]:
    """
    Clamp an index to [0, 1].

    Returns
    -------
    float, bool
        Clamped value and whether clamping changed it
    """
    clamped = min(max(value, 0.0), 1.0)
    return clamped, clamped != value


def group_divergences(
    dists: Sequence[Distribution], smoothing: float = DEFAULT_SMOOTHING
) -> List[float]:
    """
    Divergence of every distribution from the mean of all of them.

    Parameters
    ----------
    dists
        Per-group distributions on a shared grid
    smoothing
        Additive smoothing, see :func:`kl_divergence`

    Returns
    -------
    list of float
        One divergence per distribution, in bits
    """
    mean = mean_distribution(dists)
    return [kl_divergence(d, mean, smoothing) for d in dists]


def combined_distributions(
    score_set: ScoreSet, n_bins: int = DEFAULT_N_BINS
) -> Dict[str, Distribution]:
    """
    Genuine and impostor scores of every group as one distribution per group.

    The grid spans the scores of both kinds of all groups.

    Parameters
    ----------
    score_set
        Scores
    n_bins
        Number of bins

    Returns
    -------
    dict
        Distribution per group, in group order
    """
    by_group = score_set.partition(None)
    grid = BinGrid.spanning(*by_group.values(), n_bins=n_bins)
    return {g: build_distribution(s, grid) for g, s in by_group.items()}


def dfi(
    dists: Sequence[Distribution],
    variant: Union[Variant, str] = Variant.NORMAL,
    smoothing: float = DEFAULT_SMOOTHING,
) -> float:
    """
    Distribution fairness index.

    Parameters
    ----------
    dists
        Combined (genuine and impostor) distribution of every group, on a shared grid
    variant
        Aggregation variant
    smoothing
        Additive smoothing, see :func:`kl_divergence`

    Returns
    -------
    float
        Index in [0, 1], 1 if all groups share the same distribution

    Raises
    ------
    KTooSmallError
        Fewer than two groups
    GridMismatchError
        Distributions are defined on different grids
    """
    if len(dists) < 2:
        raise KTooSmallError(
            "at least 2 groups are required, got {}".format(len(dists))
        )
    return divergence_index(group_divergences(dists, smoothing), variant)


def _selected_rates(
    rates: Sequence[GroupRates], which: RateKind
) -> Tuple[np.ndarray, np.ndarray]:
    if len(rates) < 2:
        raise KTooSmallError(
            "at least 2 groups are required, got {}".format(len(rates))
        )

    values = []
    for group_rates in rates:
        value = group_rates.rate(which)
        if value is None:
            raise UndefinedRateError(
                "{} undefined for group `{}`".format(which.name, group_rates.group)
            )
        values.append(value)

    return (
        np.array(values, dtype=float),
        np.array([r.count(which) for r in rates], dtype=float),
    )


def floored_groups(
    rates: Sequence[GroupRates], which: Union[RateKind, str]
) -> List[str]:
    """
    Groups whose zero rate :func:`inequity` replaces by ``1 / (2n)``.

    Nothing is floored if all rates are equal.
    """
    which = RateKind.from_rate_kind(which)
    values = [r.rate(which) for r in rates]
    if len(set(values)) <= 1:
        return []
    return [r.group for r, v in zip(rates, values) if v == 0]


def inequity(
    rates: Sequence[GroupRates],
    which: Union[RateKind, str],
    reference: Union[InequityReference, str] = InequityReference.GEOMETRIC,
) -> float:
    """
    Largest group error rate relative to the geometric mean of all group rates.

    Rates of exactly zero are replaced by ``1 / (2n)`` of the respective group, ``n``
    being the number of comparisons the rate is computed from.

    Parameters
    ----------
    rates
        Rates of every group at the operating point
    which
        Rate to compare
    reference
        Reference rate, the geometric mean or (as originally defined) the minimum

    Returns
    -------
    float
        Inequity, 1 if all rates are equal

    Raises
    ------
    KTooSmallError
        Fewer than two groups
    UndefinedRateError
        A group has no comparisons of the relevant kind
    """
    which = RateKind.from_rate_kind(which)
    values, counts = _selected_rates(rates, which)
    if np.all(values == values[0]):
        return 1.0

    zero = values == 0
    if zero.any():
        _logger.warning(
            "IN_%s: flooring zero rate(s) of %s",
            which.name,
            [r.group for r, z in zip(rates, zero) if z],
        )
        values = np.where(zero, 1 / (2 * counts), values)

    reference = InequityReference.from_inequity_reference(reference)
    if reference == InequityReference.MINIMUM:
        denominator = values.min()
    else:
        denominator = scipy.stats.gmean(values)

    return float(values.max() / denominator)


def garbe(rates: Sequence[GroupRates], which: Union[RateKind, str]) -> float:
    """
    Gini coefficient of the group error rates.

    Parameters
    ----------
    rates
        Rates of every group at the operating point
    which
        Rate to compare

    Returns
    -------
    float
        Coefficient in [0, 1 - 1/K], 0 if all rates are equal

    Raises
    ------
    KTooSmallError
        Fewer than two groups
    UndefinedRateError
        A group has no comparisons of the relevant kind
    ZeroMeanRateError
        All rates are zero
    """
    which = RateKind.from_rate_kind(which)
    values, _ = _selected_rates(rates, which)

    mean = values.mean()
    if mean == 0:
        raise ZeroMeanRateError("all group {} values are zero".format(which.name))
    if np.all(values == values[0]):
        return 0.0

    k = values.size
    spread = np.abs(values[:, np.newaxis] - values[np.newaxis, :]).sum()

    return float(spread / (2 * k ** 2 * mean))


class CeiBreakdown:
    """
    Tail and center divergences of every group at one split percentile.

    The divergences do not depend on the weights, so one breakdown serves every
    weight pair of a sweep.
    """

    kind: Kind
    """Comparison kind"""

    percentile: float
    """Percentile of the split threshold"""

    mean_split: SplitDistribution
    """Split of the mean distribution"""

    splits: Dict[str, SplitDistribution]
    """Split of every group"""

    tail_divergences: Dict[str, float]
    """Divergence of every group's tail from the mean tail"""

    center_divergences: Dict[str, float]
    """Divergence of every group's center from the mean center"""

    def __init__(
        self,
        kind: Kind,
        percentile: float,
        mean_split: SplitDistribution,
        splits: Dict[str, SplitDistribution],
        smoothing: float,
    ):
        self.kind = kind
        self.percentile = percentile
        self.mean_split = mean_split
        self.splits = splits
        self.tail_divergences = {
            g: kl_divergence(s.tail, mean_split.tail, smoothing)
            for g, s in splits.items()
        }
        self.center_divergences = {
            g: kl_divergence(s.center, mean_split.center, smoothing)
            for g, s in splits.items()
        }

    @property
    def thresholds(self) -> Dict[str, float]:
        """
        dict: Split threshold of every group
        """
        return {g: s.threshold for g, s in self.splits.items()}

    @property
    def tail_masses(self) -> Dict[str, float]:
        """
        dict: Tail mass of every group before renormalization
        """
        return {g: s.tail_mass for g, s in self.splits.items()}

    def dissimilarities(self, w_tail: float, w_center: float) -> Dict[str, float]:
        """
        Weighted sum of tail and center divergence of every group.

        Parameters
        ----------
        w_tail
            Weight of the tail divergence
        w_center
            Weight of the center divergence

        Returns
        -------
        dict
            Dissimilarity of every group, in group order
        """
        return {
            g: w_tail * self.tail_divergences[g] + w_center * self.center_divergences[g]
            for g in self.splits
        }


def cei_breakdown(
    group_scores: Mapping[str, Sequence[float]],
    grid: Optional[BinGrid],
    kind: Union[Kind, str],
    percentile: float,
    polarity: Union[Polarity, str],
    smoothing: float = DEFAULT_SMOOTHING,
    threshold_source: Union[ThresholdSource, str] = ThresholdSource.MEAN,
) -> CeiBreakdown:
    """
    Split every group's distribution of one kind and compare the pieces with the
    pieces of the mean distribution.

    Parameters
    ----------
    group_scores
        Scores of one kind per group
    grid
        Shared grid. If ``None``, a grid with :data:`DEFAULT_N_BINS` bins spanning all
        scores is used.
    kind
        Kind of the scores, determines the error side together with ``polarity``
    percentile
        Percentile of the split threshold, in (0, 100)
    polarity
        Score polarity
    smoothing
        Additive smoothing, see :func:`kl_divergence`
    threshold_source
        Distribution the threshold is derived from

    Returns
    -------
    :obj:`CeiBreakdown`
        Splits and divergences

    Raises
    ------
    KTooSmallError
        Fewer than two groups
    EmptyInputError
        A group has no scores
    DegenerateSplitError
        The threshold leaves a piece without mass
    """
    if len(group_scores) < 2:
        raise KTooSmallError(
            "at least 2 groups are required, got {}".format(len(group_scores))
        )

    kind = Kind.from_kind(kind)
    side = Polarity.from_polarity(polarity).error_side(kind)
    source = ThresholdSource.from_threshold_source(threshold_source)
    if grid is None:
        grid = BinGrid.spanning(*group_scores.values())

    dists = {g: build_distribution(s, grid) for g, s in group_scores.items()}
    mean = mean_distribution(list(dists.values()))

    mean_threshold = percentile_threshold(mean, percentile, side)
    if source == ThresholdSource.POOLED:
        pooled = build_distribution(
            np.concatenate([np.asarray(s, dtype=float) for s in group_scores.values()]),
            grid,
        )
        mean_threshold = percentile_threshold(pooled, percentile, side)

    splits = {}
    for group, dist in dists.items():
        if source == ThresholdSource.GROUP:
            threshold = percentile_threshold(dist, percentile, side)
        else:
            threshold = mean_threshold
        splits[group] = split(dist, threshold, side)

    return CeiBreakdown(
        kind, percentile, split(mean, mean_threshold, side), splits, smoothing
    )


def cei_scores(
    group_scores: Mapping[str, Sequence[float]],
    grid: Optional[BinGrid],
    cfg: CeiConfig,
    polarity: Union[Polarity, str],
    smoothing: float = DEFAULT_SMOOTHING,
    threshold_source: Union[ThresholdSource, str] = ThresholdSource.MEAN,
) -> Dict[str, float]:
    """
    Weighted tail and center dissimilarity of every group.

    See :func:`cei_breakdown` for the parameters.

    Returns
    -------
    dict
        Dissimilarity of every group, in group order
    """
    breakdown = cei_breakdown(
        group_scores,
        grid,
        cfg.kind,
        cfg.percentile,
        polarity,
        smoothing,
        threshold_source,
    )
    return breakdown.dissimilarities(cfg.w_tail, cfg.w_center)


def cei(
    group_scores: Mapping[str, Sequence[float]],
    grid: Optional[BinGrid],
    cfg: CeiConfig,
    polarity: Union[Polarity, str],
    smoothing: float = DEFAULT_SMOOTHING,
    variant: Union[Variant, str] = Variant.NORMAL,
    threshold_source: Union[ThresholdSource, str] = ThresholdSource.MEAN,
) -> float:
    """
    Comprehensive equity index of one comparison kind.

    Values below 0 can occur when a group's renormalized tail differs extremely from
    the mean tail; they are clamped to 0 and a warning is logged.

    Parameters
    ----------
    group_scores
        Scores of ``cfg.kind`` per group
    grid
        Shared grid, see :func:`cei_breakdown`
    cfg
        Percentile, weights and kind
    polarity
        Score polarity
    smoothing
        Additive smoothing, see :func:`kl_divergence`
    variant
        Aggregation variant
    threshold_source
        Distribution the threshold is derived from

    Returns
    -------
    float
        Index in [0, 1], 1 if all groups share the same distribution
    """
    dissimilarities = cei_scores(
        group_scores, grid, cfg, polarity, smoothing, threshold_source
    )
    value, clamped = clamp_index(
        divergence_index(list(dissimilarities.values()), variant)
    )
    if clamped:
        _logger.warning("CEI clamped to %s for %r", value, cfg)

    return value
