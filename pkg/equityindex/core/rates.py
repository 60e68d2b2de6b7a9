"""
False match and false non-match rates per demographic group.

Comparisons are decided at a threshold τ. For similarity scores a comparison is a match
iff its score is at least τ, for distances iff its score is at most τ. The operating
threshold is chosen on the pooled impostor scores of all groups, following the practice
of fixing an overall false match rate and reporting per-group rates there.
"""
from enum import Enum
from logging import getLogger
from typing import Any, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd

from ..errors import EmptyInputError, UnachievableTargetError
from .scores import Kind, Polarity, ScoreSet

_logger = getLogger(__name__)


class RateKind(Enum):
    """
    Error rate.
    """

    FMR = "fmr"
    FNMR = "fnmr"

    @classmethod
    def from_rate_kind(cls, rate_kind: Union["RateKind", str]) -> "RateKind":
        """
        Get rate kind from :class:`RateKind` or string value.

        Parameters
        ----------
        rate_kind
            Value to convert to enum value (can be ``"fmr"``/:attr:`RateKind.FMR` or
            ``"fnmr"``/:attr:`RateKind.FNMR`)

        Returns
        -------
        RateKind
            Enum value
        """
        if isinstance(rate_kind, str):
            return cls[rate_kind.upper()]
        return rate_kind


class OperatingPoint:
    """
    Threshold reaching a target pooled false match rate.
    """

    threshold: float
    """Decision threshold τ"""

    target_fmr: float
    """Requested pooled false match rate"""

    achieved_fmr: float
    """Pooled false match rate at :attr:`threshold`, never above :attr:`target_fmr`"""

    n_impostor: int
    """Number of pooled impostor scores"""

    def __init__(
        self, threshold: float, target_fmr: float, achieved_fmr: float, n_impostor: int
    ):
        self.threshold = threshold
        self.target_fmr = target_fmr
        self.achieved_fmr = achieved_fmr
        self.n_impostor = n_impostor

    def to_dict(self) -> Dict[str, Any]:
        """
        Get JSON-ready representation.
        """
        return {
            "threshold": self.threshold,
            "target_fmr": self.target_fmr,
            "achieved_fmr": self.achieved_fmr,
            "n_impostor": self.n_impostor,
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "OperatingPoint":
        """
        Create an operating point from its :meth:`to_dict` representation.
        """
        return cls(**data)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, OperatingPoint):
            return NotImplemented
        return self.to_dict() == other.to_dict()

    def __repr__(self) -> str:
        return "OperatingPoint(threshold={!r}, achieved_fmr={!r})".format(
            self.threshold, self.achieved_fmr
        )


class GroupRates:
    """
    Error rates of one group at a shared threshold.
    """

    group: str
    """Group key"""

    fmr: Optional[float]
    """False match rate, ``None`` if the group has no impostor comparisons"""

    fnmr: Optional[float]
    """False non-match rate, ``None`` if the group has no genuine comparisons"""

    n_impostor: int
    """Number of impostor comparisons of the group"""

    n_genuine: int
    """Number of genuine comparisons of the group"""

    def __init__(
        self,
        group: str,
        fmr: Optional[float],
        fnmr: Optional[float],
        n_impostor: int,
        n_genuine: int,
    ):
        self.group = group
        self.fmr = fmr
        self.fnmr = fnmr
        self.n_impostor = n_impostor
        self.n_genuine = n_genuine

    def rate(self, which: Union[RateKind, str]) -> Optional[float]:
        """
        Get the false match or false non-match rate.
        """
        if RateKind.from_rate_kind(which) == RateKind.FMR:
            return self.fmr
        return self.fnmr

    def count(self, which: Union[RateKind, str]) -> int:
        """
        Get the number of comparisons ``which`` is computed from.
        """
        if RateKind.from_rate_kind(which) == RateKind.FMR:
            return self.n_impostor
        return self.n_genuine

    def to_dict(self) -> Dict[str, Any]:
        """
        Get JSON-ready representation.
        """
        return {
            "group": self.group,
            "fmr": self.fmr,
            "fnmr": self.fnmr,
            "n_impostor": self.n_impostor,
            "n_genuine": self.n_genuine,
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "GroupRates":
        """
        Create group rates from their :meth:`to_dict` representation.
        """
        return cls(**data)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, GroupRates):
            return NotImplemented
        return self.to_dict() == other.to_dict()

    def __repr__(self) -> str:
        return "GroupRates({!r}, fmr={!r}, fnmr={!r})".format(
            self.group, self.fmr, self.fnmr
        )


def _as_scores(scores: Sequence[float]) -> np.ndarray:
    scores = np.asarray(scores, dtype=float).ravel()
    if not scores.size:
        raise EmptyInputError("cannot compute a rate from no scores")
    return scores


def fmr_at(
    scores: Sequence[float], threshold: float, polarity: Union[Polarity, str]
) -> float:
    """
    False match rate of impostor scores at ``threshold``.

    Parameters
    ----------
    scores
        Impostor scores
    threshold
        Decision threshold
    polarity
        Score polarity

    Returns
    -------
    float
        Share of impostor scores accepted as match

    Raises
    ------
    EmptyInputError
        No scores given
    """
    scores = _as_scores(scores)
    if Polarity.from_polarity(polarity) == Polarity.SIMILARITY:
        matches = scores >= threshold
    else:
        matches = scores <= threshold
    return np.count_nonzero(matches) / scores.size


def fnmr_at(
    scores: Sequence[float], threshold: float, polarity: Union[Polarity, str]
) -> float:
    """
    False non-match rate of genuine scores at ``threshold``.

    Parameters
    ----------
    scores
        Genuine scores
    threshold
        Decision threshold
    polarity
        Score polarity

    Returns
    -------
    float
        Share of genuine scores rejected as non-match

    Raises
    ------
    EmptyInputError
        No scores given
    """
    scores = _as_scores(scores)
    if Polarity.from_polarity(polarity) == Polarity.SIMILARITY:
        rejected = scores < threshold
    else:
        rejected = scores > threshold
    return np.count_nonzero(rejected) / scores.size


def threshold_at_global_fmr(score_set: ScoreSet, target: float) -> OperatingPoint:
    """
    Least strict threshold at which the pooled false match rate does not exceed
    ``target``.

    Candidate thresholds are the smallest impostor score, the midpoints between
    adjacent distinct impostor scores and a value just beyond the largest one.

    Parameters
    ----------
    score_set
        Scores, impostor scores of all groups are pooled
    target
        Target false match rate in (0, 1]

    Returns
    -------
    :obj:`OperatingPoint`
        Threshold and the false match rate achieved there

    Raises
    ------
    ValueError
        ``target`` is outside of (0, 1]
    EmptyInputError
        There are no impostor scores
    UnachievableTargetError
        No candidate threshold reaches ``target``
    """
    if not 0 < target <= 1:
        raise ValueError("target FMR must be in (0, 1], got {}".format(target))

    impostor = _as_scores(score_set.scores(Kind.IMPOSTOR))
    n = impostor.size
    if n * target < 1:
        _logger.warning(
            "%d pooled impostor scores cannot resolve a target FMR of %s", n, target
        )

    # larger is stricter after flipping distances
    similarity = score_set.polarity == Polarity.SIMILARITY
    ordered = np.sort(impostor if similarity else -impostor)
    distinct = np.unique(ordered)
    candidates = np.concatenate(
        (
            distinct[:1],
            (distinct[:-1] + distinct[1:]) / 2,
            [np.nextafter(distinct[-1], np.inf)],
        )
    )
    fmr = (n - np.searchsorted(ordered, candidates, side="left")) / n

    reached = np.flatnonzero(fmr <= target)
    if not reached.size:
        raise UnachievableTargetError(
            "no threshold reaches a pooled FMR of {}".format(target)
        )

    best = reached[0]
    threshold = float(candidates[best] if similarity else -candidates[best])
    _logger.debug("threshold %s at pooled FMR %s", threshold, fmr[best])

    return OperatingPoint(threshold, target, float(fmr[best]), n)


def group_rates(score_set: ScoreSet, threshold: float) -> List[GroupRates]:
    """
    False match and false non-match rate of every group at a shared threshold.

    Parameters
    ----------
    score_set
        Scores
    threshold
        Decision threshold

    Returns
    -------
    list of :obj:`GroupRates`
        One entry per group, in group order. Rates of groups without comparisons of
        the relevant kind are ``None``.
    """
    genuine = score_set.partition(Kind.GENUINE)
    impostor = score_set.partition(Kind.IMPOSTOR)
    polarity = score_set.polarity

    rates = []
    for group in score_set.groups:
        gen, imp = genuine[group], impostor[group]
        rates.append(
            GroupRates(
                group,
                fmr=fmr_at(imp, threshold, polarity) if imp.size else None,
                fnmr=fnmr_at(gen, threshold, polarity) if gen.size else None,
                n_impostor=imp.size,
                n_genuine=gen.size,
            )
        )

    return rates


def pooled_rates(score_set: ScoreSet, threshold: float) -> Tuple[float, float]:
    """
    Pooled false match and false non-match rate at ``threshold``.

    Parameters
    ----------
    score_set
        Scores
    threshold
        Decision threshold

    Returns
    -------
    float, float
        False match rate and false non-match rate over all groups

    Raises
    ------
    EmptyInputError
        There are no impostor or no genuine scores
    """
    polarity = score_set.polarity
    return (
        fmr_at(score_set.scores(Kind.IMPOSTOR), threshold, polarity),
        fnmr_at(score_set.scores(Kind.GENUINE), threshold, polarity),
    )


def _sweep(
    genuine: np.ndarray,
    impostor: np.ndarray,
    thresholds: np.ndarray,
    polarity: Polarity,
) -> Tuple[np.ndarray, np.ndarray]:
    genuine, impostor = np.sort(genuine), np.sort(impostor)
    if polarity == Polarity.SIMILARITY:
        accepted = impostor.size - np.searchsorted(impostor, thresholds, side="left")
        rejected = np.searchsorted(genuine, thresholds, side="left")
    else:
        accepted = np.searchsorted(impostor, thresholds, side="right")
        rejected = genuine.size - np.searchsorted(genuine, thresholds, side="right")

    with np.errstate(invalid="ignore", divide="ignore"):
        fmr = np.where(impostor.size, accepted / max(impostor.size, 1), np.nan)
        fnmr = np.where(genuine.size, rejected / max(genuine.size, 1), np.nan)

    return fmr, fnmr


def rate_sweep(
    score_set: ScoreSet,
    thresholds: Optional[Sequence[float]] = None,
    n_thresholds: int = 101,
) -> pd.DataFrame:
    """
    Raw false match and false non-match rates over a range of thresholds.

    Intended for external DET/ROC plotting.

    Parameters
    ----------
    score_set
        Scores
    thresholds
        Thresholds to evaluate. If ``None``, ``n_thresholds`` equally spaced values
        between the smallest and the largest score are used.
    n_thresholds
        Number of thresholds if ``thresholds`` is ``None``

    Returns
    -------
    :obj:`pd.DataFrame`
        Columns ``threshold``, ``group``, ``pooled``, ``fmr`` and ``fnmr``. Rows of
        the pooled rates have ``pooled`` set and no group, rates of empty cells are
        NaN.
    """
    if thresholds is None:
        scores = _as_scores(score_set.scores())
        thresholds = np.linspace(scores.min(), scores.max(), n_thresholds)
    thresholds = np.asarray(thresholds, dtype=float)

    genuine = score_set.partition(Kind.GENUINE)
    impostor = score_set.partition(Kind.IMPOSTOR)
    cells: List[Tuple[Optional[str], np.ndarray, np.ndarray]] = [
        (group, genuine[group], impostor[group]) for group in score_set.groups
    ]
    cells.append(
        (
            None,
            score_set.scores(Kind.GENUINE),
            score_set.scores(Kind.IMPOSTOR),
        )
    )

    frames = []
    for group, gen, imp in cells:
        fmr, fnmr = _sweep(gen, imp, thresholds, score_set.polarity)
        frames.append(
            pd.DataFrame(
                {
                    "threshold": thresholds,
                    "group": group,
                    "pooled": group is None,
                    "fmr": fmr,
                    "fnmr": fnmr,
                }
            )
        )

    return pd.concat(frames, ignore_index=True)
