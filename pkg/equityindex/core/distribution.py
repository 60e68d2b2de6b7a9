"""
Histogram distributions over shared bin grids.

All divergence-based metrics compare per-group score distributions with the mean
distribution of all groups. Kullback-Leibler divergence requires a shared support, so
every distribution entering a comparison is built on the same :class:`BinGrid`. The
grid spans the scores of all groups under analysis and has equally wide, half-open bins
(the last bin is closed).

Splitting a distribution at a threshold produces a tail (the error side of the
threshold) and a center (the remainder). The bin holding the threshold contributes to
both pieces proportionally to the position of the threshold within the bin, which keeps
split based quantities continuous in the threshold.
"""
from enum import Enum
from logging import getLogger
from typing import Any, Dict, Sequence, Union

import numpy as np
import scipy.stats

from ..errors import (
    DegenerateSplitError,
    DegenerateTailError,
    EmptyInputError,
    GridMismatchError,
    OutOfRangeError,
)

_logger = getLogger(__name__)

DEFAULT_N_BINS: int = 100
"""Default number of bins of a :class:`BinGrid`"""

DEFAULT_SMOOTHING: float = 1e-10
"""Default additive smoothing applied to every bin before computing divergences"""

DEGENERATE_MASS: float = 1e-12
"""Pieces of a split holding less mass than this are considered empty"""

_MASS_TOLERANCE = 1e-9


class ErrorSide(Enum):
    """
    Side of a distribution on which verification errors happen.
    """

    LOW = "low"
    HIGH = "high"

    @classmethod
    def from_error_side(cls, error_side: Union["ErrorSide", str]) -> "ErrorSide":
        """
        Get error side from :class:`ErrorSide` or string value.

        Parameters
        ----------
        error_side
            Value to convert to enum value (can be ``"low"``/:attr:`ErrorSide.LOW` or
            ``"high"``/:attr:`ErrorSide.HIGH`)

        Returns
        -------
        ErrorSide
            Enum value
        """
        if isinstance(error_side, str):
            return cls[error_side.upper()]
        return error_side


class BinGrid:
    """
    Equally spaced bin edges between ``lo`` and ``hi``.
    """

    lo: float
    """Lower edge of the first bin"""

    hi: float
    """Upper edge of the last bin"""

    n_bins: int
    """Number of bins"""

    def __init__(self, lo: float, hi: float, n_bins: int = DEFAULT_N_BINS):
        """
        Initialize.

        Parameters
        ----------
        lo
            Lower edge of the first bin
        hi
            Upper edge of the last bin
        n_bins
            Number of bins

        Raises
        ------
        ValueError
            ``lo`` is not smaller than ``hi``, either is not finite or ``n_bins`` is not
            positive
        """
        if not (np.isfinite(lo) and np.isfinite(hi)):
            raise ValueError("grid bounds must be finite, got [{}, {}]".format(lo, hi))
        if not lo < hi:
            raise ValueError("grid requires lo < hi, got [{}, {}]".format(lo, hi))
        if int(n_bins) != n_bins or n_bins < 1:
            raise ValueError("n_bins must be a positive integer, got {}".format(n_bins))

        self.lo = float(lo)
        self.hi = float(hi)
        self.n_bins = int(n_bins)

    @classmethod
    def spanning(
        cls, *scores: Sequence[float], n_bins: int = DEFAULT_N_BINS
    ) -> "BinGrid":
        """
        Build the grid spanning the minimum and maximum of all given scores.

        If all scores are equal, the grid is widened by 0.5 on either side.

        Parameters
        ----------
        *scores
            Score arrays (e.g. one per group) the grid has to cover
        n_bins
            Number of bins

        Returns
        -------
        :obj:`BinGrid`
            Shared grid

        Raises
        ------
        EmptyInputError
            No scores given at all
        """
        arrays = [np.asarray(s, dtype=float).ravel() for s in scores]
        arrays = [a for a in arrays if a.size]
        if not arrays:
            raise EmptyInputError("cannot build a grid from no scores")

        pooled = np.concatenate(arrays)
        lo, hi = float(pooled.min()), float(pooled.max())
        if lo == hi:
            lo, hi = lo - 0.5, hi + 0.5

        return cls(lo, hi, n_bins)

    @property
    def edges(self) -> np.ndarray:
        """
        :obj:`np.ndarray`: Bin edges (``n_bins + 1`` values)
        """
        return np.linspace(self.lo, self.hi, self.n_bins + 1)

    @property
    def width(self) -> float:
        """
        float: Width of every bin
        """
        return (self.hi - self.lo) / self.n_bins

    def to_dict(self) -> Dict[str, Any]:
        """
        Get JSON-ready representation.

        Returns
        -------
        dict
            ``lo``, ``hi`` and ``n_bins``
        """
        return {"lo": self.lo, "hi": self.hi, "n_bins": self.n_bins}

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "BinGrid":
        """
        Create a grid from its :meth:`to_dict` representation.
        """
        return cls(data["lo"], data["hi"], data["n_bins"])

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, BinGrid):
            return NotImplemented
        return (self.lo, self.hi, self.n_bins) == (other.lo, other.hi, other.n_bins)

    def __repr__(self) -> str:
        return "BinGrid(lo={!r}, hi={!r}, n_bins={!r})".format(
            self.lo, self.hi, self.n_bins
        )


class Distribution:
    """
    Normalized histogram of scores on a :class:`BinGrid`.
    """

    _grid: BinGrid
    """Grid the histogram is defined on"""

    _mass: np.ndarray
    """Probability mass per bin (read-only)"""

    _count: int
    """Number of samples the histogram was built from"""

    def __init__(self, grid: BinGrid, mass: Sequence[float], count: int = 0):
        """
        Initialize.

        Parameters
        ----------
        grid
            Grid the histogram is defined on
        mass
            Probability mass per bin, must be non-negative and sum to one
        count
            Number of samples the histogram was built from

        Raises
        ------
        ValueError
            ``mass`` does not match the grid, has negative entries or does not sum to
            one
        """
        mass = np.array(mass, dtype=float)
        if mass.shape != (grid.n_bins,):
            raise ValueError(
                "expected {} mass values, got shape {}".format(grid.n_bins, mass.shape)
            )
        if not np.all(np.isfinite(mass)) or np.any(mass < 0):
            raise ValueError("mass must be finite and non-negative")
        total = mass.sum()
        if abs(total - 1) > _MASS_TOLERANCE:
            raise ValueError("mass must sum to 1, got {!r}".format(total))

        mass.flags.writeable = False
        self._grid = grid
        self._mass = mass
        self._count = int(count)

    @property
    def grid(self) -> BinGrid:
        """
        :obj:`BinGrid`: Grid the histogram is defined on
        """
        return self._grid

    @property
    def mass(self) -> np.ndarray:
        """
        :obj:`np.ndarray`: Probability mass per bin
        """
        return self._mass.copy()

    @property
    def count(self) -> int:
        """
        int: Number of samples the histogram was built from
        """
        return self._count

    def cdf(self) -> np.ndarray:
        """
        Cumulative mass at the upper edge of every bin.

        Returns
        -------
        :obj:`np.ndarray`
            Cumulative mass, ``n_bins`` values
        """
        return np.cumsum(self._mass)

    def to_dict(self) -> Dict[str, Any]:
        """
        Get JSON-ready representation, e.g. for plotting.

        Returns
        -------
        dict
            ``edges``, ``mass`` and ``count``
        """
        return {
            "edges": self._grid.edges.tolist(),
            "mass": self._mass.tolist(),
            "count": self._count,
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "Distribution":
        """
        Create a distribution from its :meth:`to_dict` representation.

        Parameters
        ----------
        data
            Dictionary with ``edges``, ``mass`` and ``count``

        Returns
        -------
        :obj:`Distribution`
            Distribution

        Raises
        ------
        ValueError
            The edges are not equally spaced
        """
        edges = np.asarray(data["edges"], dtype=float)
        grid = BinGrid(edges[0], edges[-1], edges.size - 1)
        if not np.allclose(edges, grid.edges, rtol=0, atol=1e-12 * (grid.hi - grid.lo)):
            raise ValueError("edges must be equally spaced")

        return cls(grid, data["mass"], data.get("count", 0))

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Distribution):
            return NotImplemented
        return (
            self._grid == other._grid
            and self._count == other._count
            and np.array_equal(self._mass, other._mass)
        )

    def __repr__(self) -> str:
        return "<Distribution on {!r}, count={}>".format(self._grid, self._count)


class SplitDistribution:
    """
    Tail and center of a distribution split at a threshold.

    Both pieces are renormalized, the mass of the tail before renormalization is kept
    in :attr:`tail_mass`.
    """

    threshold: float
    """Score at which the distribution was split"""

    error_side: ErrorSide
    """Side of the threshold the tail is on"""

    tail: Distribution
    """Renormalized tail"""

    center: Distribution
    """Renormalized remainder"""

    tail_mass: float
    """Mass of the tail before renormalization"""

    center_mass: float
    """Mass of the center before renormalization"""

    def __init__(
        self,
        threshold: float,
        error_side: ErrorSide,
        tail: Distribution,
        center: Distribution,
        tail_mass: float,
        center_mass: float,
    ):
        self.threshold = threshold
        self.error_side = error_side
        self.tail = tail
        self.center = center
        self.tail_mass = tail_mass
        self.center_mass = center_mass

    def recombine(self) -> Distribution:
        """
        Reassemble the distribution the split was made from.

        Returns
        -------
        :obj:`Distribution`
            ``tail_mass * tail + (1 - tail_mass) * center``
        """
        mass = self.tail_mass * self.tail.mass + (1 - self.tail_mass) * self.center.mass
        return Distribution(self.tail.grid, mass, self.tail.count)


def _check_grids(dists: Sequence[Distribution]) -> BinGrid:
    grid = dists[0].grid
    for dist in dists[1:]:
        if dist.grid != grid:
            raise GridMismatchError(
                "distributions are defined on different grids: {!r} and {!r}".format(
                    grid, dist.grid
                )
            )
    return grid


def build_distribution(
    scores: Sequence[float], grid: BinGrid, clip: bool = True
) -> Distribution:
    """
    Build the normalized histogram of scores.

    Parameters
    ----------
    scores
        Scores to bin
    grid
        Grid to bin on
    clip
        If ``True``, scores outside of the grid are counted in the first or last bin,
        otherwise they raise :class:`OutOfRangeError`

    Returns
    -------
    :obj:`Distribution`
        Histogram, ``mass[j]`` is the share of scores in bin ``j``

    Raises
    ------
    EmptyInputError
        No scores given
    OutOfRangeError
        Scores outside of the grid and ``clip`` is ``False``
    """
    scores = np.asarray(scores, dtype=float).ravel()
    if not scores.size:
        raise EmptyInputError("cannot build a distribution from no scores")

    outside = (scores < grid.lo) | (scores > grid.hi)
    if outside.any():
        if not clip:
            raise OutOfRangeError(
                "{} score(s) outside of grid [{}, {}]".format(
                    int(outside.sum()), grid.lo, grid.hi
                )
            )
        _logger.debug("clipping %d score(s) into %r", int(outside.sum()), grid)
        scores = np.clip(scores, grid.lo, grid.hi)

    counts, _ = np.histogram(scores, bins=grid.edges)

    return Distribution(grid, counts / scores.size, scores.size)


def mean_distribution(dists: Sequence[Distribution]) -> Distribution:
    """
    Bin-wise arithmetic mean of distributions.

    Parameters
    ----------
    dists
        Distributions, all on the same grid

    Returns
    -------
    :obj:`Distribution`
        Mean distribution, its count is the total count of all inputs

    Raises
    ------
    EmptyInputError
        No distributions given
    GridMismatchError
        Distributions are defined on different grids
    """
    if not dists:
        raise EmptyInputError("cannot average no distributions")
    grid = _check_grids(dists)

    mass = np.mean([d.mass for d in dists], axis=0)

    return Distribution(grid, mass, sum(d.count for d in dists))


def kl_divergence(
    p: Distribution, q: Distribution, smoothing: float = DEFAULT_SMOOTHING
) -> float:
    """
    Kullback-Leibler divergence of ``p`` from ``q`` in bits.

    Both distributions are smoothed by adding ``smoothing`` to every bin and
    renormalized before the divergence is computed.

    Parameters
    ----------
    p
        Distribution to compare
    q
        Reference distribution
    smoothing
        Additive smoothing per bin

    Returns
    -------
    float
        Non-negative divergence

    Raises
    ------
    GridMismatchError
        ``p`` and ``q`` are defined on different grids
    ValueError
        ``smoothing`` is not positive
    """
    _check_grids([p, q])
    if not smoothing > 0:
        raise ValueError("smoothing must be positive, got {}".format(smoothing))

    divergence = scipy.stats.entropy(p.mass + smoothing, q.mass + smoothing, base=2)

    return max(float(divergence), 0.0)


def percentile_threshold(
    d: Distribution, percentile: float, error_side: Union[ErrorSide, str]
) -> float:
    """
    Score beyond which the error-side tail holds ``1 - percentile / 100`` of the mass.

    The threshold is interpolated linearly within the bin it falls into.

    Parameters
    ----------
    d
        Distribution
    percentile
        Percentile in the open interval (0, 100)
    error_side
        Side of the tail

    Returns
    -------
    float
        Threshold score

    Raises
    ------
    ValueError
        ``percentile`` is outside of (0, 100)
    """
    if not 0 < percentile < 100:
        raise ValueError("percentile must be in (0, 100), got {}".format(percentile))

    error_side = ErrorSide.from_error_side(error_side)
    if error_side == ErrorSide.LOW:
        below = 1 - percentile / 100
    else:
        below = percentile / 100

    mass = d.mass
    cdf = np.cumsum(mass)
    j = min(int(np.searchsorted(cdf, below, side="left")), mass.size - 1)
    before = cdf[j - 1] if j > 0 else 0.0
    fraction = (below - before) / mass[j] if mass[j] > 0 else 0.0

    threshold = d.grid.edges[j] + min(max(fraction, 0.0), 1.0) * d.grid.width
    _logger.debug(
        "P%s threshold on %s side: %s", percentile, error_side.value, threshold
    )

    return float(threshold)


def split(
    d: Distribution, threshold: float, error_side: Union[ErrorSide, str]
) -> SplitDistribution:
    """
    Split a distribution into its error-side tail and the remaining center.

    Parameters
    ----------
    d
        Distribution to split
    threshold
        Score to split at
    error_side
        Side of ``threshold`` holding the tail

    Returns
    -------
    :obj:`SplitDistribution`
        Renormalized tail and center

    Raises
    ------
    OutOfRangeError
        ``threshold`` is outside of the grid
    DegenerateTailError
        The tail holds (almost) no mass
    DegenerateSplitError
        The center holds (almost) no mass
    """
    error_side = ErrorSide.from_error_side(error_side)
    grid = d.grid
    if not grid.lo <= threshold <= grid.hi:
        raise OutOfRangeError(
            "threshold {} outside of grid [{}, {}]".format(threshold, grid.lo, grid.hi)
        )

    mass = d.mass
    edges = grid.edges
    j = min(int(np.searchsorted(edges, threshold, side="right")) - 1, grid.n_bins - 1)
    fraction = min(max((threshold - edges[j]) / grid.width, 0.0), 1.0)

    below = np.zeros_like(mass)
    below[:j] = mass[:j]
    below[j] = mass[j] * fraction
    above = np.zeros_like(mass)
    above[j + 1 :] = mass[j + 1 :]
    above[j] = mass[j] - below[j]

    tail, center = (below, above) if error_side == ErrorSide.LOW else (above, below)
    tail_mass, center_mass = float(tail.sum()), float(center.sum())
    if tail_mass < DEGENERATE_MASS:
        raise DegenerateTailError(
            "no mass on the {} side of threshold {}".format(error_side.value, threshold)
        )
    if center_mass < DEGENERATE_MASS:
        raise DegenerateSplitError(
            "no mass left in the center after splitting at {}".format(threshold)
        )

    return SplitDistribution(
        threshold=float(threshold),
        error_side=error_side,
        tail=Distribution(grid, tail / tail_mass, d.count),
        center=Distribution(grid, center / center_mass, d.count),
        tail_mass=tail_mass,
        center_mass=center_mass,
    )
