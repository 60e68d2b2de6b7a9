"""
Score laws on [0, 1] and stratified sampling from them.
"""
from abc import ABCMeta, abstractmethod
from typing import Sequence

import numpy as np
import scipy.stats

_INVERSION_POINTS = 20001


class ScoreLaw(metaclass=ABCMeta):
    """
    Continuous law of similarity scores on ``[lo, hi]``.
    """

    lo: float = 0.0
    """Smallest possible score"""

    hi: float = 1.0
    """Largest possible score"""

    @abstractmethod
    def cdf(self, x: np.ndarray) -> np.ndarray:
        """
        Cumulative distribution function.
        """

    @abstractmethod
    def ppf(self, q: np.ndarray) -> np.ndarray:
        """
        Quantile function.
        """

    @property
    @abstractmethod
    def mean(self) -> float:
        """
        float: Expected score
        """

    def sample(self, n: int, rng: np.random.Generator) -> np.ndarray:
        """
        Draw ``n`` scores by stratified inverse transform sampling.

        The i-th draw comes from the quantile stratum ``[i/n, (i+1)/n)``, the draws are
        returned in random order. Two samples of the same law therefore differ by at
        most one score below any threshold.

        Parameters
        ----------
        n
            Number of scores
        rng
            Random number generator

        Returns
        -------
        :obj:`np.ndarray`
            Scores
        """
        quantiles = (np.arange(n) + rng.random(n)) / n
        return rng.permutation(self.ppf(quantiles))


class TruncatedNormal(ScoreLaw):
    """
    Normal law truncated to ``[lo, hi]``.
    """

    loc: float
    """Location of the untruncated normal law"""

    scale: float
    """Scale of the untruncated normal law"""

    def __init__(self, loc: float, scale: float, lo: float = 0.0, hi: float = 1.0):
        """
        Initialize.

        Parameters
        ----------
        loc
            Location of the untruncated normal law
        scale
            Scale of the untruncated normal law
        lo
            Lower truncation point
        hi
            Upper truncation point

        Raises
        ------
        ValueError
            ``scale`` is not positive or ``lo`` is not below ``hi``
        """
        if not scale > 0:
            raise ValueError("scale must be positive, got {}".format(scale))
        if not lo < hi:
            raise ValueError("truncation requires lo < hi")
        self.loc = float(loc)
        self.scale = float(scale)
        self.lo = float(lo)
        self.hi = float(hi)
        self._law = scipy.stats.truncnorm(
            (lo - loc) / scale, (hi - loc) / scale, loc=loc, scale=scale
        )

    def cdf(self, x: np.ndarray) -> np.ndarray:
        return self._law.cdf(x)

    def ppf(self, q: np.ndarray) -> np.ndarray:
        return self._law.ppf(q)

    @property
    def mean(self) -> float:
        return float(self._law.mean())

    def __repr__(self) -> str:
        return "TruncatedNormal(loc={!r}, scale={!r})".format(self.loc, self.scale)


class Mixture(ScoreLaw):
    """
    Weighted mixture of score laws sharing their support.

    The quantile function is obtained by interpolating the cumulative distribution
    function on a dense grid.
    """

    def __init__(self, components: Sequence[ScoreLaw], weights: Sequence[float]):
        """
        Initialize.

        Parameters
        ----------
        components
            Component laws
        weights
            Non-negative weight of every component, summing to one

        Raises
        ------
        ValueError
            Weights are invalid or components have different supports
        """
        weights = np.asarray(weights, dtype=float)
        if len(components) != weights.size or not components:
            raise ValueError("one weight per component is required")
        if np.any(weights < 0) or abs(weights.sum() - 1) > 1e-12:
            raise ValueError("weights must be non-negative and sum to 1")
        supports = {(c.lo, c.hi) for c in components}
        if len(supports) != 1:
            raise ValueError("components must share their support")

        self.components = tuple(components)
        self.weights = weights
        self.lo, self.hi = supports.pop()
        self._x = np.linspace(self.lo, self.hi, _INVERSION_POINTS)
        self._cdf = self.cdf(self._x)

    def cdf(self, x: np.ndarray) -> np.ndarray:
        return sum(w * c.cdf(x) for w, c in zip(self.weights, self.components))

    def ppf(self, q: np.ndarray) -> np.ndarray:
        return np.interp(q, self._cdf, self._x)

    @property
    def mean(self) -> float:
        return float(sum(w * c.mean for w, c in zip(self.weights, self.components)))

    def __repr__(self) -> str:
        return "Mixture({!r}, weights={!r})".format(
            list(self.components), self.weights.tolist()
        )


def mix(base: ScoreLaw, component: ScoreLaw, weight: float) -> ScoreLaw:
    """
    Mix ``component`` into ``base`` with ``weight``.

    Returns ``base`` itself if ``weight`` is zero, so that zero-strength scenarios
    sample exactly like the reference.
    """
    if weight == 0:
        return base
    return Mixture([base, component], [1 - weight, weight])
