"""
Errors/Exceptions defined and used in equityindex.
"""
from typing import Optional


class EquityIndexError(Exception):
    """
    Exception raised by any equityindex module. Used as super class.
    """


class ScoreDataError(EquityIndexError, ValueError):
    """
    Exception relating to score data ingestion. Used as super class.
    """

    line: Optional[int]
    """Line number in the source file (header is line 1), if known"""

    def __init__(self, message: str, line: Optional[int] = None):
        """
        Initialize.

        Parameters
        ----------
        message
            Error message
        line
            Line number in the source file the error relates to
        """
        if line is not None:
            message = "line {}: {}".format(line, message)
        super().__init__(message)
        self.line = line


class MalformedRowError(ScoreDataError):
    """
    Exception raised when a row cannot be parsed (wrong number of fields, score which
    is not a number, empty group key or missing required columns).
    """


class EmptyGroupError(MalformedRowError):
    """
    Exception raised when a record has an empty group key.
    """


class UnknownKindError(ScoreDataError):
    """
    Exception raised when the kind column holds something other than ``genuine`` or
    ``impostor``.
    """


class NonFiniteScoreError(ScoreDataError):
    """
    Exception raised when a score is NaN or infinite.
    """


class EmptyFileError(ScoreDataError):
    """
    Exception raised when a score file holds no records.
    """


class DistributionError(EquityIndexError, ValueError):
    """
    Exception relating to histogram distributions. Used as super class.
    """


class EmptyInputError(DistributionError):
    """
    Exception raised when a distribution or a rate is requested from no scores.
    """


class OutOfRangeError(DistributionError):
    """
    Exception raised when scores fall outside of a bin grid and clipping is disabled.
    """


class GridMismatchError(DistributionError):
    """
    Exception raised when distributions on different bin grids are combined.
    """


class DegenerateSplitError(DistributionError):
    """
    Exception raised when splitting a distribution leaves one of the pieces without
    mass.
    """


class DegenerateTailError(DegenerateSplitError):
    """
    Exception raised when the tail beyond a split threshold holds (almost) no mass, so
    there is nothing to compare.
    """


class MetricError(EquityIndexError, ValueError):
    """
    Exception relating to the computation of a fairness metric. Used as super class.
    """


class KTooSmallError(MetricError):
    """
    Exception raised when fewer than two demographic groups are available.
    """


class UndefinedRateError(MetricError):
    """
    Exception raised when an error rate is undefined for a group, i.e. the group has no
    comparisons of the relevant kind.
    """


class ZeroMeanRateError(MetricError):
    """
    Exception raised when all group error rates are zero so that GARBE is undefined.
    """


class UnachievableTargetError(MetricError):
    """
    Exception raised when no threshold reaches the requested false match rate.
    """


class InvalidWeightsError(MetricError):
    """
    Exception raised when tail and center weights are negative or do not sum to one.
    """


class InvalidSpecError(EquityIndexError, ValueError):
    """
    Exception raised when a synthetic scenario specification is invalid.
    """


class UnknownScenarioError(EquityIndexError, KeyError):
    """
    Exception raised when a scenario name is not registered.
    """


class ConfigError(EquityIndexError, ValueError):
    """
    Exception raised when an evaluation configuration is invalid.
    """
