"""
Labelled comparison scores of 1:1 verification systems.

A :class:`ScoreSet` holds one record per comparison: its score, whether the compared
samples belong to the same identity (genuine) or not (impostor) and the demographic
group the comparison is attributed to. Groups are opaque, case-sensitive keys and are
kept in order of first appearance.
"""
import csv
import json
import os
from enum import Enum
from logging import getLogger
from typing import (
    Any,
    Dict,
    Iterator,
    List,
    Mapping,
    NamedTuple,
    Optional,
    Sequence,
    Tuple,
    Union,
)

import numpy as np
import pandas as pd

from ..errors import (
    EmptyFileError,
    EmptyGroupError,
    MalformedRowError,
    NonFiniteScoreError,
    UnknownKindError,
)
from .distribution import ErrorSide

_logger = getLogger(__name__)

REQUIRED_COLS: List[str] = ["score", "kind", "group"]
"""Columns required in every score file"""

DEFAULT_MIN_PER_CELL: int = 50
"""Minimum number of records per (group, kind) cell before validation flags it"""

_CSV_FIRST_DATA_LINE = 2


class Kind(Enum):
    """
    Kind of a comparison.
    """

    GENUINE = "genuine"
    IMPOSTOR = "impostor"

    @classmethod
    def from_kind(cls, kind: Union["Kind", str]) -> "Kind":
        """
        Get kind from :class:`Kind` or string value.

        Parameters
        ----------
        kind
            Value to convert to enum value (can be
            ``"genuine"``/:attr:`Kind.GENUINE` or
            ``"impostor"``/:attr:`Kind.IMPOSTOR`)

        Returns
        -------
        Kind
            Enum value
        """
        if isinstance(kind, str):
            return cls[kind.upper()]
        return kind


class Polarity(Enum):
    """
    Meaning of larger scores.
    """

    SIMILARITY = "similarity"
    DISTANCE = "distance"

    @classmethod
    def from_polarity(cls, polarity: Union["Polarity", str]) -> "Polarity":
        """
        Get polarity from :class:`Polarity` or string value.

        Parameters
        ----------
        polarity
            Value to convert to enum value (can be
            ``"similarity"``/:attr:`Polarity.SIMILARITY` or
            ``"distance"``/:attr:`Polarity.DISTANCE`)

        Returns
        -------
        Polarity
            Enum value
        """
        if isinstance(polarity, str):
            return cls[polarity.upper()]
        return polarity

    def error_side(self, kind: Union[Kind, str]) -> ErrorSide:
        """
        Side of the score distribution of ``kind`` on which errors happen.

        For similarity scores genuine comparisons fail at low scores and impostor
        comparisons at high scores, for distances it is the other way around.

        Parameters
        ----------
        kind
            Comparison kind

        Returns
        -------
        :obj:`ErrorSide`
            Error side
        """
        genuine = Kind.from_kind(kind) == Kind.GENUINE
        if (self == Polarity.SIMILARITY) == genuine:
            return ErrorSide.LOW
        return ErrorSide.HIGH


class ScoreRecord(NamedTuple):
    """
    A single labelled comparison.
    """

    score: float
    kind: Kind
    group: str


def _parse_score(value: Any) -> Optional[float]:
    if isinstance(value, (bool, np.bool_)):
        return None
    try:
        return float(value)
    except (TypeError, ValueError):
        return None


def _locate(
    position: int, lines: Optional[Sequence[int]]
) -> Tuple[Optional[int], str]:
    if lines is None:
        return None, "record {}: ".format(position)
    return int(lines[position]), ""


def _format_data(
    df: pd.DataFrame, lines: Optional[Sequence[int]] = None
) -> pd.DataFrame:
    """
    Validate raw records and bring them into the internal representation.

    Parameters
    ----------
    df
        Raw records, at least the columns in :data:`REQUIRED_COLS`
    lines
        Line number of every record in its source file. If ``None``, errors
        report record positions instead of line numbers.

    Returns
    -------
    :obj:`pd.DataFrame`
        Records with float scores and string kinds and groups

    Raises
    ------
    MalformedRowError
        A required column is missing, a row has missing fields, a score is not a
        number or a group key is empty
    UnknownKindError
        A kind is neither ``genuine`` nor ``impostor``
    NonFiniteScoreError
        A score is NaN or infinite
    """
    missing = [c for c in REQUIRED_COLS if c not in df.columns]
    if missing:
        raise MalformedRowError("missing required columns `{}`!".format(missing))
    extra = [c for c in df.columns if c not in REQUIRED_COLS]
    if extra:
        _logger.debug("ignoring extra columns %s", extra)

    df = df[REQUIRED_COLS].reset_index(drop=True)
    n = len(df)

    problems: List[Tuple[int, type, str]] = []

    def first(mask: np.ndarray, error: type, message: str) -> None:
        hits = np.flatnonzero(mask)
        if hits.size:
            problems.append((int(hits[0]), error, message))

    numeric = pd.api.types.is_float_dtype(df["score"])
    absent = df.isna().to_numpy()
    if numeric:
        absent[:, 0] = False
    first(absent.any(axis=1), MalformedRowError, "missing field(s)")

    if numeric:
        scores = df["score"].to_numpy(dtype=float)
        unparsable = np.zeros(n, dtype=bool)
    else:
        parsed = [_parse_score(v) for v in df["score"]]
        unparsable = np.array([p is None for p in parsed], dtype=bool) & ~absent[:, 0]
        first(unparsable, MalformedRowError, "score is not a number")
        scores = np.array([np.nan if p is None else p for p in parsed], dtype=float)
    first(
        ~np.isfinite(scores) & ~unparsable & ~absent[:, 0],
        NonFiniteScoreError,
        "score is not finite",
    )

    kinds = df["kind"].map(lambda k: k.value if isinstance(k, Kind) else k)
    known = kinds.isin([k.value for k in Kind]).to_numpy()
    first(~known & ~absent[:, 1], UnknownKindError, "kind must be genuine or impostor")

    groups = df["group"]
    empty = np.array([not isinstance(g, str) or not g for g in groups], dtype=bool)
    first(empty & ~absent[:, 2], EmptyGroupError, "group key must not be empty")

    if problems:
        position, error, message = min(problems, key=lambda p: p[0])
        line, prefix = _locate(position, lines)
        raise error(prefix + message, line=line)

    return pd.DataFrame(
        {
            "score": scores,
            "kind": kinds.astype(str).to_numpy(),
            "group": groups.astype(str).to_numpy(),
        },
        index=pd.RangeIndex(n),
    )


class ScoreSet:
    """
    Validated, immutable collection of labelled comparison scores.
    """

    _data: pd.DataFrame
    """Records with columns ``score``, ``kind`` and ``group`` in input order"""

    _groups: Tuple[str, ...]
    """Group keys in order of first appearance"""

    _polarity: Polarity
    """Polarity of all scores"""

    def __init__(
        self,
        records: Union[pd.DataFrame, Sequence[ScoreRecord], Sequence[tuple]],
        polarity: Union[Polarity, str],
    ):
        """
        Initialize.

        Parameters
        ----------
        records
            Records as :class:`pd.DataFrame` with the columns in :data:`REQUIRED_COLS`
            or as sequence of ``(score, kind, group)`` tuples
        polarity
            Polarity of the scores. It is never inferred from the data.

        Raises
        ------
        ScoreDataError
            Records are invalid
        """
        if isinstance(records, pd.DataFrame):
            df = records.copy()
        else:
            df = pd.DataFrame(list(records), columns=REQUIRED_COLS)

        self._data = _format_data(df)
        self._polarity = Polarity.from_polarity(polarity)
        self._groups = tuple(pd.unique(self._data["group"]))

    @classmethod
    def _from_formatted(cls, data: pd.DataFrame, polarity: Polarity) -> "ScoreSet":
        score_set = cls.__new__(cls)
        score_set._data = data
        score_set._polarity = polarity
        score_set._groups = tuple(pd.unique(data["group"]))
        return score_set

    @property
    def polarity(self) -> Polarity:
        """
        :obj:`Polarity`: Polarity of all scores
        """
        return self._polarity

    @property
    def groups(self) -> Tuple[str, ...]:
        """
        tuple of str: Group keys in order of first appearance
        """
        return self._groups

    @property
    def k(self) -> int:
        """
        int: Number of groups
        """
        return len(self._groups)

    def __len__(self) -> int:
        return len(self._data)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, ScoreSet):
            return NotImplemented
        return self._polarity == other._polarity and self._data.equals(other._data)

    def __repr__(self) -> str:
        return "<ScoreSet: {} records, {} groups, {}>".format(
            len(self), self.k, self._polarity.value
        )

    def records(self) -> Iterator[ScoreRecord]:
        """
        Iterate over all records in input order.
        """
        for score, kind, group in self._data.itertuples(index=False, name=None):
            yield ScoreRecord(score, Kind(kind), group)

    def to_frame(self) -> pd.DataFrame:
        """
        Get a copy of the records.

        Returns
        -------
        :obj:`pd.DataFrame`
            Columns ``score``, ``kind`` and ``group``
        """
        return self._data.copy()

    def scores(
        self, kind: Optional[Union[Kind, str]] = None, group: Optional[str] = None
    ) -> np.ndarray:
        """
        Get scores, optionally restricted to one kind and/or one group.

        Parameters
        ----------
        kind
            Kind of comparisons to select, all kinds if ``None``
        group
            Group to select, all groups if ``None``

        Returns
        -------
        :obj:`np.ndarray`
            Scores in input order
        """
        mask = np.ones(len(self._data), dtype=bool)
        if kind is not None:
            mask &= (self._data["kind"] == Kind.from_kind(kind).value).to_numpy()
        if group is not None:
            mask &= (self._data["group"] == group).to_numpy()
        return self._data["score"].to_numpy()[mask]

    def partition(self, kind: Optional[Union[Kind, str]]) -> Dict[str, np.ndarray]:
        """
        Split the scores of one kind by group.

        Parameters
        ----------
        kind
            Kind of comparisons to partition. ``None`` combines genuine and impostor
            scores of every group.

        Returns
        -------
        dict
            One score array per group (empty if a group has no comparisons of
            ``kind``), in group order
        """
        data = self._data
        if kind is not None:
            data = data[data["kind"] == Kind.from_kind(kind).value]

        grouped = {
            group: scores.to_numpy()
            for group, scores in data.groupby("group", sort=False)["score"]
        }

        return {g: grouped.get(g, np.empty(0, dtype=float)) for g in self._groups}

    def counts(self) -> pd.DataFrame:
        """
        Count records per group and kind.

        Returns
        -------
        :obj:`pd.DataFrame`
            Groups as index (in group order), kinds as columns
        """
        counts = pd.crosstab(self._data["group"], self._data["kind"])
        counts = counts.reindex(
            index=list(self._groups), columns=[k.value for k in Kind], fill_value=0
        )
        counts.index.name = "group"
        counts.columns.name = "kind"
        return counts.astype(int)

    def relabel(self, mapping: Mapping[str, str]) -> "ScoreSet":
        """
        Rename groups.

        Parameters
        ----------
        mapping
            Old to new group keys, groups not in ``mapping`` keep their key

        Returns
        -------
        :obj:`ScoreSet`
            New score set with renamed groups
        """
        data = self._data.copy()
        data["group"] = data["group"].map(lambda g: mapping.get(g, g))
        return self._from_formatted(data, self._polarity)

    def to_csv(self, path: str) -> None:
        """
        Write the records to a CSV file which :func:`ingest_csv` reads back losslessly.

        Parameters
        ----------
        path
            Path to write to
        """
        out = self._data.copy()
        out["score"] = [repr(float(s)) for s in out["score"]]
        out.to_csv(path, index=False, lineterminator="\n", encoding="utf-8")
        _logger.info("Wrote %d records to %s", len(out), path)


class ValidationReport(NamedTuple):
    """
    Outcome of :func:`validate_for_fairness`.
    """

    counts: pd.DataFrame
    k: int
    min_per_cell: int
    flags: Tuple[str, ...]

    @property
    def ok(self) -> bool:
        """
        bool: ``True`` if nothing was flagged
        """
        return not self.flags


def _check_exists(path: str) -> None:
    if not os.path.exists(path):
        raise OSError("no score file `{}` found!".format(path))


def ingest_csv(
    path: str, polarity: Union[Polarity, str], encoding: str = "utf-8"
) -> ScoreSet:
    """
    Read scores from a CSV file with the header ``score,kind,group``.

    Further columns are ignored. Blank lines are skipped, line numbers in errors
    refer to the file as written.

    Parameters
    ----------
    path
        File to read
    polarity
        Polarity of the scores
    encoding
        File encoding

    Returns
    -------
    :obj:`ScoreSet`
        Validated scores in file order

    Raises
    ------
    OSError
        ``path`` does not exist
    EmptyFileError
        The file holds no records
    MalformedRowError
        The file cannot be decoded or a row cannot be parsed, the line number is
        reported
    UnknownKindError
        A kind is neither ``genuine`` nor ``impostor``
    NonFiniteScoreError
        A score is NaN or infinite
    """
    _check_exists(path)
    _logger.info("Reading %s", path)
    try:
        df = pd.read_csv(
            path,
            dtype=str,
            keep_default_na=False,
            skip_blank_lines=False,
            encoding=encoding,
        )
        lines, widths = _record_layout(path, encoding)
    except UnicodeDecodeError as exc:
        raise _undecodable(path, encoding, exc)
    except pd.errors.EmptyDataError:
        raise EmptyFileError("no data in `{}`".format(path))
    except pd.errors.ParserError as exc:
        raise MalformedRowError(str(exc), line=_parser_error_line(str(exc)))

    if len(lines) != len(df):
        _logger.debug("cannot map records of %s to lines, assuming one per line", path)
        lines = np.arange(len(df)) + _CSV_FIRST_DATA_LINE
        widths = np.full(len(df), df.shape[1])

    # the parser pads short rows with empty strings
    for position in np.flatnonzero((widths > 0) & (widths < df.shape[1])):
        df.iloc[position, widths[position] :] = np.nan

    present = widths > 0
    df = df[present]
    if df.empty:
        raise EmptyFileError("no records in `{}`".format(path))

    return ScoreSet._from_formatted(
        _format_data(df, lines=lines[present]), Polarity.from_polarity(polarity)
    )


def _record_layout(path: str, encoding: str) -> Tuple[np.ndarray, np.ndarray]:
    """
    Source line and number of fields of every record below the header.

    Blank lines count as records without fields.
    """
    lines = []
    widths = []
    with open(path, encoding=encoding, newline="") as fh:
        reader = csv.reader(fh)
        next(reader, None)
        for row in reader:
            lines.append(reader.line_num)
            blank = not row or (len(row) == 1 and not row[0].strip())
            widths.append(0 if blank else len(row))

    return np.array(lines, dtype=int), np.array(widths, dtype=int)


def _undecodable(
    path: str, encoding: str, exc: UnicodeDecodeError
) -> MalformedRowError:
    return MalformedRowError(
        "cannot decode `{}` as {} (byte {}: {})".format(
            path, encoding, exc.start, exc.reason
        )
    )


def _parser_error_line(message: str) -> Optional[int]:
    marker = " in line "
    if marker not in message:
        return None
    digits = message.split(marker, 1)[1].split(",", 1)[0].strip()
    return int(digits) if digits.isdigit() else None


def ingest_json(path: str, polarity: Union[Polarity, str]) -> ScoreSet:
    """
    Read scores from a JSON file holding an array of ``{score, kind, group}`` objects.

    Parameters
    ----------
    path
        File to read
    polarity
        Polarity of the scores

    Returns
    -------
    :obj:`ScoreSet`
        Validated scores in file order

    Raises
    ------
    OSError
        ``path`` does not exist
    EmptyFileError
        The array is empty
    MalformedRowError
        The file is not valid UTF-8 JSON, not an array of objects or an object lacks
        a field
    """
    _check_exists(path)
    _logger.info("Reading %s", path)
    try:
        with open(path, encoding="utf-8") as fh:
            raw = json.load(fh)
    except UnicodeDecodeError as exc:
        raise _undecodable(path, "utf-8", exc)
    except json.JSONDecodeError as exc:
        raise MalformedRowError(exc.msg, line=exc.lineno)

    if not isinstance(raw, list):
        raise MalformedRowError("expected an array of records")
    if not raw:
        raise EmptyFileError("no records in `{}`".format(path))
    for position, record in enumerate(raw):
        if not isinstance(record, dict):
            raise MalformedRowError("record {}: expected an object".format(position))

    df = pd.DataFrame.from_records(raw, columns=REQUIRED_COLS)

    return ScoreSet._from_formatted(
        _format_data(df.astype(object)), Polarity.from_polarity(polarity)
    )


def ingest(path: str, polarity: Union[Polarity, str]) -> ScoreSet:
    """
    Read scores with :func:`ingest_json` for ``.json`` files and :func:`ingest_csv`
    otherwise.
    """
    if path.lower().endswith(".json"):
        return ingest_json(path, polarity)
    return ingest_csv(path, polarity)


def validate_for_fairness(
    score_set: ScoreSet, min_per_cell: int = DEFAULT_MIN_PER_CELL
) -> ValidationReport:
    """
    Check whether a score set supports fairness computations.

    Nothing is raised, callers decide what to do with the flags.

    Parameters
    ----------
    score_set
        Scores to check
    min_per_cell
        Minimum number of records per (group, kind) cell

    Returns
    -------
    :obj:`ValidationReport`
        Per-cell counts and flags
    """
    counts = score_set.counts()
    flags = []
    if score_set.k < 2:
        flags.append("K<2: fairness undefined")

    for group, row in counts.iterrows():
        for kind, n in row.items():
            if n == 0:
                flags.append("({}, {}): no records".format(group, kind))
            elif n < min_per_cell:
                flags.append(
                    "({}, {}): {} records, below minimum of {}".format(
                        group, kind, n, min_per_cell
                    )
                )

    for flag in flags:
        _logger.warning("validation: %s", flag)

    return ValidationReport(counts, score_set.k, min_per_cell, tuple(flags))
