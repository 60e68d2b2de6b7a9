"""
Synthetic score populations with injected demographic bias.

Every scenario starts from two reference laws, a genuine law centered at high
similarity and an impostor law centered at low similarity with little overlap, as
produced by a competitive verification model. All groups but one draw their scores from
the reference laws. The remaining (biased) group draws from laws modified by the
scenario:

- ``clean``: no modification
- ``bg``: the genuine law gets a heavier tail towards the impostor region
- ``bi``: the impostor law gets a heavier tail towards the genuine region
- ``bc``: both laws are shifted while the error rates at the operating region are kept

A scenario's strength scales its modification, strength zero always reproduces the
reference laws.
"""
import json
import zlib
from abc import ABCMeta, abstractmethod
from enum import Enum
from logging import getLogger
from typing import Any, Dict, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd

from ..core.distribution import ErrorSide
from ..core.scores import Kind, Polarity, ScoreSet
from ..errors import InvalidSpecError, UnknownScenarioError
from .laws import ScoreLaw, TruncatedNormal

_logger = getLogger(__name__)

_loaded_scenarios: Dict[str, type] = {}

DEFAULT_GENUINE_LAW: TruncatedNormal = TruncatedNormal(0.7, 0.08)
"""Reference law of genuine similarity scores"""

DEFAULT_IMPOSTOR_LAW: TruncatedNormal = TruncatedNormal(0.2, 0.08)
"""Reference law of impostor similarity scores"""

DEFAULT_GROUPS: Tuple[str, ...] = ("reference", "biased")
"""Default group keys, the last one is biased"""

DEFAULT_N_COMPARISONS: int = 100000
"""Default number of comparisons per group and kind"""


class ScenarioKind(Enum):
    """
    Synthetic bias scenario.
    """

    CLEAN = "clean"
    BG = "bg"
    BI = "bi"
    BC = "bc"

    @classmethod
    def from_scenario_kind(
        cls, scenario: Union["ScenarioKind", str]
    ) -> "ScenarioKind":
        """
        Get scenario from :class:`ScenarioKind` or string value.

        Parameters
        ----------
        scenario
            Value to convert to enum value (can be ``"clean"``, ``"bg"``, ``"bi"`` or
            ``"bc"`` in any case, or the corresponding enum values)

        Returns
        -------
        ScenarioKind
            Enum value

        Raises
        ------
        UnknownScenarioError
            ``scenario`` is not a known scenario
        """
        if isinstance(scenario, str):
            try:
                return cls[scenario.upper()]
            except KeyError:
                raise UnknownScenarioError("Unknown scenario '{}'".format(scenario))
        return scenario


class Scenario(metaclass=ABCMeta):
    """
    All scenarios are implemented as subclasses of :class:`Scenario`.

    A scenario derives the laws of the biased group from the reference laws.
    """

    genuine: ScoreLaw
    """Reference law of genuine scores"""

    impostor: ScoreLaw
    """Reference law of impostor scores"""

    def __init__(
        self,
        genuine: ScoreLaw = DEFAULT_GENUINE_LAW,
        impostor: ScoreLaw = DEFAULT_IMPOSTOR_LAW,
    ):
        """
        Initialize.

        Parameters
        ----------
        genuine
            Reference law of genuine scores
        impostor
            Reference law of impostor scores
        """
        self.genuine = genuine
        self.impostor = impostor

    def biased_laws(self, strength: float) -> Tuple[ScoreLaw, ScoreLaw]:
        """
        Laws of the biased group.

        Parameters
        ----------
        strength
            Non-negative bias strength, zero returns the reference laws

        Returns
        -------
        :obj:`ScoreLaw`, :obj:`ScoreLaw`
            Genuine and impostor law

        Raises
        ------
        InvalidSpecError
            ``strength`` is negative or too large for the scenario
        """
        if not strength >= 0:
            raise InvalidSpecError("strength must be >= 0, got {}".format(strength))
        if strength == 0:
            return self.genuine, self.impostor
        return self._biased_laws(strength)

    @abstractmethod
    def _biased_laws(self, strength: float) -> Tuple[ScoreLaw, ScoreLaw]:
        """
        To be implemented by specific scenarios.

        Derive the laws of the biased group for a positive ``strength``.
        """


def load_scenario(name: Union[ScenarioKind, str]) -> type:
    """
    Load scenario with a given name.

    Parameters
    ----------
    name
        Name of the scenario

    Returns
    -------
    type
        Requested scenario class

    Raises
    ------
    UnknownScenarioError
        Scenario not found
    """
    kind = ScenarioKind.from_scenario_kind(name)
    if kind.value in _loaded_scenarios:
        return _loaded_scenarios[kind.value]

    scenario: Optional[type] = None
    if kind == ScenarioKind.CLEAN:
        from .clean import Clean  # pylint: disable=cyclic-import

        scenario = Clean
    elif kind == ScenarioKind.BG:
        from .tails import BiasedGenuineTail  # pylint: disable=cyclic-import

        scenario = BiasedGenuineTail
    elif kind == ScenarioKind.BI:
        from .tails import BiasedImpostorTail  # pylint: disable=cyclic-import

        scenario = BiasedImpostorTail
    elif kind == ScenarioKind.BC:
        from .centers import BiasedCenters  # pylint: disable=cyclic-import

        scenario = BiasedCenters

    if scenario is None:
        raise UnknownScenarioError("Unknown scenario '{}'".format(kind.value))

    _loaded_scenarios[kind.value] = scenario
    return scenario


class ScenarioSpec:
    """
    Parameters of a synthetic score population.
    """

    scenario: ScenarioKind
    """Bias scenario"""

    n_genuine: int
    """Number of genuine comparisons per group"""

    n_impostor: int
    """Number of impostor comparisons per group"""

    groups: Tuple[str, ...]
    """Group keys"""

    biased_group: str
    """Group drawing from the modified laws"""

    strength: float
    """Bias strength, zero reduces every scenario to ``clean``"""

    seed: int
    """Seed of the random number generators"""

    def __init__(  # pylint: disable=too-many-arguments
        self,
        scenario: Union[ScenarioKind, str] = ScenarioKind.CLEAN,
        n_genuine: int = DEFAULT_N_COMPARISONS,
        n_impostor: int = DEFAULT_N_COMPARISONS,
        groups: Sequence[str] = DEFAULT_GROUPS,
        biased_group: Optional[str] = None,
        strength: float = 1.0,
        seed: int = 0,
    ):
        """
        Initialize.

        Parameters
        ----------
        scenario
            Bias scenario
        n_genuine
            Number of genuine comparisons per group
        n_impostor
            Number of impostor comparisons per group
        groups
            Group keys
        biased_group
            Group drawing from the modified laws, the last group if ``None``
        strength
            Bias strength
        seed
            Seed of the random number generators

        Raises
        ------
        InvalidSpecError
            A value is invalid
        """
        self.scenario = ScenarioKind.from_scenario_kind(scenario)
        self.n_genuine = n_genuine
        self.n_impostor = n_impostor
        self.groups = tuple(groups)
        if biased_group is None and self.groups:
            biased_group = self.groups[-1]
        self.biased_group = biased_group
        self.strength = strength
        self.seed = seed
        self.validate()

    @property
    def polarity(self) -> Polarity:
        """
        :obj:`Polarity`: Synthetic scores are similarities
        """
        return Polarity.SIMILARITY

    def validate(self) -> "ScenarioSpec":
        """
        Check all values.

        Returns
        -------
        :obj:`ScenarioSpec`
            ``self``

        Raises
        ------
        InvalidSpecError
            A value is invalid
        """
        for name in ("n_genuine", "n_impostor", "seed"):
            value = getattr(self, name)
            if isinstance(value, bool) or not isinstance(value, (int, np.integer)):
                raise InvalidSpecError(
                    "{} must be an integer, got {!r}".format(name, value)
                )
        if self.n_genuine < 1 or self.n_impostor < 1:
            raise InvalidSpecError(
                "at least one comparison per group and kind is required"
            )
        if self.seed < 0:
            raise InvalidSpecError(
                "seed must be non-negative, got {}".format(self.seed)
            )
        if len(self.groups) < 2:
            raise InvalidSpecError("at least 2 groups are required")
        if len(set(self.groups)) != len(self.groups):
            raise InvalidSpecError("group keys must be unique")
        if any(not isinstance(g, str) or not g for g in self.groups):
            raise InvalidSpecError("group keys must be non-empty strings")
        if self.biased_group not in self.groups:
            raise InvalidSpecError(
                "biased group `{}` is not one of {}".format(
                    self.biased_group, list(self.groups)
                )
            )
        if isinstance(self.strength, bool) or not np.isfinite(self.strength):
            raise InvalidSpecError("strength must be a finite number")
        if self.strength < 0:
            raise InvalidSpecError(
                "strength must be >= 0, got {}".format(self.strength)
            )

        return self

    def to_dict(self) -> Dict[str, Any]:
        """
        Get JSON-ready representation.
        """
        return {
            "scenario": self.scenario.value,
            "n_genuine": self.n_genuine,
            "n_impostor": self.n_impostor,
            "groups": list(self.groups),
            "biased_group": self.biased_group,
            "strength": self.strength,
            "seed": self.seed,
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "ScenarioSpec":
        """
        Create a specification from a dictionary mirroring :meth:`to_dict`.

        Raises
        ------
        InvalidSpecError
            ``data`` holds unknown keys or invalid values
        """
        unknown = set(data) - set(cls().to_dict())
        if unknown:
            raise InvalidSpecError("unknown scenario key(s) {}".format(sorted(unknown)))
        return cls(**data)

    @classmethod
    def from_json(cls, path: str) -> "ScenarioSpec":
        """
        Read a specification from a JSON file mirroring :meth:`to_dict`.

        Raises
        ------
        InvalidSpecError
            The file cannot be read or holds invalid values
        """
        try:
            with open(path, encoding="utf-8") as fh:
                data = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise InvalidSpecError("cannot read scenario `{}`: {}".format(path, exc))
        if not isinstance(data, dict):
            raise InvalidSpecError("scenario `{}` must hold an object".format(path))

        return cls.from_dict(data)

    def replace(self, **overrides: Any) -> "ScenarioSpec":
        """
        Derive a specification with some values replaced, ``None`` values are ignored.
        """
        values = self.to_dict()
        if "groups" in overrides and overrides["groups"] is not None:
            values["biased_group"] = None
        values.update({k: v for k, v in overrides.items() if v is not None})
        return self.from_dict(values)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, ScenarioSpec):
            return NotImplemented
        return self.to_dict() == other.to_dict()

    def __repr__(self) -> str:
        return "ScenarioSpec({})".format(self.to_dict())


def _generator(seed: int, group: str, kind: Kind) -> np.random.Generator:
    # independent stream per (seed, group, kind), insensitive to group order
    entropy = [int(seed), zlib.crc32(group.encode("utf-8")), list(Kind).index(kind)]
    return np.random.default_rng(np.random.SeedSequence(entropy))


def generate(spec: ScenarioSpec) -> ScoreSet:
    """
    Draw a synthetic score population.

    Parameters
    ----------
    spec
        Scenario specification

    Returns
    -------
    :obj:`ScoreSet`
        Similarity scores, per group first the genuine then the impostor comparisons

    Raises
    ------
    InvalidSpecError
        ``spec`` is invalid
    """
    spec.validate()
    scenario = load_scenario(spec.scenario)()
    reference = (scenario.genuine, scenario.impostor)
    biased = scenario.biased_laws(spec.strength)
    _logger.info(
        "Generating %s (strength %s, seed %s), biased laws %r",
        spec.scenario.value,
        spec.strength,
        spec.seed,
        biased,
    )

    scores, kinds, groups = [], [], []
    for group in spec.groups:
        genuine_law, impostor_law = biased if group == spec.biased_group else reference
        for kind, law, n in (
            (Kind.GENUINE, genuine_law, spec.n_genuine),
            (Kind.IMPOSTOR, impostor_law, spec.n_impostor),
        ):
            scores.append(law.sample(n, _generator(spec.seed, group, kind)))
            kinds.append(np.full(n, kind.value, dtype=object))
            groups.append(np.full(n, group, dtype=object))

    records = pd.DataFrame(
        {
            "score": np.concatenate(scores),
            "kind": np.concatenate(kinds),
            "group": np.concatenate(groups),
        }
    )

    return ScoreSet(records, spec.polarity)


def export_csv(score_set: ScoreSet, path: str) -> None:
    """
    Write scores in the CSV format read by :func:`equityindex.core.scores.ingest_csv`.

    Scores are written at full precision so that reading the file back reproduces
    ``score_set`` exactly.

    Parameters
    ----------
    score_set
        Scores to write
    path
        Path to write to

    Raises
    ------
    OSError
        ``path`` is not writable
    """
    score_set.to_csv(path)


def summarize(score_set: ScoreSet, percentile: float = 95.0) -> pd.DataFrame:
    """
    Summary statistics of every (group, kind) cell.

    Parameters
    ----------
    score_set
        Scores
    percentile
        The tail mass of a cell is its share of scores beyond this percentile of the
        pooled scores of the same kind, on the error side

    Returns
    -------
    :obj:`pd.DataFrame`
        Columns ``count``, ``mean``, ``std`` and ``tail_mass`` indexed by group and
        kind
    """
    rows = []
    for kind in Kind:
        pooled = score_set.scores(kind)
        low = score_set.polarity.error_side(kind) == ErrorSide.LOW
        threshold = (
            np.percentile(pooled, 100 - percentile if low else percentile)
            if pooled.size
            else np.nan
        )
        for group, scores in score_set.partition(kind).items():
            tail = scores < threshold if low else scores > threshold
            rows.append(
                {
                    "group": group,
                    "kind": kind.value,
                    "count": scores.size,
                    "mean": scores.mean() if scores.size else np.nan,
                    "std": scores.std() if scores.size else np.nan,
                    "tail_mass": tail.mean() if scores.size else np.nan,
                }
            )

    return pd.DataFrame(rows).set_index(["group", "kind"]).sort_index(
        level="group", sort_remaining=False
    )
