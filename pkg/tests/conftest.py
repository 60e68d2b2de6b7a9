"""
Fixtures and data for tests.
"""

from os.path import abspath, dirname, join

import numpy as np
import pandas as pd
import pytest

from equityindex.core.distribution import BinGrid
from equityindex.core.scores import Polarity, ScoreSet

TEST_DATA = join(dirname(abspath(__file__)), "test_data")

MINIMAL_CSV = (
    "score,kind,group\n"
    "0.9,genuine,A\n"
    "0.2,impostor,A\n"
    "0.8,genuine,B\n"
    "0.3,impostor,B\n"
)

# bin centres of a 4-bin grid on [0, 1]
QUARTER_CENTRES = (0.125, 0.375, 0.625, 0.875)


def scores_from_counts(counts, centres=QUARTER_CENTRES):
    """
    Scores reproducing the given counts per bin.
    """
    return np.repeat(np.asarray(centres, dtype=float), counts)


def make_score_set(genuine, impostor, polarity=Polarity.SIMILARITY):
    """
    Build a score set from ``{group: scores}`` mappings of both kinds.
    """
    frames = []
    for kind, by_group in (("genuine", genuine), ("impostor", impostor)):
        for group, scores in by_group.items():
            frames.append(
                pd.DataFrame(
                    {
                        "score": np.asarray(scores, dtype=float),
                        "kind": kind,
                        "group": group,
                    }
                )
            )
    return ScoreSet(pd.concat(frames, ignore_index=True), polarity)


@pytest.fixture
def test_data_path():
    return TEST_DATA


@pytest.fixture
def minimal_csv(tmp_path):
    path = tmp_path / "scores.csv"
    path.write_text(MINIMAL_CSV, encoding="utf-8")
    yield str(path)


@pytest.fixture
def minimal_set():
    yield ScoreSet(
        [
            (0.9, "genuine", "A"),
            (0.2, "impostor", "A"),
            (0.8, "genuine", "B"),
            (0.3, "impostor", "B"),
        ],
        Polarity.SIMILARITY,
    )


@pytest.fixture
def quarter_grid():
    yield BinGrid(0.0, 1.0, 4)


@pytest.fixture
def tail_skew_scores():
    """
    Impostor scores of two groups sharing their centre but not their upper tail.
    """
    yield {
        "A": scores_from_counts([40, 40, 10, 10]),
        "B": scores_from_counts([40, 40, 5, 15]),
    }


@pytest.fixture(scope="module")
def fair_set():
    """
    Three groups with identical, overlapping genuine and impostor scores.
    """
    rng = np.random.default_rng(0)
    genuine = rng.normal(0.45, 0.1, 2000).clip(0, 1)
    impostor = rng.normal(0.2, 0.08, 2000).clip(0, 1)
    yield make_score_set(
        {g: genuine for g in ("A", "B", "C")}, {g: impostor for g in ("A", "B", "C")}
    )


@pytest.fixture
def test_scenario(request):
    """
    Get an instance of the requesting class' ``tscenario`` property.
    """
    yield request.cls.tscenario()


@pytest.fixture
def score_set_factory():
    """
    Get :func:`make_score_set`.
    """
    return make_score_set


@pytest.fixture
def binned_scores():
    """
    Get :func:`scores_from_counts`.
    """
    return scores_from_counts
