import os
import re

import numpy as np
import pandas as pd
import pytest

from equityindex.core.distribution import ErrorSide
from equityindex.core.scores import (
    Kind,
    Polarity,
    ScoreRecord,
    ScoreSet,
    ingest,
    ingest_csv,
    ingest_json,
    validate_for_fairness,
)
from equityindex.errors import (
    EmptyFileError,
    EmptyGroupError,
    MalformedRowError,
    NonFiniteScoreError,
    ScoreDataError,
    UnknownKindError,
)


def _write(tmp_path, text, name="scores.csv"):
    path = tmp_path / name
    path.write_text(text, encoding="utf-8")
    return str(path)


def test_kind_from_kind():
    assert Kind.from_kind("Genuine") == Kind.GENUINE
    assert Kind.from_kind(Kind.IMPOSTOR) == Kind.IMPOSTOR


@pytest.mark.parametrize(
    "polarity,kind,side",
    [
        ("similarity", "genuine", ErrorSide.LOW),
        ("similarity", "impostor", ErrorSide.HIGH),
        ("distance", "genuine", ErrorSide.HIGH),
        ("distance", "impostor", ErrorSide.LOW),
    ],
)
def test_polarity_error_side(polarity, kind, side):
    assert Polarity.from_polarity(polarity).error_side(kind) == side


def test_ingest_minimal(minimal_csv):
    score_set = ingest_csv(minimal_csv, "similarity")

    assert len(score_set) == 4
    assert score_set.k == 2
    assert score_set.groups == ("A", "B")
    assert score_set.polarity == Polarity.SIMILARITY
    assert list(score_set.records())[2] == ScoreRecord(0.8, Kind.GENUINE, "B")


def test_ingest_json_matches_csv(minimal_csv, test_data_path):
    from_json = ingest_json(os.path.join(test_data_path, "scores.json"), "similarity")

    assert from_json == ingest_csv(minimal_csv, "similarity")


def test_ingest_dispatch(test_data_path):
    score_set = ingest(os.path.join(test_data_path, "scores.json"), "distance")
    assert score_set.polarity == Polarity.DISTANCE


def test_ingest_ignores_extra_columns(test_data_path):
    score_set = ingest(os.path.join(test_data_path, "distances.csv"), "distance")

    assert list(score_set.to_frame().columns) == ["score", "kind", "group"]
    assert score_set.counts().loc["B"].tolist() == [2, 1]


def test_ingest_missing_file(tmp_path):
    path = str(tmp_path / "missing.csv")
    message = "no score file `{}` found!".format(path)
    with pytest.raises(OSError, match=re.escape(message)):
        ingest_csv(path, "similarity")


def test_ingest_nan_reports_line(tmp_path):
    path = _write(tmp_path, "score,kind,group\n0.9,genuine,A\nNaN,genuine,B\n")

    error_msg = re.escape("line 3: score is not finite")
    with pytest.raises(NonFiniteScoreError, match=error_msg) as exc:
        ingest_csv(path, "similarity")
    assert exc.value.line == 3


def test_ingest_unknown_kind(tmp_path):
    path = _write(tmp_path, "score,kind,group\n0.9,Genuine,A\n")

    with pytest.raises(UnknownKindError, match="line 2"):
        ingest_csv(path, "similarity")


@pytest.mark.parametrize(
    "row,error,message",
    [
        ("abc,genuine,A", MalformedRowError, "score is not a number"),
        ("inf,impostor,A", NonFiniteScoreError, "score is not finite"),
        ("0.5,impostor,", EmptyGroupError, "group key must not be empty"),
    ],
)
def test_ingest_bad_rows(tmp_path, row, error, message):
    header = "score,kind,group\n0.1,genuine,A\n0.2,genuine,A\n"
    path = _write(tmp_path, header + row + "\n")

    with pytest.raises(error, match=re.escape("line 4: " + message)):
        ingest_csv(path, "similarity")


def test_ingest_short_row_is_missing_field(tmp_path):
    path = _write(tmp_path, "score,kind,group\n0.1,genuine,A\n0.2,impostor\n")

    message = re.escape("line 3: missing field(s)")
    with pytest.raises(MalformedRowError, match=message) as exc:
        ingest_csv(path, "similarity")
    assert not isinstance(exc.value, EmptyGroupError)


@pytest.mark.parametrize(
    "text",
    [
        "score,kind,group\n0.1,genuine,A\n0.2,impostor,A\n\n",
        "score,kind,group\n\n0.1,genuine,A\n\n0.2,impostor,A\n",
    ],
)
def test_ingest_skips_blank_lines(tmp_path, text):
    score_set = ingest_csv(_write(tmp_path, text), "similarity")

    assert len(score_set) == 2
    assert score_set.counts().loc["A"].tolist() == [1, 1]


def test_ingest_blank_lines_keep_line_numbers(tmp_path):
    path = _write(tmp_path, "score,kind,group\n\n0.1,genuine,A\n\nabc,genuine,A\n")

    with pytest.raises(MalformedRowError) as exc:
        ingest_csv(path, "similarity")
    assert exc.value.line == 5


@pytest.mark.parametrize("name", ["scores.csv", "scores.json"])
def test_ingest_undecodable(tmp_path, name):
    path = tmp_path / name
    path.write_bytes(b"score,kind,group\n0.9,genuine,\xff\xfe\n")

    with pytest.raises(MalformedRowError, match="cannot decode .* as utf-8"):
        ingest(str(path), "similarity")


def test_ingest_earliest_problem_wins(tmp_path):
    path = _write(tmp_path, "score,kind,group\n0.1,friend,A\nnan,genuine,A\n")

    with pytest.raises(UnknownKindError, match="line 2"):
        ingest_csv(path, "similarity")


def test_ingest_missing_columns(tmp_path):
    path = _write(tmp_path, "score,group\n0.1,A\n")

    with pytest.raises(
        MalformedRowError, match=re.escape("missing required columns `['kind']`!")
    ):
        ingest_csv(path, "similarity")


def test_ingest_wrong_field_count(tmp_path):
    path = _write(tmp_path, "score,kind,group\n0.1,genuine,A\n0.2,genuine,A,extra\n")

    with pytest.raises(MalformedRowError) as exc:
        ingest_csv(path, "similarity")
    assert exc.value.line == 3


@pytest.mark.parametrize("text", ["", "score,kind,group\n", "score,kind,group\n\n\n"])
def test_ingest_empty(tmp_path, text):
    path = _write(tmp_path, text)

    with pytest.raises(EmptyFileError):
        ingest_csv(path, "similarity")


def test_ingest_json_not_an_array(tmp_path):
    path = _write(tmp_path, '{"score": 0.1}', name="scores.json")

    with pytest.raises(MalformedRowError, match="expected an array of records"):
        ingest_json(path, "similarity")


def test_ingest_json_invalid(tmp_path):
    path = _write(tmp_path, "[\n{\"score\": 0.1,\n", name="scores.json")

    with pytest.raises(MalformedRowError) as exc:
        ingest_json(path, "similarity")
    assert exc.value.line is not None


def test_score_data_errors_are_value_errors():
    assert issubclass(MalformedRowError, ValueError)
    assert issubclass(EmptyGroupError, ScoreDataError)


def test_score_set_rejects_bool_scores():
    with pytest.raises(MalformedRowError, match="record 0"):
        ScoreSet(
            pd.DataFrame({"score": [True], "kind": ["genuine"], "group": ["A"]}),
            "similarity",
        )


def test_partition(minimal_set):
    genuine = minimal_set.partition(Kind.GENUINE)
    impostor = minimal_set.partition("impostor")

    assert list(genuine) == ["A", "B"]
    np.testing.assert_array_equal(genuine["A"], [0.9])
    np.testing.assert_array_equal(genuine["B"], [0.8])
    np.testing.assert_array_equal(impostor["A"], [0.2])
    np.testing.assert_array_equal(impostor["B"], [0.3])


def test_partition_covers_every_record(minimal_set):
    for kind in Kind:
        parts = minimal_set.partition(kind)
        assert len(parts) == minimal_set.k
        assert sorted(np.concatenate(list(parts.values()))) == sorted(
            minimal_set.scores(kind)
        )


def test_partition_empty_cell():
    score_set = ScoreSet(
        [(0.9, "genuine", "A"), (0.2, "impostor", "A"), (0.3, "impostor", "B")],
        "similarity",
    )

    genuine = score_set.partition(Kind.GENUINE)
    assert genuine["B"].size == 0


def test_partition_combined(minimal_set):
    combined = minimal_set.partition(None)
    np.testing.assert_array_equal(combined["A"], [0.9, 0.2])


def test_groups_keep_first_appearance():
    score_set = ScoreSet(
        [(0.1, "genuine", "b"), (0.2, "genuine", "a"), (0.3, "genuine", "B")],
        "similarity",
    )
    assert score_set.groups == ("b", "a", "B")


def test_relabel(minimal_set):
    relabelled = minimal_set.relabel({"A": "X"})

    assert relabelled.groups == ("X", "B")
    np.testing.assert_array_equal(relabelled.scores(group="X"), [0.9, 0.2])


def test_to_csv_round_trip(tmp_path, score_set_factory):
    rng = np.random.default_rng(3)
    score_set = score_set_factory(
        {"A": rng.random(50), "B": rng.random(30) / 3},
        {"A": rng.random(40), "B": rng.random(20)},
    )
    path = str(tmp_path / "out.csv")
    score_set.to_csv(path)

    assert ingest_csv(path, "similarity") == score_set


def test_validate_ok(minimal_set):
    report = validate_for_fairness(minimal_set, min_per_cell=1)

    assert report.ok
    assert report.k == 2
    assert report.counts.loc["A", "genuine"] == 1


def test_validate_single_group():
    score_set = ScoreSet([(0.9, "genuine", "A"), (0.1, "impostor", "A")], "similarity")

    report = validate_for_fairness(score_set, min_per_cell=1)
    assert "K<2: fairness undefined" in report.flags


def test_validate_empty_and_small_cells():
    score_set = ScoreSet(
        [(0.9, "genuine", "A"), (0.2, "impostor", "A"), (0.3, "impostor", "B")],
        "similarity",
    )

    report = validate_for_fairness(score_set, min_per_cell=2)
    assert "(B, genuine): no records" in report.flags
    assert "(A, genuine): 1 records, below minimum of 2" in report.flags
    assert not report.ok
