import pytest

from equityindex.core.evaluation import evaluate_all
from equityindex.core.scores import ingest_csv
from equityindex.scenarios import ScenarioSpec, export_csv, generate
from equityindex.scenarios.benchmark import benchmark_config, check_no_bias


@pytest.fixture(scope="module")
def clean_export(tmp_path_factory):
    score_set = generate(ScenarioSpec("clean", n_genuine=10000, n_impostor=10000))
    path = str(tmp_path_factory.mktemp("synthetic") / "clean.csv")
    export_csv(score_set, path)
    return score_set, path


def test_export_round_trip(clean_export):
    score_set, path = clean_export

    read = ingest_csv(path, "similarity")

    assert read == score_set
    assert read.counts().values.tolist() == [[10000, 10000]] * 2


def test_clean_export_is_fair(clean_export):
    _, path = clean_export
    config = benchmark_config(metrics=["dfi", "cei"])

    report = evaluate_all(ingest_csv(path, "similarity"), config)

    assert report.ok
    check = check_no_bias({"clean": report})
    assert check.passed, check.summary()
