import numpy as np
import pandas as pd
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from equityindex.core.distribution import (
    BinGrid,
    Distribution,
    kl_divergence,
    mean_distribution,
    percentile_threshold,
    split,
)
from equityindex.core.evaluation import EvalConfig, evaluate_all
from equityindex.core.metrics import (
    CeiConfig,
    cei,
    dfi,
    garbe,
    group_divergences,
    inequity,
)
from equityindex.core.rates import GroupRates
from equityindex.core.scores import ScoreSet
from equityindex.errors import DegenerateSplitError

N_BINS = 8
GRID = BinGrid(0.0, 1.0, N_BINS)
CENTRES = GRID.edges[:-1] + GRID.width / 2

counts = st.lists(
    st.integers(min_value=0, max_value=50), min_size=N_BINS, max_size=N_BINS
).filter(lambda c: sum(c) > 0)

rates = st.floats(min_value=1e-4, max_value=1.0, allow_nan=False)


def _distribution(bin_counts):
    bin_counts = np.asarray(bin_counts, dtype=float)
    return Distribution(GRID, bin_counts / bin_counts.sum(), int(bin_counts.sum()))


def _group_rates(values):
    return [
        GroupRates(str(i), fmr=v, fnmr=v, n_impostor=1000, n_genuine=1000)
        for i, v in enumerate(values)
    ]


@given(counts, counts)
def test_divergence_is_non_negative(first, second):
    p, q = _distribution(first), _distribution(second)

    assert kl_divergence(p, q) >= 0
    assert kl_divergence(p, p) == pytest.approx(0, abs=1e-9)


@given(st.lists(counts, min_size=2, max_size=5))
def test_divergence_from_mean_is_bounded(groups):
    dists = [_distribution(c) for c in groups]

    bound = np.log2(len(dists)) + 1e-6
    assert all(0 <= s <= bound for s in group_divergences(dists))
    assert -1e-6 <= dfi(dists, "extreme") <= dfi(dists, "normal") + 1e-9
    assert dfi(dists, "normal") <= 1 + 1e-9


@given(st.lists(counts, min_size=2, max_size=5), st.randoms())
def test_dfi_ignores_group_order(groups, random):
    dists = [_distribution(c) for c in groups]
    shuffled = list(dists)
    random.shuffle(shuffled)

    assert dfi(shuffled) == pytest.approx(dfi(dists), abs=1e-12)


@given(counts, st.integers(min_value=2, max_value=6))
def test_identical_groups_are_fair(bin_counts, k):
    dists = [_distribution(bin_counts)] * k

    assert mean_distribution(dists).mass == pytest.approx(dists[0].mass)
    assert dfi(dists, "normal") == pytest.approx(1, abs=1e-9)
    assert dfi(dists, "extreme") == pytest.approx(1, abs=1e-9)


@given(counts, st.floats(min_value=0, max_value=1), st.sampled_from(["low", "high"]))
def test_split_recombines(bin_counts, threshold, error_side):
    d = _distribution(bin_counts)
    try:
        pieces = split(d, threshold, error_side)
    except DegenerateSplitError:
        assume(False)

    assert pieces.tail_mass + pieces.center_mass == pytest.approx(1, abs=1e-9)
    np.testing.assert_allclose(pieces.recombine().mass, d.mass, atol=1e-9)


@given(
    counts,
    st.floats(min_value=1, max_value=99),
    st.floats(min_value=1, max_value=99),
)
@settings(max_examples=50)
def test_thresholds_are_ordered(bin_counts, first, second):
    d = _distribution(bin_counts)
    lower, upper = sorted((first, second))

    assert percentile_threshold(d, lower, "high") <= percentile_threshold(
        d, upper, "high"
    )
    assert percentile_threshold(d, lower, "low") >= percentile_threshold(
        d, upper, "low"
    )
    assert GRID.lo <= percentile_threshold(d, lower, "high") <= GRID.hi


@given(st.lists(rates, min_size=2, max_size=6))
def test_rate_metrics_are_bounded(values):
    group_rates = _group_rates(values)
    geometric = inequity(group_rates, "fmr")

    assert geometric >= 1 - 1e-9
    assert inequity(group_rates, "fmr", "minimum") >= geometric - 1e-9
    assert 0 <= garbe(group_rates, "fnmr") <= 1 - 1 / len(values) + 1e-9


@given(rates, st.integers(min_value=2, max_value=6))
def test_equal_rates_are_fair(value, k):
    group_rates = _group_rates([value] * k)

    assert inequity(group_rates, "fmr") == 1
    assert garbe(group_rates, "fmr") == pytest.approx(0, abs=1e-12)


@given(st.lists(rates, min_size=2, max_size=6), st.randoms())
def test_rate_metrics_ignore_group_order(values, random):
    group_rates = _group_rates(values)
    shuffled = list(group_rates)
    random.shuffle(shuffled)

    for which in ("fmr", "fnmr"):
        assert inequity(shuffled, which) == pytest.approx(
            inequity(group_rates, which), rel=1e-12
        )
        assert garbe(shuffled, which) == pytest.approx(
            garbe(group_rates, which), abs=1e-12
        )


@given(
    st.lists(rates, min_size=2, max_size=6),
    st.floats(min_value=1e-2, max_value=1.0),
)
def test_rate_metrics_ignore_scale(values, factor):
    group_rates = _group_rates(values)
    scaled = _group_rates([v * factor for v in values])

    assert inequity(scaled, "fmr") == pytest.approx(
        inequity(group_rates, "fmr"), rel=1e-9
    )
    assert inequity(scaled, "fmr", "minimum") == pytest.approx(
        inequity(group_rates, "fmr", "minimum"), rel=1e-9
    )
    assert garbe(scaled, "fnmr") == pytest.approx(
        garbe(group_rates, "fnmr"), abs=1e-9
    )


@given(
    st.lists(counts, min_size=2, max_size=4),
    st.sampled_from(["genuine", "impostor"]),
    st.randoms(),
)
def test_cei_ignores_group_order(groups, kind, random):
    group_scores = {str(i): np.repeat(CENTRES, c) for i, c in enumerate(groups)}
    items = list(group_scores.items())
    random.shuffle(items)
    cfg = CeiConfig(90, 0.8, 0.2, kind)
    try:
        expected = cei(group_scores, GRID, cfg, "similarity")
    except DegenerateSplitError:
        assume(False)

    assert cei(dict(items), GRID, cfg, "similarity") == pytest.approx(
        expected, abs=1e-9
    )


@pytest.fixture(scope="module")
def unequal_set():
    rng = np.random.default_rng(3)
    laws = {
        "A": ((0.70, 0.08), (0.20, 0.08)),
        "B": ((0.65, 0.10), (0.25, 0.08)),
        "C": ((0.72, 0.06), (0.20, 0.10)),
    }
    frames = [
        pd.DataFrame(
            {
                "score": rng.normal(*law, 600).clip(0, 1),
                "kind": kind,
                "group": group,
            }
        )
        for group, by_kind in laws.items()
        for kind, law in zip(("genuine", "impostor"), by_kind)
    ]
    return ScoreSet(pd.concat(frames, ignore_index=True), "similarity")


@given(st.permutations(["A", "B", "C"]), st.integers(min_value=0, max_value=2 ** 16))
@settings(max_examples=10, deadline=None)
def test_metrics_ignore_group_labels(unequal_set, names, seed):
    config = EvalConfig(target_fmr=0.05, percentiles=[90], weight_sets=[(0.8, 0.2)])
    relabelled = unequal_set.relabel(dict(zip(["A", "B", "C"], names)))
    reordered = ScoreSet(
        relabelled.to_frame().sample(frac=1, random_state=seed), relabelled.polarity
    )

    expected = evaluate_all(unequal_set, config)
    report = evaluate_all(reordered, config)

    assert report.ok
    assert report.metrics == pytest.approx(expected.metrics, rel=1e-9)
    for variant in ("normal", "extreme"):
        for kind in ("genuine", "impostor"):
            assert report.cei[0].value(variant, kind) == pytest.approx(
                expected.cei[0].value(variant, kind), abs=1e-9
            )
