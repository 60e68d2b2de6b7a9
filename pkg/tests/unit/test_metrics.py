import re

import numpy as np
import pytest

from equityindex.core.distribution import BinGrid, Distribution
from equityindex.core.metrics import (
    CeiConfig,
    InequityReference,
    ThresholdSource,
    Variant,
    cei,
    cei_breakdown,
    cei_scores,
    check_weights,
    clamp_index,
    combined_distributions,
    dfi,
    divergence_index,
    floored_groups,
    garbe,
    inequity,
)
from equityindex.core.rates import GroupRates, RateKind
from equityindex.errors import (
    InvalidWeightsError,
    KTooSmallError,
    UndefinedRateError,
    ZeroMeanRateError,
)


def _fmr_rates(*values, n_impostor=1000):
    return [
        GroupRates(
            "G{}".format(i), fmr=v, fnmr=0.1, n_impostor=n_impostor, n_genuine=100
        )
        for i, v in enumerate(values)
    ]


@pytest.fixture
def two_dists():
    grid = BinGrid(0.0, 1.0, 2)
    return [Distribution(grid, [0.5, 0.5]), Distribution(grid, [0.25, 0.75])]


@pytest.fixture
def tail_cfg():
    return CeiConfig(80, 0.8, 0.2, "impostor")


def test_variant_from_variant():
    assert Variant.from_variant("extreme") == Variant.EXTREME
    assert Variant.from_variant(Variant.NORMAL) == Variant.NORMAL


def test_divergence_index():
    assert divergence_index([0, 0, 0]) == 1
    assert divergence_index([0.5, 0.5]) == pytest.approx(0.5)
    assert divergence_index([0.1, 0.3], "extreme") == pytest.approx(0.7)


def test_divergence_index_single_group():
    with pytest.raises(KTooSmallError, match="at least 2 groups are required, got 1"):
        divergence_index([0.1])


def test_clamp_index():
    assert clamp_index(0.5) == (0.5, False)
    assert clamp_index(-0.2) == (0.0, True)
    assert clamp_index(1.0) == (1.0, False)


def test_dfi_oracle(two_dists):
    assert dfi(two_dists) == pytest.approx(0.95120, abs=1e-5)
    assert dfi(two_dists, Variant.EXTREME) == pytest.approx(0.94897, abs=1e-5)


def test_dfi_identical(two_dists):
    assert dfi([two_dists[0]] * 3) == 1


def test_dfi_single_group(two_dists):
    with pytest.raises(KTooSmallError):
        dfi(two_dists[:1])


def test_combined_distributions(minimal_set):
    dists = combined_distributions(minimal_set, n_bins=7)

    assert list(dists) == ["A", "B"]
    assert dists["A"].grid == BinGrid(0.2, 0.9, 7)
    assert dists["A"].count == 2


def test_inequity_oracle():
    rates = _fmr_rates(0.001, 0.003)

    assert inequity(rates, "fmr") == pytest.approx(1.7321, abs=1e-4)
    assert inequity(rates, RateKind.FMR, "minimum") == pytest.approx(3)


def test_inequity_equal_rates():
    assert inequity(_fmr_rates(0.01, 0.01, 0.01), "fmr") == 1
    assert inequity(_fmr_rates(0, 0), "fmr") == 1


def test_inequity_floors_zero_rates(caplog):
    rates = _fmr_rates(0, 0.01, n_impostor=100)

    assert floored_groups(rates, "fmr") == ["G0"]
    # the zero rate becomes 1 / 200
    assert inequity(rates, "fmr") == pytest.approx(np.sqrt(2), rel=1e-9)
    assert inequity(rates, "fmr", InequityReference.MINIMUM) == pytest.approx(2)
    assert "flooring zero rate(s)" in caplog.text


def test_floored_groups_equal_rates():
    assert floored_groups(_fmr_rates(0, 0), RateKind.FMR) == []


def test_inequity_undefined_rate():
    rates = _fmr_rates(0.001, 0.003)
    rates[1].fnmr = None

    with pytest.raises(UndefinedRateError, match="FNMR undefined for group `G1`"):
        inequity(rates, "fnmr")


def test_inequity_single_group():
    with pytest.raises(KTooSmallError):
        inequity(_fmr_rates(0.1), "fmr")


def test_garbe_oracle():
    assert garbe(_fmr_rates(0.001, 0.003), "fmr") == pytest.approx(0.25)


def test_garbe_bounds():
    assert garbe(_fmr_rates(0.01, 0.01), "fmr") == 0
    # one group holding all errors reaches 1 - 1/K
    assert garbe(_fmr_rates(0, 0, 0, 0.2), "fmr") == pytest.approx(0.75)


def test_garbe_all_zero():
    with pytest.raises(ZeroMeanRateError, match="all group FMR values are zero"):
        garbe(_fmr_rates(0, 0), "fmr")


def test_check_weights():
    check_weights(0.8, 0.2)
    check_weights(1.0, 1.0, allow_unnormalized=True)


@pytest.mark.parametrize(
    "w_tail,w_center,message",
    [
        (0.5, 0.6, "weights must sum to 1, got (0.5, 0.6)"),
        (-0.1, 1.1, "weights must be non-negative, got (-0.1, 1.1)"),
        (np.nan, 0.5, "weights must be finite"),
    ],
)
def test_check_weights_invalid(w_tail, w_center, message):
    with pytest.raises(InvalidWeightsError, match=re.escape(message)):
        check_weights(w_tail, w_center)


def test_cei_config_invalid_percentile():
    with pytest.raises(ValueError, match=re.escape("percentile must be in (0, 100)")):
        CeiConfig(100, 0.5, 0.5, "genuine")


def test_cei_oracle(tail_skew_scores, quarter_grid, tail_cfg):
    normal = cei(tail_skew_scores, quarter_grid, tail_cfg, "similarity")
    extreme = cei(
        tail_skew_scores, quarter_grid, tail_cfg, "similarity", variant="extreme"
    )

    assert normal == pytest.approx(0.96096, abs=1e-5)
    assert extreme == pytest.approx(0.95918, abs=2e-5)


def test_cei_breakdown(tail_skew_scores, quarter_grid):
    breakdown = cei_breakdown(
        tail_skew_scores, quarter_grid, "impostor", 80, "similarity"
    )

    assert breakdown.thresholds == pytest.approx({"A": 0.5, "B": 0.5})
    assert breakdown.tail_masses == pytest.approx({"A": 0.2, "B": 0.2})
    np.testing.assert_allclose(breakdown.mean_split.tail.mass, [0, 0, 0.375, 0.625])
    # the centers coincide, only the tails differ
    assert breakdown.center_divergences["A"] == pytest.approx(0, abs=1e-9)
    assert breakdown.tail_divergences["A"] == pytest.approx(0.04655, abs=1e-5)
    assert breakdown.tail_divergences["B"] == pytest.approx(0.05103, abs=1e-5)


def test_cei_scores_weigh_pieces(tail_skew_scores, quarter_grid, tail_cfg):
    scores = cei_scores(tail_skew_scores, quarter_grid, tail_cfg, "similarity")
    breakdown = cei_breakdown(
        tail_skew_scores, quarter_grid, "impostor", 80, "similarity"
    )

    assert list(scores) == ["A", "B"]
    assert scores["B"] == pytest.approx(0.8 * breakdown.tail_divergences["B"])


def test_cei_identical_groups(tail_skew_scores, quarter_grid, tail_cfg):
    same = {"A": tail_skew_scores["A"], "B": tail_skew_scores["A"]}

    assert cei(same, quarter_grid, tail_cfg, "similarity") == 1


def test_cei_default_grid(tail_skew_scores, tail_cfg):
    value = cei(tail_skew_scores, None, tail_cfg, "similarity")
    assert 0 < value < 1


def test_cei_clamps(caplog):
    grid = BinGrid(0.0, 1.0, 10)
    group_scores = {
        "A": np.concatenate((np.full(999, 0.05), [0.95])),
        "B": np.concatenate((np.full(500, 0.05), np.full(500, 0.85))),
    }
    cfg = CeiConfig(80, 0.8, 0.2, "impostor")

    assert cei(group_scores, grid, cfg, "similarity") == 0
    assert "CEI clamped" in caplog.text


def test_cei_single_group(tail_skew_scores, quarter_grid, tail_cfg):
    with pytest.raises(KTooSmallError):
        cei({"A": tail_skew_scores["A"]}, quarter_grid, tail_cfg, "similarity")


def test_threshold_sources_agree_on_equal_centers(tail_skew_scores, quarter_grid):
    values = {
        source: cei(
            tail_skew_scores,
            quarter_grid,
            CeiConfig(80, 0.8, 0.2, "impostor"),
            "similarity",
            threshold_source=source,
        )
        for source in ThresholdSource
    }

    assert values[ThresholdSource.POOLED] == pytest.approx(
        values[ThresholdSource.MEAN]
    )
    assert values[ThresholdSource.GROUP] == pytest.approx(
        values[ThresholdSource.MEAN]
    )


def test_threshold_source_group(binned_scores, quarter_grid):
    group_scores = {
        "A": binned_scores([40, 40, 10, 10]),
        "B": binned_scores([20, 40, 20, 20]),
    }

    breakdown = cei_breakdown(
        group_scores,
        quarter_grid,
        "impostor",
        80,
        "similarity",
        threshold_source="group",
    )

    assert breakdown.thresholds == pytest.approx({"A": 0.5, "B": 0.75})
    assert breakdown.tail_masses["B"] == pytest.approx(0.2)


def test_cei_genuine_distance(binned_scores, quarter_grid):
    # genuine distances err on the high side
    group_scores = {
        "A": binned_scores([40, 40, 10, 10]),
        "B": binned_scores([40, 40, 5, 15]),
    }
    cfg = CeiConfig(80, 0.8, 0.2, "genuine")

    assert cei(group_scores, quarter_grid, cfg, "distance") == pytest.approx(
        0.96096, abs=1e-5
    )
