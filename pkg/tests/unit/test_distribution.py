import re

import numpy as np
import pytest

from equityindex.core.distribution import (
    BinGrid,
    Distribution,
    ErrorSide,
    build_distribution,
    kl_divergence,
    mean_distribution,
    percentile_threshold,
    split,
)
from equityindex.errors import (
    DegenerateSplitError,
    DegenerateTailError,
    EmptyInputError,
    GridMismatchError,
    OutOfRangeError,
)


@pytest.fixture
def two_bins():
    grid = BinGrid(0.0, 1.0, 2)
    return Distribution(grid, [0.5, 0.5]), Distribution(grid, [0.25, 0.75])


def test_grid_edges():
    grid = BinGrid(0.0, 1.0, 4)

    np.testing.assert_allclose(grid.edges, [0, 0.25, 0.5, 0.75, 1])
    assert grid.width == 0.25
    assert BinGrid.from_dict(grid.to_dict()) == grid


@pytest.mark.parametrize(
    "lo,hi,n_bins,message",
    [
        (1.0, 1.0, 10, "grid requires lo < hi, got [1.0, 1.0]"),
        (0.0, np.inf, 10, "grid bounds must be finite"),
        (0.0, 1.0, 0, "n_bins must be a positive integer, got 0"),
    ],
)
def test_grid_invalid(lo, hi, n_bins, message):
    with pytest.raises(ValueError, match=re.escape(message)):
        BinGrid(lo, hi, n_bins)


def test_grid_spanning():
    grid = BinGrid.spanning([0.2, 0.5], [0.1], np.array([]), n_bins=3)
    assert grid == BinGrid(0.1, 0.5, 3)


def test_grid_spanning_degenerate():
    assert BinGrid.spanning([0.25, 0.25]) == BinGrid(-0.25, 0.75)


def test_grid_spanning_empty():
    with pytest.raises(EmptyInputError):
        BinGrid.spanning([], [])


def test_build_distribution(binned_scores):
    dist = build_distribution(binned_scores([1, 2, 0, 1]), BinGrid(0, 1, 4))

    np.testing.assert_allclose(dist.mass, [0.25, 0.5, 0, 0.25])
    assert dist.count == 4


def test_build_distribution_includes_upper_edge():
    dist = build_distribution([0.0, 1.0], BinGrid(0, 1, 2))
    np.testing.assert_allclose(dist.mass, [0.5, 0.5])


def test_build_distribution_clips():
    grid = BinGrid(0, 1, 2)

    clipped = build_distribution([-1, 2, 2], grid)
    np.testing.assert_allclose(clipped.mass, [1 / 3, 2 / 3])
    with pytest.raises(OutOfRangeError, match=re.escape("2 score(s) outside of grid")):
        build_distribution([-1, 0.5, 2], grid, clip=False)


def test_build_distribution_empty():
    with pytest.raises(EmptyInputError):
        build_distribution([], BinGrid(0, 1))


def test_distribution_validates_mass():
    grid = BinGrid(0, 1, 2)
    with pytest.raises(ValueError, match="mass must sum to 1"):
        Distribution(grid, [0.5, 0.6])
    with pytest.raises(ValueError, match="non-negative"):
        Distribution(grid, [1.5, -0.5])
    with pytest.raises(ValueError, match=re.escape("expected 2 mass values")):
        Distribution(grid, [1.0])


def test_distribution_mass_is_a_copy(two_bins):
    dist, _ = two_bins
    mass = dist.mass
    mass[0] = 1

    assert dist.mass[0] == 0.5


def test_distribution_dict(two_bins):
    dist, _ = two_bins
    data = dist.to_dict()

    assert data == {"edges": [0.0, 0.5, 1.0], "mass": [0.5, 0.5], "count": 0}
    assert Distribution.from_dict(data) == dist


def test_mean_distribution(two_bins):
    mean = mean_distribution(list(two_bins))
    np.testing.assert_allclose(mean.mass, [0.375, 0.625])


def test_mean_distribution_grid_mismatch(two_bins):
    other = Distribution(BinGrid(0, 2, 2), [0.5, 0.5])
    with pytest.raises(GridMismatchError):
        mean_distribution([two_bins[0], other])


def test_kl_divergence_oracle(two_bins):
    a, b = two_bins
    mean = mean_distribution([a, b])

    assert kl_divergence(a, mean) == pytest.approx(0.04656, abs=1e-5)
    assert kl_divergence(b, mean) == pytest.approx(0.05103, abs=1e-5)


def test_kl_divergence_identical(two_bins):
    a, _ = two_bins
    assert kl_divergence(a, a) == 0


def test_kl_divergence_empty_bins_are_finite():
    grid = BinGrid(0, 1, 2)
    value = kl_divergence(Distribution(grid, [1, 0]), Distribution(grid, [0, 1]))

    assert np.isfinite(value)
    assert value > 1


def test_kl_divergence_invalid_smoothing(two_bins):
    with pytest.raises(ValueError, match="smoothing must be positive"):
        kl_divergence(*two_bins, smoothing=0)


@pytest.mark.parametrize(
    "percentile,side,expected",
    [(80, ErrorSide.HIGH, 0.5), (80, "low", 0.25), (90, ErrorSide.HIGH, 0.75)],
)
def test_percentile_threshold(percentile, side, expected):
    dist = Distribution(BinGrid(0, 1, 4), [0.2, 0.6, 0.1, 0.1])
    assert percentile_threshold(dist, percentile, side) == pytest.approx(expected)


def test_percentile_threshold_interpolates():
    dist = Distribution(BinGrid(0, 1, 2), [0.5, 0.5])
    assert percentile_threshold(dist, 75, ErrorSide.HIGH) == pytest.approx(0.75)


@pytest.mark.parametrize("percentile", [0, 100, -5, 120])
def test_percentile_threshold_invalid(percentile, two_bins):
    with pytest.raises(ValueError, match=re.escape("percentile must be in (0, 100)")):
        percentile_threshold(two_bins[0], percentile, ErrorSide.HIGH)


def test_split_renormalizes():
    dist = Distribution(BinGrid(0, 1, 4), [0.4, 0.4, 0.1, 0.1])

    pieces = split(dist, 0.5, ErrorSide.HIGH)

    np.testing.assert_allclose(pieces.tail.mass, [0, 0, 0.5, 0.5])
    np.testing.assert_allclose(pieces.center.mass, [0.5, 0.5, 0, 0])
    assert pieces.tail_mass == pytest.approx(0.2)
    assert pieces.center_mass == pytest.approx(0.8)
    assert pieces.error_side == ErrorSide.HIGH


def test_split_low_side():
    dist = Distribution(BinGrid(0, 1, 4), [0.1, 0.1, 0.4, 0.4])

    pieces = split(dist, 0.5, "low")

    np.testing.assert_allclose(pieces.tail.mass, [0.5, 0.5, 0, 0])


def test_split_inside_bin_is_fractional():
    dist = Distribution(BinGrid(0, 1, 2), [0.5, 0.5])

    pieces = split(dist, 0.75, ErrorSide.HIGH)

    assert pieces.tail_mass == pytest.approx(0.25)
    np.testing.assert_allclose(pieces.tail.mass, [0, 1])
    np.testing.assert_allclose(pieces.center.mass, [2 / 3, 1 / 3])


def test_split_recombine():
    dist = Distribution(BinGrid(0, 1, 5), [0.1, 0.3, 0.2, 0.25, 0.15])

    pieces = split(dist, 0.63, ErrorSide.HIGH)

    np.testing.assert_allclose(pieces.recombine().mass, dist.mass, atol=1e-12)


def test_split_degenerate_tail():
    dist = Distribution(BinGrid(0, 1, 4), [0.5, 0.5, 0, 0])

    with pytest.raises(DegenerateTailError, match="no mass on the high side"):
        split(dist, 0.5, ErrorSide.HIGH)


def test_split_degenerate_center():
    dist = Distribution(BinGrid(0, 1, 4), [0, 0, 0.5, 0.5])

    with pytest.raises(DegenerateSplitError, match="no mass left in the center"):
        split(dist, 0.5, ErrorSide.HIGH)


def test_split_outside_grid(two_bins):
    with pytest.raises(OutOfRangeError):
        split(two_bins[0], 1.5, ErrorSide.HIGH)
