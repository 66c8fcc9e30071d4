import math

import numpy as np
import pytest

from doral_sim.bandits.errors import (
    InsufficientSamplesError,
    InvalidParameterError,
    NotResolvedError,
)
from doral_sim.bandits.estimators import (
    DelayStats,
    basket_count,
    confidence_radius,
    delayed_empirical_mean,
    empirical_mean_upper_bound,
    estimate_tau,
    median_of_means,
    robust_bounds,
)


# ---------------------------------------------------------------------------
# DelayStats bookkeeping
# ---------------------------------------------------------------------------
class TestDelayStats:
    def test_out_of_order_returns_are_listed_in_pull_order(self):
        stats = DelayStats(arm=0)
        stats.record_pull(0, key="first")
        stats.record_pull(1, key="second")
        stats.record_return("second", 5)
        stats.record_return("first", 3)
        assert stats.observed == [3, 5]
        assert stats.pulls == 2
        assert stats.returned == 2

    def test_pending_pulls_count_towards_pulls(self):
        stats = DelayStats.from_observations(1, [4, 2], pulls=5)
        assert stats.pulls == 5
        assert stats.returned == 2

    def test_delay_must_be_positive(self):
        stats = DelayStats(arm=0)
        stats.record_pull(0)
        with pytest.raises(InvalidParameterError):
            stats.record_return(0, 0)

    def test_settled_prefix_stops_at_first_pending_pull(self):
        stats = DelayStats(arm=0)
        for index in range(4):
            stats.record_pull(index)
        stats.record_return(0, 7)
        stats.record_return(2, 1)
        stats.record_return(3, 1)
        assert stats.settled == [7]
        stats.record_return(1, 9)
        assert stats.settled == [7, 9, 1, 1]
        assert stats.settled_count == 4

    def test_fewer_pulls_than_observations(self):
        with pytest.raises(InvalidParameterError):
            DelayStats.from_observations(0, [1, 2, 3], pulls=2)


# ---------------------------------------------------------------------------
# Baskets and median-of-means
# ---------------------------------------------------------------------------
class TestMedianOfMeans:
    def test_basket_count_confidence_limited(self):
        assert basket_count(400, 0.05) == (24, 16)

    def test_basket_count_sample_limited(self):
        assert basket_count(10, 0.05) == (5, 2)

    def test_basket_count_needs_two_pulls(self):
        with pytest.raises(InsufficientSamplesError):
            basket_count(1, 0.05)

    def test_basket_count_rejects_bad_delta(self):
        with pytest.raises(InvalidParameterError):
            basket_count(10, 0.0)

    def test_even_basket_count_averages_middle_means(self):
        stats = DelayStats.from_observations(0, [1, 2, 3, 4, 5, 6, 100, 100])
        assert median_of_means(stats, h=4) == pytest.approx(4.5)

    def test_surplus_observations_are_ignored(self):
        stats = DelayStats.from_observations(0, [2, 4, 6, 1000])
        assert median_of_means(stats, h=3) == pytest.approx(4.0)

    def test_robust_to_a_single_outlier(self):
        observed = [10] * 30 + [100_000]
        stats = DelayStats.from_observations(0, observed)
        assert median_of_means(stats, h=5) == pytest.approx(10.0)
        assert delayed_empirical_mean(stats) > 1_000

    def test_settled_baskets_ignore_returns_behind_a_pending_pull(self):
        stats = DelayStats.from_observations(0, [4, 6, 8], pulls=5)
        stats.record_return(4, 1)
        # every return: baskets [4, 6] and [8, 1]; settled prefix: [4] and [6]
        assert median_of_means(stats, h=2) == pytest.approx(4.75)
        assert median_of_means(stats, h=2, settled=True) == pytest.approx(5.0)

    def test_too_few_returns(self):
        stats = DelayStats.from_observations(0, [3], pulls=10)
        with pytest.raises(InsufficientSamplesError):
            median_of_means(stats, h=2)


# ---------------------------------------------------------------------------
# Robust confidence bounds
# ---------------------------------------------------------------------------
class TestRobustBounds:
    def test_bounds_bracket_the_estimate(self):
        stats = DelayStats.from_observations(0, [100] * 400, budget=85_000)
        bounds = robust_bounds(stats, 100.0)
        assert bounds.lcb < 100.0 < bounds.ucb
        assert bounds.ucb - 100.0 == pytest.approx(100.0 - bounds.lcb)

    def test_lcb_is_clamped_at_zero(self):
        stats = DelayStats.from_observations(0, [1, 1, 1, 1], budget=85_000)
        assert robust_bounds(stats, 1.0).lcb == 0.0

    def test_radius_shrinks_with_pulls(self):
        small = confidence_radius(100, 50.0, 1.0, 85_000)
        large = confidence_radius(1_600, 50.0, 1.0, 85_000)
        assert large < small

    def test_worst_case_radius_is_wider(self):
        plugin = confidence_radius(400, 100.0, 1.0, 85_000, "plugin")
        worst = confidence_radius(400, 100.0, 1.0, 85_000, "worst_case")
        assert worst > plugin

    def test_heavier_tail_widens_radius(self):
        light = confidence_radius(400, 100.0, 1.0, 85_000)
        heavy = confidence_radius(400, 100.0, 0.25, 85_000)
        assert heavy > light

    def test_budget_must_exceed_one(self):
        with pytest.raises(InvalidParameterError):
            confidence_radius(10, 1.0, 1.0, 1.0)

    def test_unknown_radius_mode(self):
        with pytest.raises(InvalidParameterError):
            confidence_radius(10, 1.0, 1.0, 100.0, "exact")

    def test_empirical_mean_bound_coverage_under_censoring(self):
        rng = np.random.default_rng(2024)
        delta, budget, alpha, pulls, mean, window = 0.05, 85_000.0, 1.0, 400, 100.0, 150
        draws = rng.geometric(1.0 / mean, size=(10_000, pulls))
        seen = draws <= window
        means = (draws * seen).sum(axis=1) / seen.sum(axis=1)

        first = DelayStats.from_observations(0, list(draws[0][seen[0]]), pulls=pulls)
        assert delayed_empirical_mean(first) == pytest.approx(means[0])

        ceiling = empirical_mean_upper_bound(mean, pulls, alpha, delta, budget)
        violations = np.mean(means > ceiling)
        assert violations <= delta + budget ** (-alpha)

    def test_worst_case_radius_covers_median_of_means(self):
        rng = np.random.default_rng(2025)
        delta, budget, alpha, pulls, mean = 0.05, 85_000.0, 1.0, 400, 100.0
        h, size = basket_count(pulls, delta)
        draws = rng.geometric(1.0 / mean, size=(10_000, pulls))
        baskets = draws[:, : h * size].reshape(10_000, h, size).mean(axis=2)
        estimates = np.median(baskets, axis=1)

        first = DelayStats.from_observations(0, list(draws[0]), budget=budget)
        assert median_of_means(first) == pytest.approx(estimates[0])

        radii = np.array(
            [confidence_radius(pulls, d_m, alpha, budget, "worst_case") for d_m in estimates]
        )
        violations = np.mean(np.abs(estimates - mean) > radii)
        assert violations <= delta + budget ** (-alpha)


# ---------------------------------------------------------------------------
# estimate_tau
# ---------------------------------------------------------------------------
class TestEstimateTau:
    @pytest.fixture
    def stats(self):
        stats = DelayStats(arm=0)
        for round_ in range(4):
            stats.record_pull(round_)
        stats.record_return(0, 2)
        stats.record_return(1, 8)
        stats.record_return(2, 1)
        return stats

    def test_fraction_returned_within_window(self, stats):
        assert estimate_tau(stats, m=5, now=20) == pytest.approx(0.5)

    def test_strict_raises_on_young_pulls(self, stats):
        with pytest.raises(NotResolvedError):
            estimate_tau(stats, m=5, now=5)

    def test_relaxed_uses_resolved_pulls_only(self, stats):
        assert estimate_tau(stats, m=5, now=5, strict=False) == 1.0

    def test_no_resolved_pull(self, stats):
        with pytest.raises(InsufficientSamplesError):
            estimate_tau(stats, m=50, now=10, strict=False)

    def test_no_pulls(self):
        with pytest.raises(InsufficientSamplesError):
            estimate_tau(DelayStats(arm=3), m=5, now=100)

    def test_infinite_window_counts_every_return(self, stats):
        assert estimate_tau(stats, m=math.inf, now=math.inf) == pytest.approx(0.75)
