import itertools
import math

import numpy as np
import pytest
from scipy.optimize import linprog

from doral_sim.bandits.allocation import (
    LpInput,
    adaptive_ratio,
    best_delayed_arm,
    solve_lp,
)
from doral_sim.bandits.errors import ConfigurationError


def vertex_oracle(pi, eta, rho):
    """Best value over every vertex of the LP's feasible polytope."""
    J = len(pi)
    masks = np.array(list(itertools.product([0.0, 1.0], repeat=J)))
    best = 0.0
    for fractional in [None] + list(range(J)):
        p = masks.copy()
        if fractional is not None:
            p = p[p[:, fractional] == 0]
            mass = p @ pi
            p[:, fractional] = np.clip((rho - mass) / pi[fractional], 0.0, 1.0)
        feasible = p @ pi <= rho + 1e-12
        if feasible.any():
            best = max(best, float((p[feasible] * pi * eta).sum(axis=1).max()))
    return best


def random_instance(rng, max_contexts):
    J = int(rng.integers(1, max_contexts + 1))
    pi = rng.dirichlet(np.ones(J))
    eta = rng.uniform(0, 1, size=J)
    rho = float(rng.uniform(0, 1.1))
    return pi, eta, rho


# ---------------------------------------------------------------------------
# solve_lp
# ---------------------------------------------------------------------------
class TestSolveLp:
    def test_matches_vertex_enumeration(self):
        rng = np.random.default_rng(11)
        for _ in range(500):
            pi, eta, rho = random_instance(rng, 8)
            solution = solve_lp(LpInput(pi=pi, eta=eta, rho=rho))
            assert solution.value == pytest.approx(vertex_oracle(pi, eta, rho), abs=1e-9)
            assert np.all(solution.p >= 0) and np.all(solution.p <= 1)
            assert float(solution.p @ pi) <= rho + 1e-9

    def test_matches_linprog(self):
        rng = np.random.default_rng(12)
        for _ in range(200):
            pi, eta, rho = random_instance(rng, 10)
            solution = solve_lp(LpInput(pi=pi, eta=eta, rho=rho))
            oracle = linprog(
                c=-(pi * eta),
                A_ub=pi[None, :],
                b_ub=[rho],
                bounds=[(0, 1)] * len(pi),
                method="highs",
            )
            assert oracle.status == 0
            assert solution.value == pytest.approx(-oracle.fun, abs=1e-7)

    def test_threshold_structure(self):
        pi = np.array([0.2, 0.3, 0.5])
        eta = np.array([0.9, 0.1, 0.5])
        solution = solve_lp(LpInput(pi=pi, eta=eta, rho=0.45))
        assert list(solution.order) == [0, 2, 1]
        assert solution.threshold == 1
        np.testing.assert_allclose(solution.p, [1.0, 0.0, 0.5])
        assert solution.value == pytest.approx(0.2 * 0.9 + 0.25 * 0.5)

    def test_ties_rank_lowest_index_first(self):
        pi = np.array([0.5, 0.5])
        solution = solve_lp(LpInput(pi=pi, eta=np.array([0.3, 0.3]), rho=0.5))
        np.testing.assert_allclose(solution.p, [1.0, 0.0])

    def test_full_ratio_serves_everything(self):
        pi = np.array([0.1, 0.6, 0.3])
        solution = solve_lp(LpInput(pi=pi, eta=np.array([0.2, 0.4, 0.1]), rho=1.0))
        np.testing.assert_allclose(solution.p, np.ones(3))
        assert solution.threshold == 3

    def test_zero_ratio_serves_nothing(self):
        pi = np.array([0.1, 0.6, 0.3])
        solution = solve_lp(LpInput(pi=pi, eta=np.array([0.2, 0.4, 0.1]), rho=0.0))
        np.testing.assert_array_equal(solution.p, np.zeros(3))
        assert solution.value == 0.0

    def test_value_is_non_decreasing_and_concave_in_ratio(self):
        rng = np.random.default_rng(13)
        grid = np.linspace(0.0, 1.0, 101)
        for _ in range(50):
            pi, eta, _ = random_instance(rng, 8)
            values = np.array([solve_lp(LpInput(pi=pi, eta=eta, rho=rho)).value for rho in grid])
            assert np.all(np.diff(values) >= -1e-12)
            assert np.all(np.diff(values, n=2) <= 1e-9)

    def test_context_relabelling_moves_probabilities_with_contexts(self):
        rng = np.random.default_rng(14)
        for _ in range(100):
            pi, eta, rho = random_instance(rng, 8)
            # distinct etas keep the ranking free of ties
            eta = eta + np.arange(len(eta)) * 1e-6
            perm = rng.permutation(len(pi))
            solution = solve_lp(LpInput(pi=pi, eta=eta, rho=rho))
            shuffled = solve_lp(LpInput(pi=pi[perm], eta=eta[perm], rho=rho))
            np.testing.assert_allclose(shuffled.p, solution.p[perm], atol=1e-12)
            assert shuffled.value == pytest.approx(solution.value, abs=1e-12)

    def test_threshold_is_non_decreasing_in_ratio(self):
        rng = np.random.default_rng(15)
        grid = np.linspace(0.0, 1.2, 121)
        for _ in range(50):
            pi, eta, _ = random_instance(rng, 10)
            thresholds = [solve_lp(LpInput(pi=pi, eta=eta, rho=rho)).threshold for rho in grid]
            assert np.all(np.diff(thresholds) >= 0)

    def test_negative_eta_is_rejected(self):
        pi = np.array([0.5, 0.5])
        with pytest.raises(ConfigurationError, match="eta"):
            solve_lp(LpInput(pi=pi, eta=np.array([0.4, -0.1]), rho=0.5))

    def test_unnormalised_pi_is_rejected(self):
        with pytest.raises(ConfigurationError, match="pi"):
            solve_lp(LpInput(pi=np.array([0.5, 0.6]), eta=np.ones(2), rho=0.5))

    def test_input_validation(self):
        with pytest.raises(ConfigurationError, match="pi"):
            LpInput(pi=np.array([0.5, 0.4]), eta=np.ones(2), rho=0.5).validate()
        with pytest.raises(ConfigurationError, match="rho"):
            LpInput(pi=np.array([0.5, 0.5]), eta=np.ones(2), rho=-0.1).validate()
        with pytest.raises(ConfigurationError, match="eta"):
            LpInput(pi=np.array([0.5, 0.5]), eta=np.ones(3), rho=0.1).validate()


# ---------------------------------------------------------------------------
# best_delayed_arm
# ---------------------------------------------------------------------------
class TestBestDelayedArm:
    def test_weights_scores_by_tau(self):
        arm, eta = best_delayed_arm(0, scores=[0.9, 0.6], taus=[0.3, 0.8])
        assert arm == 1
        assert eta == pytest.approx(0.48)

    def test_ties_go_to_lowest_index(self):
        arm, _ = best_delayed_arm(0, scores=[0.5, 0.5, 0.5], taus=[1, 1, 1])
        assert arm == 0

    def test_candidates_restrict_the_choice(self):
        arm, _ = best_delayed_arm(0, scores=[0.9, 0.1, 0.4], taus=[1, 1, 1], candidates=[2, 1])
        assert arm == 2

    def test_no_candidates(self):
        with pytest.raises(ConfigurationError, match="context 4"):
            best_delayed_arm(4, scores=[0.1], taus=[1.0], candidates=[])


# ---------------------------------------------------------------------------
# adaptive_ratio
# ---------------------------------------------------------------------------
class TestAdaptiveRatio:
    def test_remaining_mode(self):
        assert adaptive_ratio(400, 600, 1_000) == pytest.approx(1.0)
        assert adaptive_ratio(100, 600, 1_000) == pytest.approx(0.25)

    def test_as_printed_mode(self):
        assert adaptive_ratio(300, 600, 1_000, mode="as_printed") == pytest.approx(0.5)
        assert adaptive_ratio(300, 0, 1_000, mode="as_printed") == 1.0

    def test_static_mode(self):
        assert adaptive_ratio(5, 900, 1_000, mode="static", budget=850) == pytest.approx(0.85)
        with pytest.raises(ConfigurationError):
            adaptive_ratio(5, 900, 1_000, mode="static")

    def test_exhausted_budget(self):
        for mode in ("remaining", "as_printed"):
            assert adaptive_ratio(0, 10, 1_000, mode=mode) == 0.0

    def test_clamped_to_unit_interval(self):
        assert adaptive_ratio(5_000, 10, 1_000) == 1.0
        assert adaptive_ratio(10, 1_000, 1_000) == 0.0

    def test_unknown_mode(self):
        with pytest.raises(ConfigurationError):
            adaptive_ratio(1, 1, 10, mode="greedy")

    def test_static_ignores_remaining_until_exhausted(self):
        assert adaptive_ratio(0, 10, 100, mode="static", budget=50) == 0.0
        assert not math.isnan(adaptive_ratio(1, 10, 100, mode="static", budget=50))
