import numpy as np
import pytest

from bcr.agents import MixturePolicy, UpdateMode
from bcr.core import History
from bcr.evaluation import (
    EnumerationTooLarge,
    MinimizerReport,
    divergence_terms,
    minimizer_check,
    optimal_agent,
    single_perturbation,
    total_divergence,
    total_divergence_causal,
    total_divergence_naive,
)
from bcr.models import make_memoryless, default_suite

from oracles import criterion_d_chain_rule, criterion_tree

# hand computed at horizon 1 (naive predictions (0.58,0.42) | (0.42,0.58))
D_H1 = 0.5415077069897036
C_H1 = 0.5891032175013816

NAIVE_POLICY = MixturePolicy(default_suite(), mode=UpdateMode.NAIVE)
CAUSAL_POLICY = MixturePolicy(default_suite(), mode=UpdateMode.CAUSAL)


class TestHandValues:
    def test_d_horizon_one(self, suite):
        assert total_divergence_naive(NAIVE_POLICY, suite, horizon=1) == pytest.approx(D_H1, abs=1e-12)

    def test_c_horizon_one(self, suite):
        assert total_divergence_causal(CAUSAL_POLICY, suite, horizon=1) == pytest.approx(C_H1, abs=1e-12)

    def test_single_model_suite_is_zero(self, suite):
        for crit, mode in (("D", UpdateMode.NAIVE), ("C", UpdateMode.CAUSAL)):
            pol = MixturePolicy([suite[0]], mode=mode)
            assert total_divergence(crit, pol, [suite[0]], horizon=3) == 0.0

    def test_identical_observation_laws(self):
        suite = [make_memoryless([0.9, 0.1], [0.3, 0.7]), make_memoryless([0.2, 0.8], [0.3, 0.7])]
        terms = divergence_terms("C", MixturePolicy(suite, mode=UpdateMode.CAUSAL), suite, horizon=3)
        np.testing.assert_allclose(terms[:, 1], 0.0, atol=1e-14)
        # weights never move; each step sums over 2**t unweighted action branches
        np.testing.assert_allclose(terms[:, 0], terms[0, 0] * 2.0 ** np.arange(3), atol=1e-12)


class TestOracles:
    @pytest.mark.parametrize("horizon", [1, 2, 3])
    @pytest.mark.parametrize("crit", ["D", "C"])
    @pytest.mark.parametrize("prior", [(0.5, 0.5), (0.3, 0.7)])
    def test_matches_tree_walk(self, suite, crit, horizon, prior):
        for cand in (NAIVE_POLICY, CAUSAL_POLICY, suite[1]):
            got = total_divergence(crit, cand, suite, prior, horizon)
            assert got == pytest.approx(criterion_tree(crit, cand, suite, prior, horizon), abs=1e-12)

    @pytest.mark.parametrize("horizon", [1, 2, 3])
    def test_d_chain_rule(self, suite, horizon, rng):
        from bcr.evaluation import random_perturbation
        for cand in (NAIVE_POLICY, random_perturbation(NAIVE_POLICY, horizon, rng)):
            got = total_divergence_naive(cand, suite, horizon=horizon)
            assert got == pytest.approx(criterion_d_chain_rule(cand, suite, (0.5, 0.5), horizon),
                                        abs=1e-12)

    def test_terms_decompose(self, suite):
        for crit in ("D", "C"):
            pol = optimal_agent(crit, suite)
            terms = divergence_terms(crit, pol, suite, horizon=3)
            for T in (2, 3):
                diff = (total_divergence(crit, pol, suite, horizon=T)
                        - total_divergence(crit, pol, suite, horizon=T - 1))
                assert diff == pytest.approx(terms[T - 1].sum(), abs=1e-12)


class TestMinimizers:
    def test_optimal_agent_modes(self, suite):
        assert optimal_agent("D", suite).mode is UpdateMode.NAIVE
        assert optimal_agent("c", suite).mode is UpdateMode.CAUSAL
        with pytest.raises(ValueError):
            optimal_agent("X", suite)

    def test_single_perturbation_increases_d(self, suite):
        root = History()
        cand = single_perturbation(NAIVE_POLICY, root, action=1, eps=0.05)
        base = total_divergence_naive(NAIVE_POLICY, suite, horizon=2)
        assert total_divergence_naive(cand, suite, horizon=2) > base + 1e-9

    def test_single_perturbation_of_action_increases_c(self, suite):
        cand = single_perturbation(CAUSAL_POLICY, History.from_pairs([(0, 1)]), eps=0.2,
                                   noise=[0.0, 1.0])
        base = total_divergence_causal(CAUSAL_POLICY, suite, horizon=2)
        assert total_divergence_causal(cand, suite, horizon=2) > base + 1e-9

    def test_naive_is_worse_under_c(self, suite):
        assert (total_divergence_causal(NAIVE_POLICY, suite, horizon=3)
                > total_divergence_causal(CAUSAL_POLICY, suite, horizon=3))

    def test_causal_is_worse_under_d(self, suite):
        assert (total_divergence_naive(CAUSAL_POLICY, suite, horizon=3)
                > total_divergence_naive(NAIVE_POLICY, suite, horizon=3))

    @pytest.mark.parametrize("crit", ["D", "C"])
    def test_random_perturbations_lose(self, suite, crit):
        rep = minimizer_check(crit, suite, horizon=2, n_perturbations=20,
                              rng=np.random.default_rng(3))
        assert rep.passed and rep.n_beaten == 0 and rep.min_margin > 1e-9

    def test_skewed_prior(self, suite):
        rep = minimizer_check("C", suite, prior=(0.15, 0.85), horizon=2, n_perturbations=10,
                              rng=np.random.default_rng(4))
        assert rep.passed

    def test_no_perturbations_is_vacuous(self, suite):
        rep = minimizer_check("D", suite, horizon=1, n_perturbations=0)
        assert rep.passed and rep.min_margin == float("inf")

    def test_report_counts(self):
        rep = MinimizerReport("D", 1, 1.0, np.array([2.0, 1.0, 0.5]))
        assert (rep.n_passed, rep.n_beaten, rep.passed) == (1, 1, False)


class TestEnumerationGuard:
    def test_horizon_four_allowed(self, suite):
        assert divergence_terms("C", CAUSAL_POLICY, suite, horizon=4).shape == (4, 2)

    @pytest.mark.parametrize("horizon", [5, 20])
    def test_too_large(self, suite, horizon):
        with pytest.raises(EnumerationTooLarge):
            total_divergence("D", NAIVE_POLICY, suite, horizon=horizon)

    def test_horizon_zero(self, suite):
        with pytest.raises(ValueError):
            total_divergence("D", NAIVE_POLICY, suite, horizon=0)
