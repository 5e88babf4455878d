"""Finite-horizon total-divergence criteria by exhaustive enumeration.

For a candidate agent ``R`` (any :class:`IOModel`) and a suite with prior
``P(m)``, both criteria sum, over steps ``tau <= horizon`` and histories of
length ``tau - 1``, the prior-weighted KL from each model's conditionals to
the candidate's:

* ``D`` weighs a history by its full likelihood ``P_m(ao_{<tau})`` and the
  observation term additionally by ``P_m(a_tau | ao_{<tau})``.
* ``C`` treats actions as set from outside: a history is weighted by its
  observation factors only, and every action sequence is enumerated.

The naive Bayesian mixture minimises ``D``; the Bayesian-control-rule
agent minimises ``C``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Dict, Optional, Sequence, Tuple

import numpy as np

from ..agents import MixturePolicy, UpdateMode
from ..core import History, as_distribution, kl_bits
from ..models import IOModel, all_histories, check_suite, seq_loglik_full, seq_loglik_intervened

MAX_ENUMERATION = 256


class EnumerationTooLarge(ValueError):
    pass


def _criterion(name) -> str:
    c = str(name).upper()
    if c not in ("D", "C"):
        raise ValueError(f"unknown criterion {name!r}; expected 'D' or 'C'")
    return c


def check_enumeration_size(suite: Sequence[IOModel], horizon: int) -> None:
    na = suite[0].action_alphabet.size
    no = suite[0].obs_alphabet.size
    if int(horizon) < 1:
        raise ValueError("horizon must be ≥ 1")
    if (na * no) ** int(horizon) > MAX_ENUMERATION:
        raise EnumerationTooLarge(
            f"horizon {horizon} needs {(na * no) ** int(horizon)} histories per step; "
            f"enumeration is limited to {MAX_ENUMERATION} (horizon ≤ 4 for binary suites)")


def _weighted_kl(weight: float, p, q) -> float:
    # a history the model cannot produce contributes nothing, even if q is 0
    return 0.0 if weight == 0 else weight * kl_bits(p, q)


def step_terms(criterion: str, candidate: IOModel, suite: Sequence[IOModel], prior,
               tau: int) -> Tuple[float, float]:
    """``(sum_m P(m) X_m^{a_tau}, sum_m P(m) X_m^{o_tau})`` for one step."""
    crit = _criterion(criterion)
    loglik = seq_loglik_full if crit == "D" else seq_loglik_intervened
    na = suite[0].action_alphabet.size
    no = suite[0].obs_alphabet.size
    act_term = obs_term = 0.0
    for h in all_histories(na, no, tau - 1):
        q_act = candidate.action_dist(h)
        q_obs = [candidate.obs_dist(h, a) for a in range(na)]
        for pm, m in zip(prior, suite):
            if pm == 0:
                continue
            w = math.exp(loglik(m, h))
            p_act = m.action_dist(h)
            act_term += pm * _weighted_kl(w, p_act, q_act)
            for a in range(na):
                w_a = w * p_act[a] if crit == "D" else w
                obs_term += pm * _weighted_kl(w_a, m.obs_dist(h, a), q_obs[a])
    return act_term, obs_term


def divergence_terms(criterion: str, candidate: IOModel, suite: Sequence[IOModel], prior=None,
                     horizon: int = 3) -> np.ndarray:
    """Per-step terms, shape (horizon, 2): columns are action and
    observation parts."""
    check_suite(suite)
    check_enumeration_size(suite, horizon)
    prior = _prior(suite, prior)
    return np.array([step_terms(criterion, candidate, suite, prior, tau)
                     for tau in range(1, int(horizon) + 1)])


def _prior(suite, prior) -> np.ndarray:
    if prior is None:
        return np.full(len(suite), 1.0 / len(suite))
    p = as_distribution(prior)
    if p.size != len(suite):
        raise ValueError(f"prior has {p.size} entries for {len(suite)} models")
    return p


def total_divergence_naive(candidate: IOModel, suite: Sequence[IOModel], prior=None,
                           horizon: int = 3) -> float:
    """Criterion ``D`` in bits, truncated at ``horizon``."""
    return float(divergence_terms("D", candidate, suite, prior, horizon).sum())


def total_divergence_causal(candidate: IOModel, suite: Sequence[IOModel], prior=None,
                            horizon: int = 3) -> float:
    """Criterion ``C`` in bits, truncated at ``horizon``."""
    return float(divergence_terms("C", candidate, suite, prior, horizon).sum())


def total_divergence(criterion: str, candidate, suite, prior=None, horizon: int = 3) -> float:
    return float(divergence_terms(criterion, candidate, suite, prior, horizon).sum())


def optimal_agent(criterion: str, suite: Sequence[IOModel], prior=None) -> MixturePolicy:
    """The mixture that minimises the criterion: naive for ``D``, causal
    for ``C``."""
    mode = UpdateMode.NAIVE if _criterion(criterion) == "D" else UpdateMode.CAUSAL
    return MixturePolicy(suite, prior, mode)


# -- perturbed candidates ------------------------------------------------------

Key = Tuple[History, Optional[int]]


class PerturbedModel(IOModel):
    """``base`` with selected conditionals replaced by
    ``(1 - eps) * base + eps * noise``.

    ``overrides`` maps ``(history, None)`` to an action-law perturbation and
    ``(history, action)`` to an observation-law perturbation, each as
    ``(eps, noise)``.
    """

    def __init__(self, base: IOModel, overrides: Dict[Key, Tuple[float, np.ndarray]],
                 name: str = "perturbed"):
        self.base = base
        self.overrides = dict(overrides)
        self.name = name
        self.action_alphabet = base.action_alphabet
        self.obs_alphabet = base.obs_alphabet

    def _apply(self, key: Key, q: np.ndarray) -> np.ndarray:
        hit = self.overrides.get(key)
        if hit is None:
            return q
        eps, noise = hit
        return (1.0 - eps) * q + eps * noise

    def action_dist(self, history: History) -> np.ndarray:
        h = history.complete()
        return self._apply((h, None), self.base.action_dist(h))

    def obs_dist(self, history: History, action: int) -> np.ndarray:
        h = history.complete()
        return self._apply((h, int(action)), self.base.obs_dist(h, action))


def random_perturbation(base: IOModel, horizon: int, rng: np.random.Generator,
                        eps_range=(0.05, 0.5)) -> PerturbedModel:
    """Mix Dirichlet(1) noise, with a uniform random weight, into every
    conditional the criterion reads up to ``horizon``."""
    na, no = base.action_alphabet.size, base.obs_alphabet.size
    overrides = {}
    for length in range(int(horizon)):
        for h in all_histories(na, no, length):
            overrides[(h, None)] = (rng.uniform(*eps_range), rng.dirichlet(np.ones(na)))
            for a in range(na):
                overrides[(h, a)] = (rng.uniform(*eps_range), rng.dirichlet(np.ones(no)))
    return PerturbedModel(base, overrides, name=f"perturbed-{base.name}")


def single_perturbation(base: IOModel, history: History, action: Optional[int] = None,
                        eps: float = 0.05, noise=None) -> PerturbedModel:
    """Perturb one conditional; ``noise`` defaults to uniform."""
    size = base.action_alphabet.size if action is None else base.obs_alphabet.size
    noise = np.full(size, 1.0 / size) if noise is None else as_distribution(noise)
    return PerturbedModel(base, {(history.complete(), action): (float(eps), noise)})


@dataclass
class MinimizerReport:
    criterion: str
    horizon: int
    optimum: float
    candidates: np.ndarray
    tol: float = 1e-9

    @property
    def margins(self) -> np.ndarray:
        return self.candidates - self.optimum

    @property
    def n_passed(self) -> int:
        """Perturbations that are worse than the optimum by more than tol."""
        return int(np.sum(self.margins > self.tol))

    @property
    def n_beaten(self) -> int:
        """Perturbations that beat the optimum by more than tol."""
        return int(np.sum(self.margins < -self.tol))

    @property
    def passed(self) -> bool:
        return self.n_passed == len(self.candidates)

    @property
    def min_margin(self) -> float:
        return float(self.margins.min()) if len(self.candidates) else math.inf


def minimizer_check(criterion: str, suite: Sequence[IOModel], prior=None, horizon: int = 3,
                    n_perturbations: int = 100, rng: Optional[np.random.Generator] = None,
                    tol: float = 1e-9) -> MinimizerReport:
    """Compare the optimal agent's criterion value with randomly perturbed
    versions of it. Failures are reported, never raised."""
    crit = _criterion(criterion)
    check_enumeration_size(suite, horizon)
    rng = rng if rng is not None else np.random.default_rng(0)
    best = optimal_agent(crit, suite, prior)
    opt = total_divergence(crit, best, suite, prior, horizon)
    values = np.array([
        total_divergence(crit, random_perturbation(best, horizon, rng), suite, prior, horizon)
        for _ in range(int(n_perturbations))
    ])
    return MinimizerReport(crit, int(horizon), opt, values, tol)
