"""Mixture agents over a suite of I/O models.

Both agents keep log-weights over the suite and act by sampling from the
weight-mixed action law. They differ in what moves the weights:

* ``UpdateMode.NAIVE`` treats its own actions as evidence, so weights are
  multiplied by ``P_m(a_t | ao_{<t})`` as soon as an action is issued, and
  by ``P_m(o_t | ao_{<t} a_t)`` when the observation arrives.
* ``UpdateMode.CAUSAL`` (the Bayesian control rule) treats actions as
  interventions. Only observations update the weights.
"""

from __future__ import annotations

import enum
from typing import Optional, Sequence

import numpy as np

from .core import (
    Alphabet,
    History,
    as_distribution,
    mix,
    normalize,
    sample,
)
from .models import IOModel, check_suite


class UpdateMode(enum.Enum):
    NAIVE = "naive"
    CAUSAL = "causal"

    @classmethod
    def parse(cls, value) -> "UpdateMode":
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).lower())
        except ValueError:
            raise ValueError(f"unknown agent mode {value!r}; expected 'naive' or 'causal'") from None


def _log(p) -> np.ndarray:
    with np.errstate(divide="ignore"):
        return np.log(p)


class MixtureAgent:
    """Mutable agent state: suite, prior, current log-weights and history.

    Weights are stored unnormalized; :meth:`posterior` normalizes on read.
    A hypothesis whose weight reaches ``-inf`` never recovers.
    """

    def __init__(self, models: Sequence[IOModel], prior=None, mode=UpdateMode.CAUSAL):
        check_suite(models)
        self.models = tuple(models)
        n = len(self.models)
        if prior is None:
            prior = np.full(n, 1.0 / n)
        self.prior = as_distribution(prior)
        if self.prior.size != n:
            raise ValueError(f"prior has {self.prior.size} entries for {n} models")
        self.mode = UpdateMode.parse(mode)
        self.logw = _log(self.prior)
        self.history = History()
        self.action_alphabet: Alphabet = self.models[0].action_alphabet
        self.obs_alphabet: Alphabet = self.models[0].obs_alphabet

    def copy(self) -> "MixtureAgent":
        other = object.__new__(MixtureAgent)
        other.__dict__.update(self.__dict__)
        other.logw = self.logw.copy()
        return other

    @property
    def n_models(self) -> int:
        return len(self.models)

    def posterior(self) -> np.ndarray:
        return normalize(self.logw)

    def _require_idle(self):
        if self.history.pending_action is not None:
            raise RuntimeError("agent is waiting for an observation")

    def action_distribution(self) -> np.ndarray:
        """``sum_m P_m(a | history) w_m`` for the next action."""
        self._require_idle()
        h = self.history
        return mix(self.posterior(), [m.action_dist(h) for m in self.models])

    def _action_loglik(self, a: int) -> np.ndarray:
        h = self.history
        return _log(np.array([m.action_dist(h)[a] for m in self.models]))

    def record_action(self, a: int) -> None:
        """Register action ``a`` (sampled here or supplied from outside)."""
        self._require_idle()
        a = self.action_alphabet.check(a, "action")
        if self.mode is UpdateMode.NAIVE:
            self.logw = self.logw + self._action_loglik(a)
        self.history = self.history.with_action(a)

    def act(self, rng: np.random.Generator) -> int:
        a = sample(self.action_distribution(), rng)
        self.record_action(a)
        return a

    def record_observation(self, o: int) -> None:
        a = self.history.pending_action
        if a is None:
            raise RuntimeError("observation received without a pending action")
        o = self.obs_alphabet.check(o, "observation")
        h = self.history.complete()
        lik = np.array([m.obs_dist(h, a)[o] for m in self.models])
        self.logw = self.logw + _log(lik)
        self.history = self.history.with_observation(o)

    def predictive_obs(self, a: Optional[int] = None) -> np.ndarray:
        """Mixture prediction of the next observation after action ``a``.

        With an action pending, ``a`` defaults to (and must equal) it. With
        no action pending, the prediction is hypothetical: the naive agent
        uses weights as if ``a`` had been recorded, the causal agent uses
        its current weights unchanged.
        """
        pending = self.history.pending_action
        if pending is not None:
            if a is not None and int(a) != pending:
                raise ValueError(f"action {a} differs from the pending action {pending}")
            a, logw = pending, self.logw
        else:
            if a is None:
                raise ValueError("no pending action; pass the action explicitly")
            a = self.action_alphabet.check(a, "action")
            logw = self.logw
            if self.mode is UpdateMode.NAIVE:
                logw = logw + self._action_loglik(a)
        h = self.history.complete()
        return mix(normalize(logw), [m.obs_dist(h, a) for m in self.models])

    def replay(self, history: History) -> "MixtureAgent":
        """Feed a recorded interaction string through the agent."""
        for step in history.steps:
            self.record_action(step.action)
            self.record_observation(step.observation)
        if history.pending_action is not None:
            self.record_action(history.pending_action)
        return self

    def __repr__(self):
        return (f"MixtureAgent(mode={self.mode.value}, models={[m.name for m in self.models]}, "
                f"posterior={self.posterior().round(6).tolist()}, t={len(self.history)})")


class MixturePolicy(IOModel):
    """The conditionals of a mixture agent viewed as a stateless I/O model.

    Each query replays the history into a fresh agent, which is fine for
    the short histories used by the enumeration criteria.
    """

    def __init__(self, models: Sequence[IOModel], prior=None, mode=UpdateMode.CAUSAL,
                 name: Optional[str] = None):
        self._proto = MixtureAgent(models, prior, mode)
        self.mode = self._proto.mode
        self.name = name or f"{self.mode.value}-mixture"
        self.action_alphabet = self._proto.action_alphabet
        self.obs_alphabet = self._proto.obs_alphabet
        self._cache: dict = {}

    def _agent(self, history: History) -> MixtureAgent:
        key = history
        agent = self._cache.get(key)
        if agent is None:
            agent = self._proto.copy().replay(history)
            self._cache[key] = agent
        return agent

    def action_dist(self, history: History) -> np.ndarray:
        return self._agent(history.complete()).action_distribution()

    def obs_dist(self, history: History, action: int) -> np.ndarray:
        return self._agent(history.complete()).predictive_obs(action)
