"""I/O systems: hypothesis models, environments and sequence likelihoods."""

from __future__ import annotations

import math
from abc import ABC, abstractmethod
from dataclasses import dataclass
from itertools import product
from typing import Iterator, Sequence

import numpy as np

from .core import Alphabet, History, as_distribution


class IOModel(ABC):
    """A system defined by its per-step conditionals.

    ``action_dist(h)`` is ``P(a_t | ao_{<t})`` and ``obs_dist(h, a)`` is
    ``P(o_t | ao_{<t} a_t)``. Implementations must be stateless: the same
    history always yields the same distribution.
    """

    name: str = "model"
    action_alphabet: Alphabet
    obs_alphabet: Alphabet

    @abstractmethod
    def action_dist(self, history: History) -> np.ndarray:
        ...

    @abstractmethod
    def obs_dist(self, history: History, action: int) -> np.ndarray:
        ...

    @property
    def is_memoryless(self) -> bool:
        return False

    def __repr__(self):
        return f"<{type(self).__name__} {self.name!r}>"


# environments use the same interface; only obs_dist is exercised
Environment = IOModel


class MemorylessModel(IOModel):
    """Model whose conditionals ignore the history entirely."""

    def __init__(self, pa, po, name: str = "model"):
        self.pa = as_distribution(pa)
        self.po = as_distribution(po)
        self.name = str(name)
        self.action_alphabet = Alphabet(self.pa.size)
        self.obs_alphabet = Alphabet(self.po.size)

    def action_dist(self, history: History) -> np.ndarray:
        return self.pa

    def obs_dist(self, history: History, action: int) -> np.ndarray:
        return self.po

    @property
    def is_memoryless(self) -> bool:
        return True

    def __eq__(self, other):
        if not isinstance(other, MemorylessModel):
            return NotImplemented
        return np.array_equal(self.pa, other.pa) and np.array_equal(self.po, other.po)

    def __hash__(self):
        return hash((self.pa.tobytes(), self.po.tobytes()))

    def __repr__(self):
        return f"MemorylessModel(pa={self.pa.tolist()}, po={self.po.tolist()}, name={self.name!r})"


def make_memoryless(pa, po, name: str = "model") -> MemorylessModel:
    return MemorylessModel(pa, po, name)


def complement(m: MemorylessModel, name: str | None = None) -> MemorylessModel:
    """Swap the two symbols' probabilities in both the action and the
    observation law. Only defined for binary alphabets."""
    if not isinstance(m, MemorylessModel):
        raise NotImplementedError("complement is defined for memoryless models only")
    if m.pa.size != 2 or m.po.size != 2:
        raise NotImplementedError("complement requires binary action and observation alphabets")
    return MemorylessModel(m.pa[::-1], m.po[::-1], name or f"not-{m.name}")


def default_suite() -> tuple[MemorylessModel, MemorylessModel]:
    """The two-model binary suite ``(P_0, P_1)``.

    ``P_1`` favours acting and observing 1 (0.9 and 0.6); ``P_0`` is its
    complement. The environments ``Q_0, Q_1`` are these same models.
    """
    p1 = make_memoryless([0.1, 0.9], [0.4, 0.6], name="P1")
    p0 = complement(p1, name="P0")
    return p0, p1


@dataclass(frozen=True)
class InteractionSystem:
    """Coupling of an agent-side system with an environment-side system."""

    agent: IOModel
    environment: IOModel

    def __post_init__(self):
        if (self.agent.action_alphabet.size != self.environment.action_alphabet.size
                or self.agent.obs_alphabet.size != self.environment.obs_alphabet.size):
            raise ValueError("agent and environment alphabets disagree")

    def action_dist(self, history: History) -> np.ndarray:
        return self.agent.action_dist(history)

    def obs_dist(self, history: History, action: int) -> np.ndarray:
        return self.environment.obs_dist(history, action)


def _log(p: float) -> float:
    return math.log(p) if p > 0 else -math.inf


def _walk(m: IOModel, h: History, with_actions: bool) -> float:
    total = 0.0
    prefix = History()
    for step in h.steps:
        if with_actions:
            total += _log(m.action_dist(prefix)[step.action])
        total += _log(m.obs_dist(prefix, step.action)[step.observation])
        if total == -math.inf:
            return total
        prefix = History(prefix.steps + (step,))
    if with_actions and h.pending_action is not None:
        total += _log(m.action_dist(prefix)[h.pending_action])
    return total


def seq_loglik_full(m: IOModel, h: History) -> float:
    """``ln P_m(ao_{<t})``, including the pending action's factor if any."""
    return _walk(m, h, with_actions=True)


def seq_loglik_intervened(m: IOModel, h: History) -> float:
    """``ln prod_t P_m(o_t | ao_{<t} a_t)``: observation factors only, with
    the actions treated as externally set."""
    return _walk(m, h, with_actions=False)


def all_histories(n_actions: int, n_obs: int, length: int) -> Iterator[History]:
    """Every complete interaction string of the given length, in
    lexicographic order of ``(a_1, o_1, a_2, o_2, ...)``."""
    for flat in product(range(n_actions), range(n_obs), repeat=length):
        yield History.from_pairs(zip(flat[0::2], flat[1::2]))


def check_suite(models: Sequence[IOModel]) -> None:
    if len(models) == 0:
        raise ValueError("model suite is empty")
    na = {m.action_alphabet.size for m in models}
    no = {m.obs_alphabet.size for m in models}
    if len(na) != 1 or len(no) != 1:
        raise ValueError("models in a suite must share action and observation alphabets")
