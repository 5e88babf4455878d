"""Finite alphabets, interaction histories, discrete distributions and the
information-theoretic helpers shared by the rest of the package.

Distributions are plain read-only ``float64`` numpy arrays; use
:func:`as_distribution` to validate one. Log-weights are natural-log arrays.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence, Tuple, Union

import numpy as np

DIST_ATOL = 1e-12

SeedLike = Union[int, Sequence[int]]


class DegeneratePosteriorError(ValueError):
    """Raised when every log-weight is -inf, so no hypothesis survives."""


@dataclass(frozen=True)
class Alphabet:
    size: int
    labels: Optional[Tuple[str, ...]] = None

    def __post_init__(self):
        if int(self.size) < 1:
            raise ValueError("alphabet size must be >= 1")
        if self.labels is not None:
            object.__setattr__(self, "labels", tuple(str(x) for x in self.labels))
            if len(self.labels) != self.size:
                raise ValueError(
                    f"got {len(self.labels)} labels for an alphabet of size {self.size}"
                )

    def check(self, symbol: int, what: str = "symbol") -> int:
        s = int(symbol)
        if not 0 <= s < self.size:
            raise ValueError(f"{what} {symbol!r} out of range 0..{self.size - 1}")
        return s

    def label(self, symbol: int) -> str:
        return self.labels[symbol] if self.labels else str(symbol)


BINARY = Alphabet(2)


@dataclass(frozen=True)
class Interaction:
    action: int
    observation: int


@dataclass(frozen=True)
class History:
    """An interaction string ``ao_{<t}``, optionally followed by a pending
    action ``a_t`` that has been issued but not yet answered."""

    steps: Tuple[Interaction, ...] = ()
    pending_action: Optional[int] = None

    def __len__(self) -> int:
        return len(self.steps)

    @classmethod
    def from_pairs(cls, pairs, pending_action=None) -> "History":
        return cls(tuple(Interaction(int(a), int(o)) for a, o in pairs), pending_action)

    def with_action(self, action: int) -> "History":
        if self.pending_action is not None:
            raise ValueError("history already has a pending action")
        return History(self.steps, int(action))

    def with_observation(self, observation: int) -> "History":
        if self.pending_action is None:
            raise ValueError("no pending action to pair the observation with")
        return History(self.steps + (Interaction(self.pending_action, int(observation)),))

    def complete(self) -> "History":
        """The history with any pending action dropped."""
        return History(self.steps) if self.pending_action is not None else self

    def actions(self) -> Tuple[int, ...]:
        return tuple(s.action for s in self.steps)

    def observations(self) -> Tuple[int, ...]:
        return tuple(s.observation for s in self.steps)


EMPTY = History()


def as_distribution(probs, atol: float = DIST_ATOL) -> np.ndarray:
    """Validate ``probs`` and return it as a read-only float64 array."""
    p = np.array(probs, dtype=np.float64)
    if p.ndim != 1 or p.size == 0:
        raise ValueError("a distribution must be a non-empty 1-d sequence")
    if not np.all(np.isfinite(p)) or np.any(p < 0) or np.any(p > 1):
        raise ValueError(f"probabilities must lie in [0, 1], got {p.tolist()}")
    if abs(p.sum() - 1.0) > atol:
        raise ValueError(f"probabilities sum to {p.sum()!r}, not 1")
    p.setflags(write=False)
    return p


def is_distribution(probs, atol: float = DIST_ATOL) -> bool:
    try:
        as_distribution(probs, atol)
    except ValueError:
        return False
    return True


def logsumexp(logw) -> np.ndarray:
    """Stable ``log(sum(exp(x)))`` over the last axis.

    The sum runs over hypotheses in index order so that a single agent and
    a batch of agents (leading axis = runs) round identically.
    """
    lw = np.asarray(logw, dtype=np.float64)
    mx = lw.max(axis=-1)
    safe = np.where(np.isfinite(mx), mx, 0.0)
    acc = np.zeros_like(safe)
    for m in range(lw.shape[-1]):
        acc = acc + np.exp(lw[..., m] - safe)
    with np.errstate(divide="ignore"):
        return safe + np.log(acc)


def mix(weights, tables) -> np.ndarray:
    """``sum_m weights[..., m] * tables[m]`` accumulated in index order."""
    w = np.asarray(weights, dtype=np.float64)
    acc = w[..., 0, None] * tables[0]
    for m in range(1, len(tables)):
        acc = acc + w[..., m, None] * tables[m]
    return acc


def normalize(logw) -> np.ndarray:
    """Turn natural-log weights into a probability vector.

    Computed as ``exp(logw - logsumexp(logw))`` so that long products of
    likelihoods never underflow. Entries at ``-inf`` map to exactly 0.
    """
    lw = np.asarray(logw, dtype=np.float64)
    if lw.ndim != 1 or lw.size == 0:
        raise ValueError("log-weights must be a non-empty 1-d sequence")
    if np.any(np.isnan(lw)) or np.any(lw == np.inf):
        raise ValueError("log-weights must be finite or -inf")
    if not np.any(np.isfinite(lw)):
        raise DegeneratePosteriorError("all hypotheses have zero weight")
    p = np.exp(lw - logsumexp(lw)[..., None])
    p.setflags(write=False)
    return p


def make_rng(seed: SeedLike, run_index: Optional[int] = None) -> np.random.Generator:
    """Counter-based (Philox) generator keyed by ``(seed, run_index)``.

    Distinct run indices under one master seed give independent streams,
    and any single run can be regenerated on its own.
    """
    key = [int(seed)] if np.ndim(seed) == 0 else [int(s) for s in seed]
    if run_index is not None:
        key.append(int(run_index))
    if any(k < 0 for k in key):
        raise ValueError("seeds must be non-negative integers")
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(key)))


def sample(d, rng: np.random.Generator) -> int:
    """Draw one symbol index from ``d`` using exactly one uniform variate."""
    p = np.asarray(d, dtype=np.float64)
    u = rng.random()
    return sample_with_uniform(p, u)


def sample_with_uniform(p: np.ndarray, u: float) -> int:
    # inverse-CDF; the last index absorbs rounding in the cumulative sum
    cdf = np.cumsum(p)
    i = int(np.searchsorted(cdf, u, side="right"))
    i = min(i, p.size - 1)
    # never land on a zero-probability symbol because of a flat cdf segment
    while p[i] == 0 and i > 0:
        i -= 1
    return i


def kl_bits(p, q) -> float:
    """KL divergence ``sum p log2(p/q)`` in bits.

    Terms with ``p(x) = 0`` contribute 0; a symbol with ``p(x) > 0`` and
    ``q(x) = 0`` makes the result ``+inf``.
    """
    p = np.asarray(p, dtype=np.float64)
    q = np.asarray(q, dtype=np.float64)
    if p.shape != q.shape:
        raise ValueError(f"alphabet mismatch: {p.shape} vs {q.shape}")
    return float(kl_bits_rows(p, q))


def kl_bits_rows(p: np.ndarray, q: np.ndarray) -> np.ndarray:
    """:func:`kl_bits` of a fixed ``p`` against each row of ``q``."""
    acc = np.zeros(q.shape[:-1])
    with np.errstate(divide="ignore"):
        for x in range(p.shape[-1]):
            if p[x] > 0:
                acc = acc + p[x] * (np.log2(p[x]) - np.log2(q[..., x]))
    # rounding can leave tiny negatives where q is within ulps of p
    return np.maximum(acc, 0.0)
