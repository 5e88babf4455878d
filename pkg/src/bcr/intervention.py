"""Conditioning versus intervening in the finite chain
``theta -> D -> S -> D'`` (with ``theta`` a parent of every variable).

A chain holds the four factors ``p(theta)``, ``p(D|theta)``,
``p(S|D,theta)`` and ``p(D'|D,S,theta)`` as dense tables indexed
``[theta][d][s][d']``. Tables built from rationals (``Fraction``, ``int`` or
strings like ``"1/3"``) are kept exact; anything else is float64.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from numbers import Rational

import numpy as np

from .core import DIST_ATOL


class ImpossibleEvidenceError(ValueError):
    """The queried evidence has zero probability under every parameter."""


def _is_rational(x) -> bool:
    if isinstance(x, bool):
        return False
    if isinstance(x, Rational):
        return True
    if isinstance(x, str):
        try:
            Fraction(x)
        except (ValueError, ZeroDivisionError):
            return False
        return True
    return False


def _table(values, exact: bool) -> np.ndarray:
    if exact:
        arr = np.array(values, dtype=object)
        flat = [Fraction(v) for v in arr.ravel()]
        out = np.empty(arr.shape, dtype=object)
        out.ravel()[:] = flat
        return out
    arr = np.array(values, dtype=object)
    return np.vectorize(lambda v: float(Fraction(v)) if isinstance(v, str) else float(v),
                        otypes=[np.float64])(arr)


def _check_slices(name: str, table: np.ndarray, exact: bool) -> None:
    if np.any(table < 0):
        raise ValueError(f"{name} has negative entries")
    sums = table.sum(axis=-1)
    if exact:
        bad = [s for s in np.ravel(sums) if s != 1]
    else:
        bad = [s for s in np.ravel(sums) if abs(s - 1.0) > DIST_ATOL]
    if bad:
        raise ValueError(f"{name}: conditional slices must sum to 1, found {bad[0]}")


@dataclass(frozen=True, eq=False)
class FiniteCausalChain:
    prior: np.ndarray   # [theta]
    lik_d: np.ndarray   # [theta][d]
    lik_s: np.ndarray   # [theta][d][s]
    lik_dp: np.ndarray  # [theta][d][s][d']
    exact: bool = False

    @classmethod
    def from_tables(cls, prior, lik_d, lik_s, lik_dp, exact=None) -> "FiniteCausalChain":
        tables = [prior, lik_d, lik_s, lik_dp]
        if exact is None:
            exact = all(_is_rational(v) for t in tables for v in np.ravel(np.array(t, dtype=object)))
        arrs = [_table(t, exact) for t in tables]
        return cls(*arrs, exact=bool(exact))

    def __post_init__(self):
        t = self.prior.shape[0] if self.prior.ndim == 1 else -1
        if t < 1:
            raise ValueError("prior must be a non-empty 1-d table")
        d = self.lik_d.shape[-1]
        s = self.lik_s.shape[-1]
        if self.lik_d.shape != (t, d):
            raise ValueError(f"lik_d must have shape (theta, d), got {self.lik_d.shape}")
        if self.lik_s.shape != (t, d, s):
            raise ValueError(f"lik_s must have shape {(t, d, s)}, got {self.lik_s.shape}")
        if self.lik_dp.ndim != 4 or self.lik_dp.shape[:3] != (t, d, s):
            raise ValueError(f"lik_dp must have shape {(t, d, s)} + (d',), got {self.lik_dp.shape}")
        for name in ("prior", "lik_d", "lik_s", "lik_dp"):
            tab = getattr(self, name)
            tab.setflags(write=False)
            _check_slices(name, tab, self.exact)

    @property
    def cards(self) -> tuple[int, int, int, int]:
        """Cardinalities ``(theta, D, S, D')``."""
        return self.lik_dp.shape

    def joint(self) -> np.ndarray:
        """Full joint table ``p(theta, d, s, d')``."""
        return (self.prior[:, None, None, None] * self.lik_d[:, :, None, None]
                * self.lik_s[:, :, :, None] * self.lik_dp)

    def _check(self, d, s, dp):
        _, nd, ns, ndp = self.cards
        for val, n, what in ((d, nd, "d"), (s, ns, "s"), (dp, ndp, "d'")):
            if not 0 <= int(val) < n:
                raise ValueError(f"{what}={val} out of range 0..{n - 1}")
        return int(d), int(s), int(dp)


def _finish(unnorm: np.ndarray) -> np.ndarray:
    z = unnorm.sum()
    if z == 0:
        raise ImpossibleEvidenceError("evidence has zero probability under every parameter value")
    return unnorm / z


def posterior_conditioned(c: FiniteCausalChain, d: int, s: int, dp: int) -> np.ndarray:
    """``p(theta | D=d, S=s, D'=dp)``: every value treated as observed."""
    d, s, dp = c._check(d, s, dp)
    return _finish(c.prior * c.lik_d[:, d] * c.lik_s[:, d, s] * c.lik_dp[:, d, s, dp])


def posterior_intervened(c: FiniteCausalChain, d: int, s_hat: int, dp: int) -> np.ndarray:
    """``p(theta | D=d, do(S=s_hat), D'=dp)``.

    The set value still selects the ``D'`` likelihood but contributes no
    evidence of its own, so the ``p(S|D,theta)`` factor drops out.
    """
    d, s_hat, dp = c._check(d, s_hat, dp)
    return _finish(c.prior * c.lik_d[:, d] * c.lik_dp[:, d, s_hat, dp])


def intervene_s(c: FiniteCausalChain, s_fixed: int) -> FiniteCausalChain:
    """Chain with ``p(S|D,theta)`` replaced by a point mass at ``s_fixed``."""
    nt, nd, ns, _ = c.cards
    if not 0 <= int(s_fixed) < ns:
        raise ValueError(f"s={s_fixed} out of range 0..{ns - 1}")
    if c.exact:
        lik_s = np.empty((nt, nd, ns), dtype=object)
        lik_s[...] = Fraction(0)
        lik_s[:, :, int(s_fixed)] = Fraction(1)
    else:
        lik_s = np.zeros((nt, nd, ns))
        lik_s[:, :, int(s_fixed)] = 1.0
    return FiniteCausalChain(c.prior, c.lik_d, lik_s, c.lik_dp, exact=c.exact)


def _random_simplex(rng, shape, k):
    return rng.dirichlet(np.ones(k), size=shape)


def random_chain(rng: np.random.Generator, cards=(2, 2, 2, 2)) -> FiniteCausalChain:
    """Float chain with every conditional drawn uniformly from its simplex."""
    nt, nd, ns, ndp = cards
    return FiniteCausalChain(
        prior=rng.dirichlet(np.ones(nt)),
        lik_d=_random_simplex(rng, (nt,), nd),
        lik_s=_random_simplex(rng, (nt, nd), ns),
        lik_dp=_random_simplex(rng, (nt, nd, ns), ndp),
    )


def witness_chain() -> FiniteCausalChain:
    """Binary chain in which the simulated value ``S`` carries information
    about ``theta``, so conditioning on it and setting it disagree.

    For evidence ``(d, s, d') = (0, 0, 0)``, conditioning gives
    ``(63/67, 4/67)`` while intervening gives ``(7/11, 4/11)``.
    """
    half = Fraction(1, 2)
    return FiniteCausalChain.from_tables(
        prior=[half, half],
        lik_d=[[half, half], [half, half]],
        lik_s=[[["9/10", "1/10"], ["9/10", "1/10"]],
               [["1/10", "9/10"], ["1/10", "9/10"]]],
        lik_dp=[[[["7/10", "3/10"]] * 2] * 2,
                [[["2/5", "3/5"]] * 2] * 2],
    )


def max_abs_difference(p, q) -> float:
    return float(max(abs(float(a) - float(b)) for a, b in zip(p, q)))
