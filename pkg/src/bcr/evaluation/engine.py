"""Agent-environment simulation, the instantaneous deviation ``d(t)`` and
ensemble statistics.

Each run draws from its own Philox stream keyed by ``(seed, run_index)``,
consuming two uniforms per step: one for the action, then one for the
observation. For suites where every model is memoryless, :func:`ensemble`
uses a vectorised kernel that consumes the streams identically and
reproduces :func:`simulate` bit for bit.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Dict, Optional, Sequence, Tuple, Union

import numpy as np

from ..agents import MixtureAgent, UpdateMode
from ..core import (
    History,
    Interaction,
    SeedLike,
    kl_bits,
    kl_bits_rows,
    logsumexp,
    make_rng,
    mix,
    sample,
)
from ..models import IOModel, MemorylessModel, default_suite

ModelRef = Union[int, str, IOModel]


@dataclass(frozen=True)
class Trajectory:
    steps: Tuple[Interaction, ...]
    seed: Tuple[int, ...]
    agent_mode: UpdateMode
    env_id: str

    def __len__(self):
        return len(self.steps)

    @property
    def actions(self) -> np.ndarray:
        return np.array([s.action for s in self.steps], dtype=np.int64)

    @property
    def observations(self) -> np.ndarray:
        return np.array([s.observation for s in self.steps], dtype=np.int64)


@dataclass(frozen=True, eq=False)
class DeviationTrace:
    values: np.ndarray  # bits, one per step

    def __len__(self):
        return len(self.values)


@dataclass(frozen=True)
class BasinSpec:
    """Classify runs by the nearest center to the mean ``d(t)`` over the
    final ``window`` fraction of steps."""

    centers: Tuple[float, ...]
    window: float = 0.1

    def __post_init__(self):
        c = tuple(float(x) for x in self.centers)
        object.__setattr__(self, "centers", c)
        if len(c) == 0:
            raise ValueError("at least one basin center is required")
        if any(b <= a for a, b in zip(c, c[1:])):
            raise ValueError("basin centers must be strictly increasing")
        if not 0 < self.window <= 1:
            raise ValueError("window fraction must lie in (0, 1]")

    def window_length(self, horizon: int) -> int:
        return max(1, int(math.ceil(self.window * horizon)))

    def final_means(self, traces: np.ndarray) -> np.ndarray:
        traces = np.atleast_2d(traces)
        return traces[:, -self.window_length(traces.shape[1]):].mean(axis=1)

    def classify(self, final_means) -> np.ndarray:
        x = np.asarray(final_means, dtype=np.float64)
        # argmin picks the lower center on exact ties
        return np.abs(x[:, None] - np.asarray(self.centers)[None, :]).argmin(axis=1)


@dataclass(eq=False)
class EnsembleSummary:
    n_runs: int
    horizon: int
    mode: UpdateMode
    env_id: str
    master_seed: int
    basins: BasinSpec
    mean_trace: np.ndarray
    std_trace: np.ndarray
    final_means: np.ndarray
    assignments: np.ndarray
    basin_counts: Tuple[int, ...]
    basin_mean_traces: np.ndarray  # (n_basins, horizon), NaN for empty basins
    basin_std_traces: np.ndarray
    traces: Optional[np.ndarray] = field(default=None, repr=False)

    def count_near(self, center: float, tol: float) -> int:
        return int(np.sum(np.abs(self.final_means - center) < tol))

    def fraction_near(self, center: float, tol: float) -> float:
        return self.count_near(center, tol) / self.n_runs


# -- single runs -------------------------------------------------------------

def resolve_model(suite: Sequence[IOModel], ref: ModelRef) -> Tuple[int, IOModel]:
    """Look up a model by index, name (case-insensitive), ``"q<i>"`` /
    ``"p<i>"`` alias, or identity."""
    if isinstance(ref, IOModel):
        for i, m in enumerate(suite):
            if m is ref:
                return i, m
        return -1, ref
    if isinstance(ref, (int, np.integer)) and not isinstance(ref, bool):
        if not 0 <= ref < len(suite):
            raise ValueError(f"model index {ref} out of range for a suite of {len(suite)}")
        return int(ref), suite[int(ref)]
    key = str(ref).strip().lower()
    for i, m in enumerate(suite):
        if m.name.lower() == key:
            return i, m
    if len(key) > 1 and key[0] in "pqm" and key[1:].isdigit():
        return resolve_model(suite, int(key[1:]))
    raise ValueError(f"unknown model {ref!r}; suite has {[m.name for m in suite]}")


def _model_label(suite, ref) -> str:
    i, m = resolve_model(suite, ref)
    return m.name if i < 0 else f"{i}:{m.name}"


@dataclass(frozen=True)
class StepRecord:
    interaction: Interaction
    action_probs: np.ndarray  # agent's action law before acting
    obs_probs: np.ndarray     # agent's observation prediction at the issued action


def step_record(agent: MixtureAgent, env: IOModel, rng: np.random.Generator) -> StepRecord:
    h = agent.history.complete()
    pa = agent.action_distribution()
    a = sample(pa, rng)
    agent.record_action(a)
    po = agent.predictive_obs()
    o = sample(env.obs_dist(h, a), rng)
    agent.record_observation(o)
    return StepRecord(Interaction(a, o), pa, po)


def step(agent: MixtureAgent, env: IOModel, rng: np.random.Generator) -> Interaction:
    """One interaction: the agent acts, the environment answers, the agent
    updates. The environment sees the same history as the agent."""
    return step_record(agent, env, rng).interaction


def _deviation(reference: IOModel, history: History, a: int, pa, po) -> float:
    return (kl_bits(reference.action_dist(history), pa)
            + kl_bits(reference.obs_dist(history, a), po))


def deviation(agent: MixtureAgent, reference: IOModel, last_action: int) -> float:
    """``d(t)`` in bits for an agent at a step boundary (no pending action).

    Action KL uses the agent's current action law; observation KL uses its
    prediction after ``last_action``.
    """
    h = agent.history
    if h.pending_action is not None:
        raise RuntimeError("deviation is evaluated before the action is recorded")
    return _deviation(reference, h, int(last_action),
                      agent.action_distribution(), agent.predictive_obs(last_action))


def max_deviation(suite: Sequence[IOModel], reference: ModelRef = 0) -> float:
    """Largest ``d`` over single-model agents, which for memoryless suites
    bounds ``d(t)`` for every mixture (KL is convex in its second argument)."""
    _, ref = resolve_model(suite, reference)
    h = History()
    out = 0.0
    for m in suite:
        worst_obs = max(kl_bits(ref.obs_dist(h, a), m.obs_dist(h, a))
                        for a in range(m.action_alphabet.size))
        out = max(out, kl_bits(ref.action_dist(h), m.action_dist(h)) + worst_obs)
    return out


def _seed_key(seed: SeedLike, run_index: Optional[int]) -> Tuple[int, ...]:
    key = (int(seed),) if np.ndim(seed) == 0 else tuple(int(s) for s in seed)
    return key if run_index is None else key + (int(run_index),)


def simulate(mode, env: ModelRef, horizon: int, seed: SeedLike, *,
             suite: Optional[Sequence[IOModel]] = None, prior=None,
             reference: ModelRef = 0, run_index: Optional[int] = None,
             ) -> Tuple[Trajectory, DeviationTrace]:
    """Run a fresh agent against ``env`` for ``horizon`` steps, recording
    ``d(t)`` against ``reference`` at every step."""
    if int(horizon) < 1:
        raise ValueError("horizon must be ≥ 1")
    suite = tuple(suite) if suite is not None else default_suite()
    _, env_model = resolve_model(suite, env)
    _, ref_model = resolve_model(suite, reference)
    agent = MixtureAgent(suite, prior, mode)
    key = _seed_key(seed, run_index)
    rng = make_rng(key)
    steps, values = [], np.empty(int(horizon))
    for t in range(int(horizon)):
        h = agent.history
        rec = step_record(agent, env_model, rng)
        values[t] = _deviation(ref_model, h, rec.interaction.action, rec.action_probs, rec.obs_probs)
        steps.append(rec.interaction)
    values.setflags(write=False)
    traj = Trajectory(tuple(steps), key, agent.mode, _model_label(suite, env))
    return traj, DeviationTrace(values)


# -- vectorised memoryless kernel -------------------------------------------

def _sample_rows(p: np.ndarray, u: np.ndarray) -> np.ndarray:
    # same inverse-CDF rule as core.sample_with_uniform, one row per run
    p = np.atleast_2d(p)
    cdf = np.cumsum(p, axis=-1)
    n = p.shape[-1]
    idx = np.minimum((cdf <= u[:, None]).sum(axis=-1), n - 1)
    if p.shape[0] == 1:
        p = np.broadcast_to(p, (u.shape[0], n))
    rows = np.arange(u.shape[0])
    stuck = (p[rows, idx] == 0) & (idx > 0)
    while np.any(stuck):
        idx = idx - stuck
        stuck = (p[rows, idx] == 0) & (idx > 0)
    return idx


def _is_memoryless_setup(suite, env, reference) -> bool:
    return all(isinstance(m, MemorylessModel) for m in (*suite, env, reference))


def _simulate_batch(mode: UpdateMode, suite, prior, env: MemorylessModel,
                    reference: MemorylessModel, horizon: int, keys) -> Tuple[np.ndarray, ...]:
    """Returns ``(actions, observations, d)``, each of shape (runs, horizon)."""
    n_runs = len(keys)
    pa_tabs = [m.pa for m in suite]
    po_tabs = [m.po for m in suite]
    with np.errstate(divide="ignore"):
        log_pa = np.log(np.stack(pa_tabs, axis=1))  # [action, model]
        log_po = np.log(np.stack(po_tabs, axis=1))
        logw0 = np.log(np.asarray(prior, dtype=np.float64))
    u = np.stack([make_rng(k).random((horizon, 2)) for k in keys]) if n_runs else np.empty((0, horizon, 2))
    logw = np.broadcast_to(logw0, (n_runs, len(suite))).copy()
    actions = np.empty((n_runs, horizon), dtype=np.int64)
    obs = np.empty((n_runs, horizon), dtype=np.int64)
    d = np.empty((n_runs, horizon))
    naive = mode is UpdateMode.NAIVE
    for t in range(horizon):
        w = np.exp(logw - logsumexp(logw)[:, None])
        pa = mix(w, pa_tabs)
        a = _sample_rows(pa, u[:, t, 0])
        if naive:
            logw = logw + log_pa[a]
            w = np.exp(logw - logsumexp(logw)[:, None])
        po = mix(w, po_tabs)
        d[:, t] = kl_bits_rows(reference.pa, pa) + kl_bits_rows(reference.po, po)
        o = _sample_rows(env.po[None, :], u[:, t, 1])
        logw = logw + log_po[o]
        actions[:, t] = a
        obs[:, t] = o
    return actions, obs, d


# -- ensembles ---------------------------------------------------------------

def _run_chunk(args):
    mode, suite, prior, env_i, ref_i, horizon, keys, batch = args
    if batch:
        return _simulate_batch(mode, suite, prior, suite[env_i], suite[ref_i], horizon, keys)[2]
    return np.stack([simulate(mode, env_i, horizon, k, suite=suite, prior=prior,
                              reference=ref_i)[1].values for k in keys])


def run_traces(mode, env: ModelRef, horizon: int, n_runs: int, master_seed: int, *,
               suite=None, prior=None, reference: ModelRef = 0, jobs: int = 1) -> np.ndarray:
    """``d(t)`` traces for runs ``0..n_runs-1`` under ``master_seed``,
    shape (n_runs, horizon). Independent of ``jobs``."""
    if int(horizon) < 1:
        raise ValueError("horizon must be ≥ 1")
    if int(n_runs) < 1:
        raise ValueError("n_runs must be ≥ 1")
    mode = UpdateMode.parse(mode)
    suite = tuple(suite) if suite is not None else default_suite()
    n = len(suite)
    prior = np.full(n, 1.0 / n) if prior is None else np.asarray(prior, dtype=np.float64)
    env_i, env_m = resolve_model(suite, env)
    ref_i, ref_m = resolve_model(suite, reference)
    if env_i < 0 or ref_i < 0:
        raise ValueError("ensemble environment and reference must be members of the suite")
    batch = _is_memoryless_setup(suite, env_m, ref_m)
    keys = [_seed_key(master_seed, i) for i in range(int(n_runs))]
    jobs = max(1, int(jobs))
    if jobs == 1:
        return _run_chunk((mode, suite, prior, env_i, ref_i, int(horizon), keys, batch))
    bounds = np.linspace(0, len(keys), jobs + 1).astype(int)
    chunks = [(mode, suite, prior, env_i, ref_i, int(horizon), keys[lo:hi], batch)
              for lo, hi in zip(bounds, bounds[1:]) if hi > lo]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return np.concatenate(list(pool.map(_run_chunk, chunks)))


def summarize(traces: np.ndarray, basins: BasinSpec, *, mode=UpdateMode.CAUSAL, env_id="",
              master_seed: int = 0, keep_traces: bool = True) -> EnsembleSummary:
    traces = np.atleast_2d(np.asarray(traces, dtype=np.float64))
    n_runs, horizon = traces.shape
    final = basins.final_means(traces)
    assign = basins.classify(final)
    k = len(basins.centers)
    b_mean = np.full((k, horizon), np.nan)
    b_std = np.full((k, horizon), np.nan)
    counts = []
    for b in range(k):
        members = traces[assign == b]
        counts.append(int(len(members)))
        if len(members):
            b_mean[b] = members.mean(axis=0)
            b_std[b] = members.std(axis=0)
    return EnsembleSummary(
        n_runs=n_runs, horizon=horizon, mode=UpdateMode.parse(mode), env_id=str(env_id),
        master_seed=int(master_seed), basins=basins,
        mean_trace=traces.mean(axis=0), std_trace=traces.std(axis=0),
        final_means=final, assignments=assign, basin_counts=tuple(counts),
        basin_mean_traces=b_mean, basin_std_traces=b_std,
        traces=traces if keep_traces else None,
    )


def ensemble(mode, env: ModelRef, horizon: int, n_runs: int, master_seed: int,
             basins: Optional[BasinSpec] = None, *, suite=None, prior=None,
             reference: ModelRef = 0, jobs: int = 1, keep_traces: bool = True) -> EnsembleSummary:
    """Independent runs ``(master_seed, i)`` for ``i < n_runs``, summarised
    overall and per basin. Default basins sit at 0 and the suite's maximum
    deviation."""
    suite = tuple(suite) if suite is not None else default_suite()
    if basins is None:
        basins = BasinSpec((0.0, max_deviation(suite, reference)))
    traces = run_traces(mode, env, horizon, n_runs, master_seed, suite=suite, prior=prior,
                        reference=reference, jobs=jobs)
    return summarize(traces, basins, mode=mode, env_id=_model_label(suite, env),
                     master_seed=master_seed, keep_traces=keep_traces)
