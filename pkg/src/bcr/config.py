"""Experiment configuration: YAML file plus command-line overrides.

Layout (all sections optional; defaults reproduce the two-model binary
experiment)::

    suite:
      - {name: P0, pa: [0.9, 0.1], po: [0.6, 0.4]}
      - {name: P1, pa: [0.1, 0.9], po: [0.4, 0.6]}
    prior: [0.5, 0.5]
    experiment: {mode: causal, env: q0, reference: p0, steps: 2000,
                 runs: 1000, seed: 1, basins: null, window: 0.1, jobs: 1}
    eval: {criterion: D, horizon: 3, perturbations: 100}
    chain: {prior: ..., lik_d: ..., lik_s: ..., lik_dp: ...}
    evidence: [0, 0, 0]
    output: {path: null, summary: null}

Probabilities may be written as rationals (``"1/3"``).
"""

from __future__ import annotations

import copy
import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Dict, List, Optional

import yaml

from .agents import UpdateMode
from .core import as_distribution
from .evaluation.engine import BasinSpec, max_deviation, resolve_model
from .intervention import FiniteCausalChain, witness_chain
from .models import MemorylessModel, check_suite, default_suite

U64_MAX = 2**64 - 1


class ConfigError(ValueError):
    pass


def _default_dict() -> Dict[str, Any]:
    return {
        "suite": [{"name": m.name, "pa": m.pa.tolist(), "po": m.po.tolist()} for m in default_suite()],
        "prior": None,
        "experiment": {"mode": "causal", "env": "q0", "reference": "p0", "steps": 2000,
                       "runs": 1000, "seed": 1, "basins": None, "window": 0.1, "jobs": 1},
        "eval": {"criterion": "D", "horizon": 3, "perturbations": 100},
        "chain": None,
        "evidence": [0, 0, 0],
        "output": {"path": None, "summary": None},
    }


def _merge(base: dict, extra: dict) -> dict:
    out = copy.deepcopy(base)
    for k, v in (extra or {}).items():
        if isinstance(v, dict) and isinstance(out.get(k), dict):
            out[k] = _merge(out[k], v)
        else:
            out[k] = v
    return out


def _probs(values, what: str):
    try:
        return as_distribution([float(Fraction(str(v))) for v in values])
    except (TypeError, ValueError, ZeroDivisionError) as exc:
        raise ConfigError(f"{what}: {exc}") from None


def _int(value, what: str, lo: Optional[int] = 0, hi: Optional[int] = None) -> int:
    if isinstance(value, bool):
        raise ConfigError(f"{what} must be an integer")
    try:
        out = int(value)
    except (TypeError, ValueError):
        raise ConfigError(f"{what} must be an integer, got {value!r}") from None
    if out != value and not isinstance(value, str):
        raise ConfigError(f"{what} must be an integer, got {value!r}")
    if (lo is not None and out < lo) or (hi is not None and out > hi):
        raise ConfigError(f"{what} must be ≥ {lo}" + (f" and ≤ {hi}" if hi is not None else ""))
    return out


@dataclass
class ExperimentConfig:
    suite: List[MemorylessModel]
    prior: Any
    mode: UpdateMode
    env: str
    reference: str
    steps: int
    runs: int
    seed: int
    basins: BasinSpec
    jobs: int
    criterion: str
    horizon: int
    perturbations: int
    chain: FiniteCausalChain
    evidence: tuple
    out: Optional[str]
    summary: Optional[str]
    raw: Dict[str, Any] = field(repr=False, default_factory=dict)

    def provenance(self) -> List[str]:
        """Flattened ``key=value`` lines describing the effective config.

        Output paths are left out so the same run writes the same bytes
        wherever it is written."""
        lines = []

        def walk(prefix, node):
            if isinstance(node, dict):
                for k in node:
                    walk(f"{prefix}.{k}" if prefix else str(k), node[k])
            else:
                lines.append(f"{prefix}={json.dumps(node)}")

        walk("", {k: v for k, v in self.raw.items() if k != "output"})
        return lines


def load(path: Optional[str] = None, overrides: Optional[dict] = None) -> ExperimentConfig:
    raw = _default_dict()
    if path is not None:
        try:
            with open(path) as fh:
                data = yaml.safe_load(fh) or {}
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc.strerror}") from None
        except yaml.YAMLError as exc:
            raise ConfigError(f"config {path} is not valid YAML: {exc}") from None
        if not isinstance(data, dict):
            raise ConfigError("config file must contain a mapping at top level")
        unknown = set(data) - set(raw)
        if unknown:
            raise ConfigError(f"unknown config sections: {sorted(unknown)}")
        raw = _merge(raw, data)
    raw = _merge(raw, overrides or {})
    return build(raw)


def build(raw: Dict[str, Any]) -> ExperimentConfig:
    suite = []
    if not raw.get("suite"):
        raise ConfigError("suite must list at least one model")
    for i, spec in enumerate(raw["suite"]):
        if not isinstance(spec, dict) or "pa" not in spec or "po" not in spec:
            raise ConfigError(f"suite[{i}] needs 'pa' and 'po' probability lists")
        name = str(spec.get("name", f"P{i}"))
        suite.append(MemorylessModel(_probs(spec["pa"], f"suite[{i}].pa"),
                                     _probs(spec["po"], f"suite[{i}].po"), name))
    try:
        check_suite(suite)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None

    prior = None
    if raw.get("prior") is not None:
        prior = _probs(raw["prior"], "prior")
        if prior.size != len(suite):
            raise ConfigError(f"prior has {prior.size} entries for {len(suite)} models")

    ex = raw["experiment"]
    try:
        mode = UpdateMode.parse(ex["mode"])
        resolve_model(suite, ex["env"])
        resolve_model(suite, ex["reference"])
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    steps = _int(ex["steps"], "steps", None)
    if steps < 1:
        raise ConfigError("horizon must be ≥ 1")
    runs = _int(ex["runs"], "runs", 0)
    if runs < 1:
        raise ConfigError("n_runs must be ≥ 1")
    seed = _int(ex["seed"], "seed", 0, U64_MAX)
    jobs = _int(ex["jobs"], "jobs", 1)
    try:
        centers = ex.get("basins")
        if centers is None:
            centers = (0.0, max_deviation(suite, ex["reference"]))
        basins = BasinSpec(tuple(float(c) for c in centers), float(ex.get("window", 0.1)))
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"basins: {exc}") from None

    ev = raw["eval"]
    criterion = str(ev["criterion"]).upper()
    if criterion not in ("D", "C"):
        raise ConfigError(f"criterion must be D or C, got {ev['criterion']!r}")
    horizon = _int(ev["horizon"], "horizon", 0)
    if horizon < 1:
        raise ConfigError("horizon must be ≥ 1")
    perturbations = _int(ev["perturbations"], "perturbations", 0)

    if raw.get("chain") is None:
        chain = witness_chain()
    else:
        c = raw["chain"]
        try:
            chain = FiniteCausalChain.from_tables(c["prior"], c["lik_d"], c["lik_s"], c["lik_dp"])
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError(f"chain: {exc!s}") from None
    evidence = raw.get("evidence")
    if not isinstance(evidence, (list, tuple)) or len(evidence) != 3:
        raise ConfigError("evidence must be a list [d, s, d']")
    evidence = tuple(_int(v, "evidence", 0) for v in evidence)
    for v, n, what in zip(evidence, chain.cards[1:], ("d", "s", "d'")):
        if v >= n:
            raise ConfigError(f"evidence {what}={v} out of range 0..{n - 1}")

    out = raw["output"]
    return ExperimentConfig(
        suite=suite, prior=prior, mode=mode, env=str(ex["env"]), reference=str(ex["reference"]),
        steps=steps, runs=runs, seed=seed, basins=basins, jobs=jobs,
        criterion=criterion, horizon=horizon, perturbations=perturbations,
        chain=chain, evidence=evidence, out=out.get("path"), summary=out.get("summary"), raw=raw,
    )
