"""Command-line entry point.

Subcommands: ``simulate``, ``ensemble``, ``eval``, ``intervene-demo``.
Exit codes: 0 success, 1 minimizer check beaten, 2 invalid config or
flags, 3 I/O failure, 4 impossible evidence.
"""

from __future__ import annotations

import argparse
import contextlib
import io
import json
import sys
from typing import List, Optional

import numpy as np

from . import __version__
from .agents import MixtureAgent
from .config import ConfigError, ExperimentConfig, load
from .core import make_rng
from .evaluation import ensemble, minimizer_check, simulate
from .evaluation.criteria import EnumerationTooLarge, check_enumeration_size
from .evaluation.engine import resolve_model
from .intervention import (
    ImpossibleEvidenceError,
    max_abs_difference,
    posterior_conditioned,
    posterior_intervened,
)

EXIT_OK, EXIT_BEATEN, EXIT_CONFIG, EXIT_IO, EXIT_EVIDENCE = 0, 1, 2, 3, 4


def _fmt(x) -> str:
    return format(float(x), ".17g")


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", metavar="PATH", help="YAML experiment config")
    p.add_argument("--out", metavar="PATH", help="output file (default: stdout)")
    p.add_argument("--seed", type=int, metavar="U64")


def _add_experiment(p: argparse.ArgumentParser) -> None:
    p.add_argument("--mode", choices=["naive", "causal"])
    p.add_argument("--env", metavar="MODEL", help="environment model id, e.g. q0")
    p.add_argument("--reference", metavar="MODEL", help="model d(t) is measured against")
    p.add_argument("--steps", type=int, metavar="N", help="horizon")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="bcr", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="one run; writes a per-step trace")
    _add_common(p)
    _add_experiment(p)

    p = sub.add_parser("ensemble", help="many runs; writes mean/std traces per basin")
    _add_common(p)
    _add_experiment(p)
    p.add_argument("--runs", type=int, metavar="N")
    p.add_argument("--jobs", type=int, metavar="N", help="worker processes (results unchanged)")
    p.add_argument("--basins", metavar="C0,C1,...", help="basin centers in bits")
    p.add_argument("--summary", metavar="PATH", help="also write a JSON summary here")

    p = sub.add_parser("eval", help="enumeration criteria and minimizer check")
    _add_common(p)
    p.add_argument("--criterion", choices=["D", "C", "d", "c"])
    p.add_argument("--horizon", type=int, metavar="N")
    p.add_argument("--perturbations", type=int, metavar="N")

    p = sub.add_parser("intervene-demo", help="conditioned vs intervened posterior")
    _add_common(p)
    p.add_argument("--evidence", metavar="D,S,DP", help="evidence indices, default 0,0,0")
    return parser


def _overrides(args) -> dict:
    ov: dict = {}

    def put(section, key, value):
        if value is not None:
            ov.setdefault(section, {})[key] = value

    g = vars(args)
    for flag, key in (("mode", "mode"), ("env", "env"), ("reference", "reference"),
                      ("steps", "steps"), ("runs", "runs"), ("seed", "seed"), ("jobs", "jobs")):
        put("experiment", key, g.get(flag))
    if g.get("basins") is not None:
        try:
            put("experiment", "basins", [float(x) for x in args.basins.split(",")])
        except ValueError:
            raise ConfigError(f"--basins expects comma-separated numbers, got {args.basins!r}") from None
    for flag in ("criterion", "horizon", "perturbations"):
        put("eval", flag, g.get(flag))
    put("output", "path", g.get("out"))
    put("output", "summary", g.get("summary"))
    if g.get("evidence") is not None:
        try:
            ov["evidence"] = [int(x) for x in args.evidence.split(",")]
        except ValueError:
            raise ConfigError(f"--evidence expects three integers, got {args.evidence!r}") from None
    return ov


def _header(cfg: ExperimentConfig, command: str) -> List[str]:
    return [f"# command={command}"] + [f"# {line}" for line in cfg.provenance()]


def _emit(path: Optional[str], text: str) -> None:
    if path is None:
        sys.stdout.write(text)
        return
    with open(path, "w", newline="") as fh:
        fh.write(text)


def cmd_simulate(cfg: ExperimentConfig) -> int:
    traj, trace = simulate(cfg.mode, cfg.env, cfg.steps, cfg.seed, suite=cfg.suite,
                           prior=cfg.prior, reference=cfg.reference)
    agent = MixtureAgent(cfg.suite, cfg.prior, cfg.mode)
    buf = io.StringIO()
    buf.write("\n".join(_header(cfg, "simulate")) + "\n")
    names = [m.name for m in cfg.suite]
    buf.write(",".join(["t", "action", "observation", "d_t_bits"] + [f"posterior_{n}" for n in names]) + "\n")
    for t, (s, d) in enumerate(zip(traj.steps, trace.values), start=1):
        agent.record_action(s.action)
        agent.record_observation(s.observation)
        row = [str(t), str(s.action), str(s.observation), _fmt(d)] + [_fmt(w) for w in agent.posterior()]
        buf.write(",".join(row) + "\n")
    _emit(cfg.out, buf.getvalue())
    return EXIT_OK


def _summary_record(cfg: ExperimentConfig, summary) -> dict:
    return {
        "n_runs": summary.n_runs,
        "horizon": summary.horizon,
        "mode": summary.mode.value,
        "env": summary.env_id,
        "reference": cfg.reference,
        "master_seed": summary.master_seed,
        "window": summary.basins.window,
        "basin_centers": list(summary.basins.centers),
        "basin_counts": list(summary.basin_counts),
        "final_window_mean": {"mean": float(summary.final_means.mean()),
                              "min": float(summary.final_means.min()),
                              "max": float(summary.final_means.max())},
        "config": cfg.raw,
    }


def cmd_ensemble(cfg: ExperimentConfig) -> int:
    summary = ensemble(cfg.mode, cfg.env, cfg.steps, cfg.runs, cfg.seed, cfg.basins,
                       suite=cfg.suite, prior=cfg.prior, reference=cfg.reference,
                       jobs=cfg.jobs, keep_traces=False)
    buf = io.StringIO()
    buf.write("\n".join(_header(cfg, "ensemble")) + "\n")
    buf.write(f"# basin_centers={json.dumps(list(summary.basins.centers))}\n")
    buf.write(f"# basin_counts={json.dumps(list(summary.basin_counts))}\n")
    cols = ["t", "mean_bits", "std_bits"]
    for b in range(len(summary.basins.centers)):
        cols += [f"basin{b}_mean_bits", f"basin{b}_std_bits"]
    buf.write(",".join(cols) + "\n")
    for t in range(summary.horizon):
        row = [str(t + 1), _fmt(summary.mean_trace[t]), _fmt(summary.std_trace[t])]
        for b in range(len(summary.basins.centers)):
            row += [_fmt(summary.basin_mean_traces[b, t]), _fmt(summary.basin_std_traces[b, t])]
        buf.write(",".join(row) + "\n")
    _emit(cfg.out, buf.getvalue())
    if cfg.summary:
        _emit(cfg.summary, json.dumps(_summary_record(cfg, summary), indent=2) + "\n")
    return EXIT_OK


def cmd_eval(cfg: ExperimentConfig) -> int:
    check_enumeration_size(cfg.suite, cfg.horizon)
    report = minimizer_check(cfg.criterion, cfg.suite, cfg.prior, cfg.horizon,
                             cfg.perturbations, make_rng(cfg.seed))
    lines = _header(cfg, "eval")
    lines.append(f"criterion={report.criterion} horizon={report.horizon} optimum_bits={_fmt(report.optimum)}")
    lines.append("candidate,value_bits,margin_bits,status")
    for i, (v, m) in enumerate(zip(report.candidates, report.margins)):
        status = "worse" if m > report.tol else ("BEATS" if m < -report.tol else "tie")
        lines.append(f"{i},{_fmt(v)},{_fmt(m)},{status}")
    lines.append(f"# passed={report.n_passed}/{len(report.candidates)} beaten={report.n_beaten}"
                 f" min_margin={_fmt(report.min_margin)}")
    _emit(cfg.out, "\n".join(lines) + "\n")
    return EXIT_BEATEN if report.n_beaten else EXIT_OK


def cmd_intervene_demo(cfg: ExperimentConfig) -> int:
    d, s, dp = cfg.evidence
    cond = posterior_conditioned(cfg.chain, d, s, dp)
    intv = posterior_intervened(cfg.chain, d, s, dp)
    lines = _header(cfg, "intervene-demo")
    lines.append(f"evidence d={d} s={s} d'={dp}")
    lines.append("theta,conditioned,intervened")
    for k, (a, b) in enumerate(zip(cond, intv)):
        lines.append(f"{k},{a},{b}")
    lines.append(f"max_abs_difference={_fmt(max_abs_difference(cond, intv))}")
    _emit(cfg.out, "\n".join(lines) + "\n")
    return EXIT_OK


COMMANDS = {
    "simulate": cmd_simulate,
    "ensemble": cmd_ensemble,
    "eval": cmd_eval,
    "intervene-demo": cmd_intervene_demo,
}


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = load(args.config, _overrides(args))
        return COMMANDS[args.command](cfg)
    except (ConfigError, EnumerationTooLarge) as exc:
        print(f"bcr: error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ImpossibleEvidenceError as exc:
        print(f"bcr: impossible evidence: {exc}", file=sys.stderr)
        return EXIT_EVIDENCE
    except OSError as exc:
        print(f"bcr: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
