"""Simulation engine, deviation traces, ensembles and the enumeration
criteria."""

from .criteria import (
    EnumerationTooLarge,
    MinimizerReport,
    PerturbedModel,
    divergence_terms,
    minimizer_check,
    optimal_agent,
    random_perturbation,
    single_perturbation,
    step_terms,
    total_divergence,
    total_divergence_causal,
    total_divergence_naive,
)
from .engine import (
    BasinSpec,
    DeviationTrace,
    EnsembleSummary,
    StepRecord,
    Trajectory,
    deviation,
    ensemble,
    max_deviation,
    resolve_model,
    run_traces,
    simulate,
    step,
    step_record,
    summarize,
)
