"""Mixture agents over I/O models: the naive Bayesian mixture and the
Bayesian control rule, with simulation, ensemble statistics, exact
enumeration criteria and a finite intervention calculus."""

__version__ = "0.1.0"

from .agents import MixtureAgent, MixturePolicy, UpdateMode
from .core import (
    Alphabet,
    DegeneratePosteriorError,
    History,
    Interaction,
    as_distribution,
    kl_bits,
    make_rng,
    normalize,
    sample,
)
from .models import (
    IOModel,
    InteractionSystem,
    MemorylessModel,
    complement,
    make_memoryless,
    default_suite,
    seq_loglik_full,
    seq_loglik_intervened,
)
