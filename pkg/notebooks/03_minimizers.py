# %% [markdown]
# # Which agent minimises which criterion
#
# Both criteria are computed exactly by enumerating every history up to a
# short horizon. D weighs each history by its full likelihood; C enumerates
# the agent's actions without weighting them. The naive mixture minimises
# D and the causal mixture minimises C. Random perturbations of the
# optimum only make things worse.

# %%
import numpy as np

from bcr.agents import MixturePolicy
from bcr.evaluation import minimizer_check, total_divergence
from bcr.models import default_suite

suite = default_suite()
naive, causal = MixturePolicy(suite, mode="naive"), MixturePolicy(suite, mode="causal")
for crit in "DC":
    print(f"{crit}: naive {total_divergence(crit, naive, suite, horizon=3):.4f}  "
          f"causal {total_divergence(crit, causal, suite, horizon=3):.4f}")

# %%
for crit in "DC":
    rep = minimizer_check(crit, suite, horizon=3, n_perturbations=50, rng=np.random.default_rng(0))
    print(f"{crit}: optimum {rep.optimum:.4f}, {rep.n_passed}/50 perturbations worse, "
          f"smallest margin {rep.min_margin:.4f}")
