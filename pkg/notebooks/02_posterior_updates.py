# %% [markdown]
# # How the two agents update
#
# Replay a fixed interaction string and watch the posterior over the two
# hypotheses. Recording an action moves the naive posterior but never the
# causal one.

# %%
from bcr.agents import MixtureAgent, UpdateMode
from bcr.core import History
from bcr.models import default_suite

pairs = [(1, 0), (1, 0), (0, 1), (1, 1)]
for mode in UpdateMode:
    agent = MixtureAgent(default_suite(), mode=mode)
    print(f"{mode.value:>6}: start {agent.posterior().round(4)}")
    for a, o in pairs:
        agent.record_action(a)
        after_action = agent.posterior().round(4)
        agent.record_observation(o)
        print(f"        a={a} -> {after_action}   o={o} -> {agent.posterior().round(4)}")

# %% [markdown]
# After the same observations, the causal posterior is the same whatever
# actions were taken.

# %%
obs = [o for _, o in pairs]
for acts in ([0, 0, 0, 0], [1, 1, 1, 1]):
    h = History.from_pairs(zip(acts, obs))
    print(acts, MixtureAgent(default_suite(), mode="causal").replay(h).posterior())
