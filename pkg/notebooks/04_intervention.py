# %% [markdown]
# # Seeing S vs. setting S
#
# A four-variable chain theta -> D -> S -> D'. Observing S says something
# about theta; setting S from outside does not. The bundled witness chain
# makes the gap large, and exact rational arithmetic shows it precisely.

# %%
from bcr.intervention import (
    intervene_s,
    max_abs_difference,
    posterior_conditioned,
    posterior_intervened,
    witness_chain,
)

chain = witness_chain()
seen = posterior_conditioned(chain, 0, 0, 0)
done = posterior_intervened(chain, 0, 0, 0)
print("conditioned:", [str(x) for x in seen])
print("intervened: ", [str(x) for x in done])
print("max abs difference:", float(max_abs_difference(seen, done)))

# %% Intervening is the same as conditioning in the modified chain.
print([str(x) for x in posterior_conditioned(intervene_s(chain, 0), 0, 0, 0)])
