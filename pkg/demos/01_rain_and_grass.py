# # Rain and wet grass
#
# The smallest useful belief diagram: rain makes the grass wet.  We read
# the network from its text form, observe wet grass, and ask how likely
# rain has become.

# %%

from beliefdiagram import read_network, run_batch, samples
from beliefdiagram.oracle import oracle_marginals

print(samples.RAIN_GRASS)

# %%
# Parsing gives a diagram plus the evidence block at the end of the
# document.

d, evidence = read_network(samples.RAIN_GRASS)
print(evidence)

# %%
# The batch strategy absorbs the observation, reverses the arc Rain -> Grass
# so that Rain now carries the posterior, and then reads off marginals.
# Prior 0.2 of rain becomes 0.18 / 0.34.

report = run_batch(d, evidence)
print(report.to_tsv())
for line in report.diagnostics["trace"].lines():
    print(line)

# %%
# Brute-force enumeration of the four-state joint agrees.

print(oracle_marginals(d, evidence)["Rain"], 0.18 / 0.34)
