# # Polytrees, fill-in, and the order of reversals
#
# Two chains 1 -> 3 and 2 -> 4 meet at 5, which has a child 6.  Observing 6
# and reversing its way back to the roots adds arcs between the two
# branches: the posterior diagram is multiply-connected.  Different
# orderings of the predecessors give different arcs but the same answer.

# %%

import numpy as np

from beliefdiagram import EvidenceAssertion, classify_topology, samples
from beliefdiagram.oracle import oracle_marginals
from beliefdiagram.transform import absorb_evidence, propagate_evidence

original = samples.converging_polytree()
e = EvidenceAssertion(6, 0)
print("before:", original.arcs(), classify_topology(original))

# %%

posteriors = {}
for ordering in ([1, 3, 2, 4, 5], [2, 4, 1, 3, 5]):
    d = original.copy()
    absorb_evidence(d, e)
    trace = propagate_evidence(d, 6, ordering)
    fill = [line for line in trace.lines() if line.startswith("ARC+")]
    print(ordering, "->", classify_topology(d), fill)
    print("   arcs:", sorted(d.arcs()))
    posteriors[tuple(ordering)] = oracle_marginals(d)

# %%
# Both posterior diagrams describe the same distribution.

a, b = posteriors.values()
print(max(np.max(np.abs(a[j] - b[j])) for j in range(1, 6)))
