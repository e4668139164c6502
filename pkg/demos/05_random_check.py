# # Checking the engine against enumeration
#
# Random diagrams of every shape, random observations, and a brute-force
# oracle.  Multiply-connected posteriors fall back to enumeration when
# asked to.

# %%

from collections import Counter

import numpy as np

from beliefdiagram import classify_topology, run_batch
from beliefdiagram.generate import random_diagram, random_evidence
from beliefdiagram.oracle import oracle_marginals

rng = np.random.default_rng(7)
worst, methods, shapes = 0.0, Counter(), Counter()
for k in range(200):
    d = random_diagram(rng, ("forest", "polytree", "dag")[k % 3], n_nodes=7)
    evidence = random_evidence(d, rng, 2)
    report = run_batch(d, evidence, allow_fallback=True)
    truth = oracle_marginals(d, evidence)
    worst = max(worst, max(np.max(np.abs(report.marginals[j] - truth[j])) for j in report.marginals))
    methods[report.method] += 1
    shapes[str(classify_topology(d))] += 1

print(shapes)
print(methods)
print("largest disagreement:", worst)
