# # Message passing on a tree
#
# On a forest the reversals can be replaced by messages: likelihoods travel
# up towards the roots, updated marginals travel down.  A priority queue
# decides which message goes next.  The result matches the batch answer to
# every printed digit.

# %%

from beliefdiagram import EvidenceAssertion, run_batch, run_message_passing, run_priority, samples

tree = samples.deep_tree()
print(tree.arcs())
evidence = [EvidenceAssertion(4, 0)]

# %%
# Observing the deepest leaf sends three messages up and five down.

report = run_message_passing(tree, evidence)
for step in report.diagnostics["steps"]:
    print("\n".join(step.lines()))
print("up:", report.diagnostics["upward"], "down:", report.diagnostics["downward"])

# %%
# Two observations at once: one-at-a-time, all-at-once and batch agree.

evidence = [EvidenceAssertion(4, 0), EvidenceAssertion(7, 1)]
tables = [run(tree, evidence).to_tsv() for run in (run_message_passing, run_priority, run_batch)]
print(tables[0])
print("identical:", tables[0] == tables[1] == tables[2])
