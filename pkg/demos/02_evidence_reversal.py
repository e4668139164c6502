# # Evidence absorption and reversal, step by step
#
# An observed node is first *absorbed*: its table is sliced at the
# observation and its children forget it.  Each arc into it is then
# *reversed*, moving the evidence onto the parent, until the observed node
# stands alone.  After every step the product of the tables still equals
# the posterior joint (up to a constant).

# %%

import numpy as np

from beliefdiagram import EvidenceAssertion, samples
from beliefdiagram.oracle import condition_joint, enumerate_joint, joint_over
from beliefdiagram.transform import absorb_evidence, propagate_evidence

# %%
# A chain 1 -> 2 -> 3 with node 2 observed.

chain = samples.chain()
original = chain.copy()
e = EvidenceAssertion(2, 1)

step = absorb_evidence(chain, e)
print("\n".join(step.lines()))
print("arcs:", chain.arcs())

# %%
# One reversal disconnects node 2; the arc (1, 2) is simply deleted.

step = propagate_evidence(chain, 2)
print("\n".join(step.lines()))
print("arcs:", chain.arcs())
print("evidence table is now a constant:", chain.nodes[2].table.values)

# %%
# The product of what is left is the posterior joint over 1 and 3.

mine = joint_over(enumerate_joint(chain), [1, 3])
truth = joint_over(condition_joint(enumerate_joint(original), [e]), [1, 3])
print(np.round(mine, 6))
print("max gap:", np.max(np.abs(mine - truth)))

# %%
# In a forest (1 -> 2, 1 -> 3, 2 -> 4) observing the leaf takes two
# reversals.  Node 4 briefly inherits node 2's parent (INHERIT) but no
# lasting arc is added, so the forest stays a forest.

forest = samples.small_forest()
trace = absorb_evidence(forest, EvidenceAssertion(4, 0)) + propagate_evidence(forest, 4)
print("\n".join(trace.lines()))
print("reversals:", trace.reversals, "fill-in:", trace.fill_ins, "arcs:", forest.arcs())
