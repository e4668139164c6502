"""Posterior marginals on a diagram whose evidence has been propagated.

On a polytree each node's marginal follows from its (normalized)
conditional and its parents' marginals.  Parents of a node in a
singly-connected diagram share no ancestors, so their joint is the
product of their marginals; that is what makes the one-sweep scheme exact.
Multiply-connected posteriors can optionally fall back to enumeration.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Iterable

import numpy as np

from .errors import EvidenceNotPropagatedError, NotSinglyConnectedError, UnknownNodeError
from .model import BeliefDiagram, TopologyClass, classify_topology
from .oracle import MAX_JOINT_STATES, oracle_marginals

PROPAGATION = "propagation"
ORACLE_FALLBACK = "oracle-fallback"


@dataclass
class PosteriorReport:
    marginals: dict
    method: str
    topology: TopologyClass
    outcomes: dict = field(default_factory=dict)
    diagnostics: dict = field(default_factory=dict)

    def to_tsv(self) -> str:
        """``node<TAB>outcome<TAB>probability`` rows, 6 decimals."""
        rows = []
        for node, vec in self.marginals.items():
            labels = self.outcomes.get(node) or [str(k) for k in range(len(vec))]
            for label, p in zip(labels, vec):
                rows.append(f"{node}\t{label}\t{p:.6f}")
        return "".join(r + "\n" for r in rows)

    def to_dict(self) -> dict:
        out = {}
        for node, vec in self.marginals.items():
            labels = self.outcomes.get(node) or [str(k) for k in range(len(vec))]
            out[str(node)] = {label: float(p) for label, p in zip(labels, vec)}
        return out

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)


def check_propagated(d: BeliefDiagram) -> None:
    for j, rec in d.nodes.items():
        if not rec.observed:
            continue
        if not rec.absorbed:
            raise EvidenceNotPropagatedError(f"evidence at {j!r} has not been absorbed")
        if rec.parents or d.children(j):
            raise EvidenceNotPropagatedError(f"evidence node {j!r} is still connected")


def prune_barren(d: BeliefDiagram, targets: Iterable) -> BeliefDiagram:
    """Copy of ``d`` reduced to the targets and their indirect predecessors."""
    keep = set()
    for t in targets:
        rec = d.node(t)
        if rec.observed:
            raise UnknownNodeError(f"target {t!r} is observed")
        keep.add(t)
        keep |= d.ancestors(t)
    return d.subdiagram(keep)


def _conditional(values: np.ndarray) -> np.ndarray:
    """Normalize a table over its first (own) axis for every configuration."""
    return values / values.sum(axis=0, keepdims=True)


def propagate_probabilities(d: BeliefDiagram) -> PosteriorReport:
    """Marginals of all unobserved nodes of a propagated polytree.

    Works in synchronous passes: the first labels every parentless node,
    each later pass labels the nodes whose parents were all labelled in
    earlier passes.  ``report.diagnostics["passes"]`` lists them.
    """
    check_propagated(d)
    topology = classify_topology(d)
    if topology is TopologyClass.MULTIPLY_CONNECTED:
        raise NotSinglyConnectedError("posterior diagram is multiply-connected")

    pending = [j for j in d.unobserved()]
    done: dict = {}
    passes = []
    while pending:
        ready = [j for j in pending if all(p in done for p in d.nodes[j].parents)]
        if not ready:
            raise NotSinglyConnectedError(f"no node can be labelled among {pending}")
        for j in ready:
            rec = d.nodes[j]
            if not rec.parents:
                vec = rec.table.values
            else:
                operands = [_conditional(rec.table.values), list(range(len(rec.table.axes)))]
                for k, p in enumerate(rec.parents, start=1):
                    operands += [done[p], [k]]
                vec = np.einsum(*operands, [0])
            done[j] = vec / vec.sum()
        passes.append(ready)
        pending = [j for j in pending if j not in done]

    return PosteriorReport(
        marginals={j: done[j] for j in d.unobserved()},
        method=PROPAGATION,
        topology=topology,
        outcomes={j: d.nodes[j].outcomes for j in d.unobserved()},
        diagnostics={"passes": passes},
    )


def posterior_marginals(
    d: BeliefDiagram, allow_fallback: bool = False, max_states: int = MAX_JOINT_STATES
) -> PosteriorReport:
    """Propagation on polytrees; enumeration on anything else if allowed."""
    check_propagated(d)
    topology = classify_topology(d)
    if topology is not TopologyClass.MULTIPLY_CONNECTED:
        return propagate_probabilities(d)
    if not allow_fallback:
        raise NotSinglyConnectedError(
            "posterior diagram is multiply-connected; enable the oracle fallback"
        )
    marginals = oracle_marginals(d, max_states=max_states)
    return PosteriorReport(
        marginals={j: marginals[j] for j in d.unobserved()},
        method=ORACLE_FALLBACK,
        topology=topology,
        outcomes={j: d.nodes[j].outcomes for j in d.unobserved()},
    )
