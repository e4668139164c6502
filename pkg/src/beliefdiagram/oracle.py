"""Brute-force enumeration of the joint distribution.

This is the reference every transformation is checked against.  It
deliberately does nothing clever: each factor is broadcast over the full
cross-product outcome space and multiplied in, and marginals are summed
with ``math.fsum`` in fixed index order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .errors import ImpossibleEvidenceError, StateSpaceTooLargeError, UnknownNodeError
from .model import BeliefDiagram, EvidenceAssertion

#: default cap on the number of joint states
MAX_JOINT_STATES = 2**22


@dataclass
class JointTable:
    """Unnormalized joint over ``variables`` (one axis each, in order)."""

    variables: tuple
    values: np.ndarray

    def __post_init__(self):
        self.variables = tuple(self.variables)
        self._total = None

    @property
    def total(self) -> float:
        if self._total is None:
            self._total = math.fsum(self.values.reshape(-1).tolist())
        return self._total

    def normalized(self) -> np.ndarray:
        if self.total <= 0:
            raise ImpossibleEvidenceError("joint table has no positive entry")
        return self.values / self.total

    def axis(self, node) -> int:
        try:
            return self.variables.index(node)
        except ValueError:
            raise UnknownNodeError(f"node {node!r} is not a joint variable") from None


def joint_size(d: BeliefDiagram) -> int:
    size = 1
    for rec in d.nodes.values():
        if not rec.absorbed:
            size *= rec.cardinality
    return size


def enumerate_joint(d: BeliefDiagram, max_states: int = MAX_JOINT_STATES) -> JointTable:
    """Product of every node table over all unabsorbed variables.

    Absorbed evidence nodes have no variable of their own; their likelihood
    tables enter as plain factors over the parents.
    """
    variables = tuple(j for j, rec in d.nodes.items() if not rec.absorbed)
    size = joint_size(d)
    if size > max_states:
        raise StateSpaceTooLargeError(f"joint has {size} states, cap is {max_states}")
    shape = tuple(d.nodes[v].cardinality for v in variables)
    position = {v: k for k, v in enumerate(variables)}
    joint = np.ones(shape)
    for rec in d.nodes.values():
        table = rec.table
        # permute the factor's axes into joint order, then pad with singleton axes
        order = sorted(range(len(table.axes)), key=lambda k: position[table.axes[k]])
        moved = np.transpose(table.values, order)
        target = [1] * len(variables)
        for k in order:
            target[position[table.axes[k]]] = table.values.shape[k]
        joint = joint * moved.reshape(target)
    return JointTable(variables, joint)


def condition_joint(t: JointTable, evidence: Iterable[EvidenceAssertion]) -> JointTable:
    """Zero every entry inconsistent with the evidence."""
    values = t.values.copy()
    for e in evidence:
        ax = t.axis(e.node)
        if not 0 <= e.outcome < values.shape[ax]:
            raise ValueError(f"outcome {e.outcome} out of range for node {e.node!r}")
        mask = np.zeros(values.shape[ax], dtype=bool)
        mask[e.outcome] = True
        shape = [1] * values.ndim
        shape[ax] = -1
        values = values * mask.reshape(shape)
    out = JointTable(t.variables, values)
    if not out.total > 0:
        raise ImpossibleEvidenceError("evidence has probability zero")
    return out


def marginal_from_joint(t: JointTable, node) -> np.ndarray:
    """Normalized marginal vector of one variable."""
    ax = t.axis(node)
    rows = np.moveaxis(t.values, ax, 0).reshape(t.values.shape[ax], -1)
    sums = np.array([math.fsum(row.tolist()) for row in rows])
    total = math.fsum(sums.tolist())
    if total <= 0:
        raise ImpossibleEvidenceError("joint table has no positive entry")
    return sums / total


def joint_over(t: JointTable, nodes) -> np.ndarray:
    """Normalized joint of a subset, axes in the order given."""
    nodes = list(nodes)
    keep = [t.axis(v) for v in nodes]
    drop = tuple(k for k in range(t.values.ndim) if k not in keep)
    summed = t.values.sum(axis=drop) if drop else t.values
    remaining = [k for k in range(t.values.ndim) if k in keep]
    summed = np.transpose(summed, [remaining.index(k) for k in keep])
    total = summed.sum()
    if total <= 0:
        raise ImpossibleEvidenceError("joint table has no positive entry")
    return summed / total


def oracle_marginals(
    d: BeliefDiagram,
    evidence: Iterable[EvidenceAssertion] = (),
    max_states: int = MAX_JOINT_STATES,
) -> dict:
    """Posterior marginals of every unobserved node, straight from enumeration.

    Evidence may be given explicitly (for nodes still unobserved in ``d``);
    observed nodes of ``d`` are excluded from the result either way.
    """
    evidence = list(evidence)
    observed = {e.node for e in evidence}
    t = enumerate_joint(d, max_states)
    pending = [
        EvidenceAssertion(j, rec.evidence)
        for j, rec in d.nodes.items()
        if rec.observed and not rec.absorbed
    ]
    if evidence or pending:
        t = condition_joint(t, evidence + pending)
    elif not t.total > 0:
        raise ImpossibleEvidenceError("evidence has probability zero")
    return {
        v: marginal_from_joint(t, v)
        for v in t.variables
        if v not in observed and not d.nodes[v].observed
    }
