"""Evidence absorption, evidence reversal and evidence propagation.

All three operations mutate a :class:`~beliefdiagram.model.BeliefDiagram`
in place and keep the product of all node tables equal to the posterior
joint up to a positive scalar.  Each returns a :class:`TransformTrace`.

Arcs added by a reversal come in two flavours.  Arcs into the unobserved
node (it inherits the evidence node's other parents) are *fill-in* arcs and
persist after propagation.  Arcs into the evidence node (it inherits the
unobserved node's parents) are transient: every one of them is reversed
away before propagation finishes.  Only the former are counted as fill-in.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

import numpy as np

from .errors import (
    AlreadyObservedError,
    ImpossibleEvidenceError,
    InvalidOrderingError,
    NotAbsorbedError,
    NotAnEvidenceArcError,
    OutcomeOutOfRangeError,
    PathExistsError,
)
from .model import (
    BeliefDiagram,
    EvidenceAssertion,
    NodeId,
    PotentialTable,
    has_directed_path,
    ordered_list,
)

__all__ = [
    "EvidenceAssertion",
    "ReversalFrame",
    "Step",
    "TransformTrace",
    "absorb_evidence",
    "absorb_all",
    "evidence_reverse",
    "propagate_evidence",
    "propagate_all_evidence",
    "replay_arcs",
]


@dataclass(frozen=True)
class Step:
    """One trace entry.

    ``kind`` is ``absorb``, ``reverse``, ``arc-added`` or ``arc-deleted``.
    For absorb, ``a`` is the node and ``label`` the observed outcome; for
    the others ``a -> b`` is the arc (``i``, ``j`` for reverse).
    """

    kind: str
    a: NodeId
    b: NodeId | None = None
    label: str | None = None
    fill_in: bool = False

    def line(self) -> str:
        if self.kind == "absorb":
            return f"ABSORB node={self.a} outcome={self.label}"
        if self.kind == "reverse":
            return f"REVERSE i={self.a} j={self.b}"
        if self.kind == "arc-deleted":
            return f"ARC- {self.a}->{self.b}"
        if self.fill_in:
            return f"ARC+ {self.a}->{self.b}"
        return f"INHERIT {self.a}->{self.b}"


@dataclass(frozen=True)
class TransformTrace:
    steps: tuple = ()

    @property
    def reversals(self) -> int:
        return sum(1 for s in self.steps if s.kind == "reverse")

    @property
    def fill_ins(self) -> int:
        return sum(1 for s in self.steps if s.kind == "arc-added" and s.fill_in)

    def __add__(self, other: TransformTrace) -> TransformTrace:
        return TransformTrace(self.steps + other.steps)

    def __len__(self):
        return len(self.steps)

    def lines(self) -> list[str]:
        return [s.line() for s in self.steps]


@dataclass(frozen=True)
class ReversalFrame:
    """Parent-set split for reversing ``i -> j``.

    ``exclusive_i`` are parents of i only, ``exclusive_j`` parents of j only
    (i itself excluded), ``shared`` parents of both.
    """

    i: NodeId
    j: NodeId
    exclusive_i: tuple
    exclusive_j: tuple
    shared: tuple

    @classmethod
    def of(cls, d: BeliefDiagram, i: NodeId, j: NodeId) -> ReversalFrame:
        ci, cj = d.node(i).parents, d.node(j).parents
        return cls(
            i,
            j,
            exclusive_i=tuple(p for p in ci if p not in cj),
            exclusive_j=tuple(p for p in cj if p not in ci and p != i),
            shared=tuple(p for p in ci if p in cj),
        )

    @property
    def new_parents(self) -> frozenset:
        return frozenset(self.exclusive_i + self.exclusive_j + self.shared)


def _settle(values: np.ndarray) -> np.ndarray:
    top = values.max() if values.size else 0.0
    if not top > 0:
        raise ImpossibleEvidenceError("evidence has probability zero")
    return values / top


def absorb_evidence(d: BeliefDiagram, e: EvidenceAssertion) -> TransformTrace:
    """Instantiate ``e.node`` at ``e.outcome``.

    The node's table is sliced at the observed outcome and becomes a
    likelihood over its parents.  Every child's table is sliced at the
    observed value and the arc to it deleted.
    """
    j = e.node
    rec = d.node(j)
    if rec.observed:
        raise AlreadyObservedError(f"node {j!r} is already observed")
    if not 0 <= e.outcome < rec.cardinality:
        raise OutcomeOutOfRangeError(f"outcome {e.outcome} out of range for node {j!r}")

    own = _settle(rec.table.values[e.outcome])
    sliced = {}
    for k in d.children(j):
        kid = d.nodes[k]
        ax = kid.table.axes.index(j)
        values = _settle(np.take(kid.table.values, e.outcome, axis=ax))
        sliced[k] = PotentialTable(kid.table.axes[:ax] + kid.table.axes[ax + 1:], values)

    steps = [Step("absorb", j, label=rec.outcomes[e.outcome])]
    rec.table = PotentialTable(tuple(rec.parents), own)
    rec.evidence = e.outcome
    rec.absorbed = True
    for k, table in sliced.items():
        d.nodes[k].table = table
        d.nodes[k].parents.remove(j)
        steps.append(Step("arc-deleted", j, k))
    return TransformTrace(tuple(steps))


def absorb_all(d: BeliefDiagram, evidence: Iterable[EvidenceAssertion]) -> TransformTrace:
    trace = TransformTrace()
    for e in evidence:
        trace = trace + absorb_evidence(d, e)
    return trace


def evidence_reverse(d: BeliefDiagram, i: NodeId, j: NodeId) -> TransformTrace:
    """Reverse the arc from unobserved ``i`` into absorbed evidence node ``j``.

    Afterwards neither node points at the other and both are conditioned
    on the union of their former parents (minus ``i``).  The evidence
    node's new likelihood sums the product of the two tables over ``i``;
    ``i`` gets that product renormalized per parent configuration.
    """
    ri, rj = d.node(i), d.node(j)
    if not (rj.observed and rj.absorbed) or i not in rj.parents or ri.observed:
        raise NotAnEvidenceArcError(
            f"({i!r}, {j!r}) is not an arc from an unobserved node into an absorbed evidence node"
        )
    if has_directed_path(d, i, j, excluding_arc=(i, j)):
        raise PathExistsError(f"another directed path leads from {i!r} to {j!r}")

    frame = ReversalFrame.of(d, i, j)
    parents_i = list(ri.parents) + list(frame.exclusive_j)
    parents_j = [p for p in rj.parents if p != i] + list(frame.exclusive_i)

    label = {v: k for k, v in enumerate([i, *frame.new_parents])}
    product = np.einsum(
        ri.table.values,
        [label[v] for v in ri.table.axes],
        rj.table.values,
        [label[v] for v in rj.table.axes],
        [label[v] for v in (i, *parents_i)],
    )
    likelihood = np.einsum(
        product, [label[v] for v in (i, *parents_i)], [label[v] for v in parents_j]
    )
    likelihood = _settle(likelihood)

    mass = product.sum(axis=0)
    with np.errstate(invalid="ignore", divide="ignore"):
        conditional = np.where(mass > 0, product / mass, 1.0 / ri.cardinality)

    ri.table = PotentialTable((i, *parents_i), conditional / conditional.max())
    ri.parents = parents_i
    rj.table = PotentialTable(tuple(parents_j), likelihood)
    rj.parents = parents_j

    steps = [Step("reverse", i, j), Step("arc-deleted", i, j)]
    steps += [Step("arc-added", p, i, fill_in=True) for p in frame.exclusive_j]
    steps += [Step("arc-added", p, j) for p in frame.exclusive_i]
    return TransformTrace(tuple(steps))


def _check_ordering(d: BeliefDiagram, j: NodeId, ordering: Sequence[NodeId]) -> None:
    preds = d.ancestors(j)
    if len(ordering) != len(set(ordering)) or set(ordering) != preds:
        raise InvalidOrderingError(
            f"ordering {list(ordering)} is not a list of the predecessors {sorted(map(str, preds))}"
        )
    seen = set()
    for p in ordering:
        late = [q for q in d.ancestors(p) if q not in seen]
        if late:
            raise InvalidOrderingError(f"{p!r} precedes its predecessor(s) {late}")
        seen.add(p)


def propagate_evidence(
    d: BeliefDiagram,
    j: NodeId,
    ordering: Sequence[NodeId] | None = None,
    on_step: Callable[[TransformTrace], None] | None = None,
) -> TransformTrace:
    """Disconnect absorbed evidence node ``j`` by successive reversals.

    The predecessors of ``j`` are put in an ordered list (by default the
    insertion-index topological order) and reversed with ``j`` from the
    back of the list to the front.  ``on_step`` sees each reversal's trace.
    """
    rec = d.node(j)
    if not (rec.observed and rec.absorbed):
        raise NotAbsorbedError(f"node {j!r} has no absorbed evidence")
    if ordering is None:
        ordering = ordered_list(d, d.ancestors(j))
    else:
        ordering = list(ordering)
        _check_ordering(d, j, ordering)

    trace = TransformTrace()
    for p in reversed(ordering):
        if p in rec.parents:
            step = evidence_reverse(d, p, j)
            if on_step is not None:
                on_step(step)
            trace = trace + step
    return trace


def propagate_all_evidence(
    d: BeliefDiagram, on_step: Callable[[TransformTrace], None] | None = None
) -> TransformTrace:
    """Propagate every absorbed evidence node, last in graph order first."""
    order = ordered_list(d)
    for j in order:
        rec = d.nodes[j]
        if rec.observed and not rec.absorbed:
            raise NotAbsorbedError(f"evidence at {j!r} has not been absorbed")
    trace = TransformTrace()
    for j in reversed(order):
        if d.nodes[j].observed:
            trace = trace + propagate_evidence(d, j, on_step=on_step)
    return trace


def replay_arcs(initial: Iterable[tuple], trace: TransformTrace) -> list[set]:
    """Arc sets after each step of ``trace`` applied to ``initial``."""
    arcs = set(initial)
    history = []
    for s in trace.steps:
        if s.kind == "arc-added":
            arcs.add((s.a, s.b))
        elif s.kind == "arc-deleted":
            arcs.discard((s.a, s.b))
        history.append(set(arcs))
    return history
