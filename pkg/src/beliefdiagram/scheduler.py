"""Control strategies: batch processing and prioritized message passing.

Batch processing absorbs all evidence, propagates it by reversals and
then sweeps the posterior diagram for marginals.

Message passing keeps the topology of a forest fixed.  Absorbing evidence
at a node sends its likelihood upward to the parent instead of storing it
behind an arc; the parent folds the likelihood into its own conditional
and forwards the marginalized remainder to its parent.  Whenever a node
without parents changes, or a node receives a new marginal from its
parent, it posts a fresh marginal to its children.

One queue serves both message kinds, ordered by these rules:

1. pending evidence is absorbed first;
2. messages from below (likelihoods) go before messages from above;
3. a pending message from above is replaced by a later one on the same arc;
4. messages from above are taken in graph order of their target.

Feeding all evidence at once gives batch processing; feeding it one
observation at a time gives classic message passing.
"""

from __future__ import annotations

import logging
from collections import deque
from dataclasses import dataclass, field
from typing import Iterable

import numpy as np

from .errors import EmptyQueueError, ImpossibleEvidenceError, NotAForestError
from .marginals import PosteriorReport, posterior_marginals
from .model import (
    BeliefDiagram,
    EvidenceAssertion,
    NodeId,
    PotentialTable,
    TopologyClass,
    classify_topology,
    ordered_list,
)
from .transform import Step, TransformTrace, absorb_all, absorb_evidence, propagate_all_evidence

log = logging.getLogger(__name__)

LIKELIHOOD = "likelihood"
MARGINAL = "marginal"


@dataclass(frozen=True)
class PropagationMessage:
    """Upward likelihood over the target's outcomes, or downward marginal
    over the origin's outcomes."""

    kind: str
    target: NodeId
    origin: NodeId
    payload: np.ndarray
    sequence: int


@dataclass
class StepRecord:
    kind: str  # "evidence", LIKELIHOOD or MARGINAL
    origin: NodeId | None
    target: NodeId
    sequence: int
    emitted: list = field(default_factory=list)
    trace: TransformTrace | None = None
    discarded: bool = False

    def lines(self) -> list[str]:
        if self.kind == "evidence":
            return self.trace.lines() if self.trace is not None else []
        line = f"MSG kind={self.kind} from={self.origin} to={self.target}"
        return [line + (" discarded" if self.discarded else "")]


def _normalize(vec: np.ndarray) -> np.ndarray:
    total = vec.sum()
    if not total > 0:
        raise ImpossibleEvidenceError("evidence has probability zero")
    return vec / total


def _settle(values: np.ndarray) -> np.ndarray:
    top = values.max() if values.size else 0.0
    if not top > 0:
        raise ImpossibleEvidenceError("evidence has probability zero")
    return values / top


class PriorityQueueState:
    """Pending work plus the current marginal held at every node."""

    def __init__(self, d: BeliefDiagram):
        self.position = {j: k for k, j in enumerate(ordered_list(d))}
        self.evidence: deque = deque()
        self.upward: deque = deque()
        self.downward: dict = {}
        self.beliefs: dict = {}
        self._sequence = 0

    def __len__(self):
        return len(self.evidence) + len(self.upward) + len(self.downward)

    def _next(self) -> int:
        self._sequence += 1
        return self._sequence

    def post_evidence(self, e: EvidenceAssertion) -> None:
        self.evidence.append(e)

    def send_up(self, origin, target, likelihood) -> PropagationMessage:
        msg = PropagationMessage(LIKELIHOOD, target, origin, likelihood, self._next())
        self.upward.append(msg)
        return msg

    def send_down(self, origin, target, marginal) -> PropagationMessage:
        msg = PropagationMessage(MARGINAL, target, origin, marginal, self._next())
        self.downward[(origin, target)] = msg
        return msg

    def pop_downward(self) -> PropagationMessage:
        key = min(
            self.downward,
            key=lambda k: (
                self.position[k[1]],
                self.position[k[0]],
                self.downward[k].sequence,
            ),
        )
        return self.downward.pop(key)


def _post_marginal(q: PriorityQueueState, d: BeliefDiagram, j, belief) -> list:
    q.beliefs[j] = belief
    return [q.send_down(j, k, belief) for k in d.children(j)]


def _absorb(q: PriorityQueueState, d: BeliefDiagram, e: EvidenceAssertion) -> StepRecord:
    j = e.node
    rec = d.node(j)
    parents = list(rec.parents)
    kids = d.children(j)
    if kids:
        log.info("observed node %s disconnects children %s", j, kids)
    trace = absorb_evidence(d, e)
    step = StepRecord("evidence", None, j, q._next(), trace=trace)
    q.beliefs.pop(j, None)
    if parents:
        (i,) = parents
        likelihood = rec.table.values
        rec.parents = []
        rec.table = PotentialTable((), np.ones(()))
        step.trace = trace + TransformTrace((Step("arc-deleted", i, j),))
        step.emitted.append(q.send_up(j, i, likelihood))
    for k in kids:
        kid = d.nodes[k]
        if not kid.observed:
            step.emitted += _post_marginal(q, d, k, _normalize(kid.table.values))
    return step


def _receive_likelihood(q: PriorityQueueState, d: BeliefDiagram, msg) -> StepRecord:
    step = StepRecord(LIKELIHOOD, msg.origin, msg.target, msg.sequence)
    rec = d.nodes[msg.target]
    if rec.observed:
        step.discarded = True
        return step
    shape = (-1,) + (1,) * len(rec.parents)
    product = rec.table.values * msg.payload.reshape(shape)
    if rec.parents:
        (p,) = rec.parents
        mass = product.sum(axis=0)
        with np.errstate(invalid="ignore", divide="ignore"):
            conditional = np.where(mass > 0, product / mass, 1.0 / rec.cardinality)
        rec.table = PotentialTable(rec.table.axes, conditional / conditional.max())
        step.emitted.append(q.send_up(msg.target, p, _settle(mass)))
    else:
        rec.table = PotentialTable(rec.table.axes, _settle(product))
        step.emitted += _post_marginal(q, d, msg.target, _normalize(rec.table.values))
    return step


def _receive_marginal(q: PriorityQueueState, d: BeliefDiagram, msg) -> StepRecord:
    step = StepRecord(MARGINAL, msg.origin, msg.target, msg.sequence)
    rec = d.nodes[msg.target]
    if rec.observed or msg.origin not in rec.parents:
        step.discarded = True
        return step
    values = rec.table.values
    conditional = values / values.sum(axis=0, keepdims=True)
    belief = _normalize(conditional @ msg.payload)
    step.emitted += _post_marginal(q, d, msg.target, belief)
    return step


def scheduler_step(q: PriorityQueueState, d: BeliefDiagram) -> StepRecord:
    """Take the highest-priority pending item, apply it, queue its successors."""
    if q.evidence:
        return _absorb(q, d, q.evidence.popleft())
    if q.upward:
        return _receive_likelihood(q, d, q.upward.popleft())
    if q.downward:
        return _receive_marginal(q, d, q.pop_downward())
    raise EmptyQueueError("nothing pending")


def drain(q: PriorityQueueState, d: BeliefDiagram) -> list[StepRecord]:
    steps = []
    while len(q):
        steps.append(scheduler_step(q, d))
    return steps


def prime(d: BeliefDiagram) -> PriorityQueueState:
    """Queue state with the prior marginals posted at every node.

    The roots post their tables and the resulting downward wave is drained
    here, so later step logs hold only evidence-driven messages.
    """
    if classify_topology(d) is not TopologyClass.FOREST:
        raise NotAForestError("message passing requires a forest")
    q = PriorityQueueState(d)
    for j, rec in d.nodes.items():
        if not rec.observed and not rec.parents:
            _post_marginal(q, d, j, _normalize(rec.table.values))
    drain(q, d)
    return q


def _message_report(d: BeliefDiagram, q: PriorityQueueState, steps) -> PosteriorReport:
    messages = [s for s in steps if s.kind != "evidence"]
    return PosteriorReport(
        marginals={j: q.beliefs[j] for j in d.unobserved()},
        method="propagation",
        topology=classify_topology(d),
        outcomes={j: d.nodes[j].outcomes for j in d.unobserved()},
        diagnostics={
            "steps": steps,
            "messages": len(messages),
            "upward": sum(1 for s in messages if s.kind == LIKELIHOOD),
            "downward": sum(1 for s in messages if s.kind == MARGINAL),
        },
    )


def run_message_passing(
    d: BeliefDiagram, evidence: Iterable[EvidenceAssertion], *, copy: bool = True
) -> PosteriorReport:
    """Process observations one at a time, draining the queue after each."""
    if copy:
        d = d.copy()
    q = prime(d)
    steps = []
    for e in evidence:
        q.post_evidence(e)
        steps += drain(q, d)
    return _message_report(d, q, steps)


def run_priority(
    d: BeliefDiagram, evidence: Iterable[EvidenceAssertion], *, copy: bool = True
) -> PosteriorReport:
    """Post all observations at once and drain the queue."""
    if copy:
        d = d.copy()
    q = prime(d)
    for e in evidence:
        q.post_evidence(e)
    return _message_report(d, q, drain(q, d))


def run_batch(
    d: BeliefDiagram,
    evidence: Iterable[EvidenceAssertion],
    *,
    allow_fallback: bool = False,
    copy: bool = True,
) -> PosteriorReport:
    """Absorb everything, propagate by reversals, then compute marginals."""
    if copy:
        d = d.copy()
    trace = absorb_all(d, evidence)
    trace = trace + propagate_all_evidence(d)
    report = posterior_marginals(d, allow_fallback=allow_fallback)
    report.diagnostics.update(
        trace=trace, reversals=trace.reversals, fill_ins=trace.fill_ins
    )
    return report
