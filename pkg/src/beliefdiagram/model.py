"""Belief diagram data structure and topology queries.

A belief diagram is a DAG whose nodes carry discrete outcome spaces and
nonnegative potential tables that are meaningful only up to a positive
scalar.  The table of an unobserved node is laid out with the node's own
outcome axis first, followed by one axis per parent in parent-list order.
Once evidence at a node has been absorbed, its own axis is gone and the
table is a likelihood over the parent configurations.

Iteration order everywhere is node insertion order, which is also the tie
breaker for topological orderings.
"""

from __future__ import annotations

import copy
import enum
import heapq
from dataclasses import dataclass, field
from typing import Hashable, Iterable, Sequence

import numpy as np

from .errors import CycleError, UnknownNodeError

NodeId = Hashable

#: default cap on outcomes per node
MAX_OUTCOMES = 64

# relative tolerance for the constant-configuration-sum check
_ROW_SUM_RTOL = 1e-9


class TopologyClass(str, enum.Enum):
    FOREST = "forest"
    POLYTREE = "polytree-not-forest"
    MULTIPLY_CONNECTED = "multiply-connected"

    def __str__(self):
        return self.value


@dataclass
class PotentialTable:
    """Dense nonnegative table over an ordered tuple of node axes."""

    axes: tuple
    values: np.ndarray

    def __post_init__(self):
        self.axes = tuple(self.axes)
        self.values = np.asarray(self.values, dtype=float)

    @property
    def cardinalities(self) -> tuple[int, ...]:
        return tuple(self.values.shape)

    @property
    def entries(self) -> np.ndarray:
        """Row-major flattening of the table."""
        return self.values.reshape(-1)

    def copy(self) -> PotentialTable:
        return PotentialTable(self.axes, self.values.copy())

    def rescaled(self) -> PotentialTable:
        """Return the table scaled so that its largest entry is 1."""
        top = self.values.max() if self.values.size else 0.0
        if top <= 0:
            return self.copy()
        return PotentialTable(self.axes, self.values / top)


@dataclass
class NodeRecord:
    id: NodeId
    name: str
    outcomes: tuple[str, ...]
    parents: list
    table: PotentialTable
    evidence: int | None = None
    absorbed: bool = False

    @property
    def cardinality(self) -> int:
        return len(self.outcomes)

    @property
    def observed(self) -> bool:
        return self.evidence is not None

    @property
    def status(self) -> str:
        if self.evidence is None:
            return "unobserved"
        return "observed" + (" (absorbed)" if self.absorbed else "")


@dataclass(frozen=True)
class EvidenceAssertion:
    """Observation ``X_node = outcomes[outcome]``."""

    node: NodeId
    outcome: int


@dataclass(frozen=True)
class Diagnostic:
    node: NodeId | None
    code: str
    message: str

    def __str__(self):
        where = f"node {self.node}: " if self.node is not None else ""
        return f"{where}{self.code}: {self.message}"


@dataclass
class BeliefDiagram:
    """Mutable DAG of :class:`NodeRecord` keyed by node id."""

    nodes: dict = field(default_factory=dict)
    max_outcomes: int = MAX_OUTCOMES

    def add_node(
        self,
        node_id: NodeId,
        outcomes: Sequence[str] | int,
        parents: Iterable[NodeId] = (),
        table=None,
        name: str | None = None,
    ) -> NodeRecord:
        """Append a node.  ``table`` may be nested, shaped, or flat row-major.

        Parents need not exist yet; :func:`validate_diagram` reports dangling
        references.  Without a table the node gets a uniform conditional.
        """
        if node_id in self.nodes:
            raise ValueError(f"duplicate node id {node_id!r}")
        if isinstance(outcomes, int):
            outcomes = [str(k) for k in range(outcomes)]
        outcomes = tuple(str(o) for o in outcomes)
        parents = list(parents)
        shape = [len(outcomes)]
        for p in parents:
            shape.append(self.nodes[p].cardinality if p in self.nodes else None)
        if table is None:
            if None in shape:
                raise ValueError("a default table needs every parent declared first")
            values = np.ones(shape)
        else:
            values = np.asarray(table, dtype=float)
            if values.ndim == 1 and None not in shape and len(shape) != 1:
                if values.size == int(np.prod(shape)):
                    values = values.reshape(shape)
        record = NodeRecord(
            id=node_id,
            name=str(node_id) if name is None else name,
            outcomes=outcomes,
            parents=parents,
            table=PotentialTable((node_id, *parents), values),
        )
        self.nodes[node_id] = record
        return record

    def __contains__(self, node_id) -> bool:
        return node_id in self.nodes

    def __len__(self) -> int:
        return len(self.nodes)

    def __iter__(self):
        return iter(self.nodes)

    def node(self, node_id: NodeId) -> NodeRecord:
        try:
            return self.nodes[node_id]
        except KeyError:
            raise UnknownNodeError(f"unknown node {node_id!r}") from None

    def index(self, node_id: NodeId) -> int:
        for k, key in enumerate(self.nodes):
            if key == node_id:
                return k
        raise UnknownNodeError(f"unknown node {node_id!r}")

    def cardinality(self, node_id: NodeId) -> int:
        return self.node(node_id).cardinality

    def arcs(self) -> list[tuple]:
        """All arcs ``(parent, child)`` in child insertion order."""
        return [(p, j) for j, rec in self.nodes.items() for p in rec.parents]

    def children(self, node_id: NodeId) -> list:
        self.node(node_id)
        return [j for j, rec in self.nodes.items() if node_id in rec.parents]

    def ancestors(self, node_id: NodeId) -> set:
        """Indirect predecessors of a node (parents included)."""
        seen: set = set()
        stack = list(self.node(node_id).parents)
        while stack:
            p = stack.pop()
            if p in seen or p not in self.nodes:
                continue
            seen.add(p)
            stack.extend(self.nodes[p].parents)
        return seen

    def unobserved(self) -> list:
        return [j for j, rec in self.nodes.items() if not rec.observed]

    def evidence_nodes(self) -> list:
        return [j for j, rec in self.nodes.items() if rec.observed]

    def copy(self) -> BeliefDiagram:
        return copy.deepcopy(self)

    def subdiagram(self, keep: Iterable[NodeId]) -> BeliefDiagram:
        """Copy of the nodes in ``keep`` (closed under parents), in insertion order."""
        keep = set(keep)
        sub = BeliefDiagram(max_outcomes=self.max_outcomes)
        for j, rec in self.nodes.items():
            if j in keep:
                missing = [p for p in rec.parents if p not in keep]
                if missing:
                    raise ValueError(f"node {j!r} kept without parents {missing}")
                sub.nodes[j] = copy.deepcopy(rec)
        return sub


def _expected_axes(rec: NodeRecord) -> tuple:
    if rec.observed and rec.absorbed:
        return tuple(rec.parents)
    return (rec.id, *rec.parents)


def validate_diagram(d: BeliefDiagram) -> list[Diagnostic]:
    """Check every structural and numerical invariant; return diagnostics.

    An empty list means the diagram is valid.  Never raises and never
    mutates ``d``.
    """
    out: list[Diagnostic] = []
    for j, rec in d.nodes.items():
        if rec.cardinality < 1:
            out.append(Diagnostic(j, "empty-outcomes", "node has no outcomes"))
        if rec.cardinality > d.max_outcomes:
            out.append(
                Diagnostic(j, "too-many-outcomes", f"{rec.cardinality} > cap {d.max_outcomes}")
            )
        if len(set(rec.outcomes)) != len(rec.outcomes):
            out.append(Diagnostic(j, "duplicate-outcome", f"outcomes {list(rec.outcomes)}"))
        if len(set(rec.parents)) != len(rec.parents):
            out.append(Diagnostic(j, "duplicate-parent", f"parents {rec.parents}"))
        if j in rec.parents:
            out.append(Diagnostic(j, "self-parent", "node lists itself as a parent"))
        unknown = [p for p in rec.parents if p not in d.nodes]
        for p in unknown:
            out.append(Diagnostic(j, "unknown-parent", f"parent {p!r} does not exist"))
        if rec.observed and not 0 <= rec.evidence < max(rec.cardinality, 1):
            out.append(Diagnostic(j, "outcome-out-of-range", f"evidence index {rec.evidence}"))

        axes = _expected_axes(rec)
        if tuple(rec.table.axes) != axes:
            out.append(
                Diagnostic(j, "axis-mismatch", f"table axes {rec.table.axes} != {axes}")
            )
        if not unknown:
            shape = tuple(rec.cardinality if a == j else d.nodes[a].cardinality for a in axes)
            if rec.table.values.shape != shape:
                out.append(
                    Diagnostic(
                        j,
                        "dimension-mismatch",
                        f"table has {rec.table.values.size} entries with shape "
                        f"{rec.table.values.shape}; expected shape {shape} "
                        f"({int(np.prod(shape))} entries)",
                    )
                )
                continue
        values = rec.table.values
        if not np.all(np.isfinite(values)):
            out.append(Diagnostic(j, "non-finite", "table has NaN or infinite entries"))
            continue
        if np.any(values < 0):
            out.append(Diagnostic(j, "negative-entry", "table has negative entries"))
            continue
        if not rec.observed and values.ndim >= 1 and values.size:
            sums = values.sum(axis=0)
            if np.any(sums <= 0):
                out.append(
                    Diagnostic(j, "zero-slice", "some parent configuration has no positive entry")
                )
            elif not np.allclose(sums, sums.flat[0], rtol=_ROW_SUM_RTOL, atol=0):
                out.append(
                    Diagnostic(
                        j,
                        "row-sums",
                        "configuration sums differ, so the table is not a "
                        "conditional distribution up to one scalar",
                    )
                )

    try:
        ordered_list(d)
    except CycleError as exc:
        out.append(Diagnostic(None, "cycle", str(exc)))
    for j, rec in d.nodes.items():
        if rec.observed and rec.absorbed:
            kids = [k for k, r in d.nodes.items() if j in r.parents]
            if kids:
                out.append(
                    Diagnostic(j, "evidence-has-children", f"absorbed node has children {kids}")
                )
    return out


def ordered_list(d: BeliefDiagram, nodes: Iterable[NodeId] | None = None) -> list:
    """Topological order of ``d`` with ties broken by insertion index.

    With ``nodes`` given, only that subset is ordered (arcs between members
    are respected; outside nodes are ignored).
    """
    members = list(d.nodes) if nodes is None else [j for j in d.nodes if j in set(nodes)]
    pos = {j: k for k, j in enumerate(d.nodes)}
    member_set = set(members)
    indeg = {j: 0 for j in members}
    kids: dict = {j: [] for j in members}
    for j in members:
        for p in d.nodes[j].parents:
            if p in member_set:
                indeg[j] += 1
                kids[p].append(j)
    heap = [(pos[j], j) for j in members if indeg[j] == 0]
    heapq.heapify(heap)
    order = []
    while heap:
        _, j = heapq.heappop(heap)
        order.append(j)
        for k in kids[j]:
            indeg[k] -= 1
            if indeg[k] == 0:
                heapq.heappush(heap, (pos[k], k))
    if len(order) != len(members):
        stuck = [j for j in members if indeg[j] > 0]
        raise CycleError(f"directed cycle among nodes {stuck}")
    return order


def has_directed_path(
    d: BeliefDiagram, source: NodeId, target: NodeId, excluding_arc: tuple | None = None
) -> bool:
    """True iff a directed path ``source -> ... -> target`` exists.

    A single arc may be ignored via ``excluding_arc``.  A node reaches itself
    only through a cycle.
    """
    d.node(source)
    d.node(target)
    kids: dict = {j: [] for j in d.nodes}
    for p, j in d.arcs():
        if (p, j) != excluding_arc and p in kids:
            kids[p].append(j)
    seen = set()
    stack = list(kids[source])
    while stack:
        k = stack.pop()
        if k == target:
            return True
        if k in seen:
            continue
        seen.add(k)
        stack.extend(kids[k])
    return False


def classify_topology(d: BeliefDiagram) -> TopologyClass:
    """Forest, polytree (not a forest) or multiply-connected.

    Disconnected evidence nodes are isolated and never change the class.
    """
    forest = all(len(rec.parents) <= 1 for rec in d.nodes.values())
    root = {j: j for j in d.nodes}

    def find(x):
        while root[x] != x:
            root[x] = root[root[x]]
            x = root[x]
        return x

    for p, j in d.arcs():
        if p not in root:
            continue
        a, b = find(p), find(j)
        if a == b:
            return TopologyClass.MULTIPLY_CONNECTED
        root[a] = b
    return TopologyClass.FOREST if forest else TopologyClass.POLYTREE
