"""Seeded random belief diagrams for tests, demos and the ``generate`` command."""

from __future__ import annotations

import numpy as np

from .model import BeliefDiagram, EvidenceAssertion, ordered_list

TOPOLOGIES = ("forest", "polytree", "dag")


def _structure(rng, topology, n, max_in_degree):
    parents = {k: [] for k in range(n)}
    if topology == "forest":
        for k in range(1, n):
            if rng.random() < 0.75:
                parents[k].append(int(rng.integers(k)))
    elif topology == "polytree":
        # random undirected forest, each edge oriented by a coin flip
        for k in range(1, n):
            if rng.random() < 0.85:
                other = int(rng.integers(k))
                a, b = (other, k) if rng.random() < 0.5 else (k, other)
                if len(parents[b]) < max_in_degree:
                    parents[b].append(a)
                elif len(parents[a]) < max_in_degree:
                    parents[a].append(b)
    else:
        for k in range(1, n):
            pool = [int(p) for p in rng.permutation(k)]
            for p in pool:
                if len(parents[k]) >= max_in_degree:
                    break
                if rng.random() < 0.4:
                    parents[k].append(p)
    return parents


def random_diagram(
    seed: int | np.random.Generator,
    topology: str = "dag",
    n_nodes: int = 6,
    max_outcomes: int = 3,
    max_in_degree: int | None = None,
    scale: bool = True,
) -> BeliefDiagram:
    """Random diagram with strictly positive, row-normalized tables.

    ``scale`` multiplies every table by a random positive constant, which
    leaves the represented joint unchanged.
    """
    if topology not in TOPOLOGIES:
        raise ValueError(f"topology must be one of {TOPOLOGIES}")
    if max_in_degree is None:
        max_in_degree = 1 if topology == "forest" else 3
    if topology == "forest" and max_in_degree > 1:
        raise ValueError("a forest cannot have in-degree above 1")
    if n_nodes < 0 or max_outcomes < 1 or max_in_degree < 0:
        raise ValueError("node count, outcome count and in-degree must be nonnegative")
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)

    parents = _structure(rng, topology, n_nodes, max_in_degree)
    cards = [int(rng.integers(2, max_outcomes + 1)) if max_outcomes > 1 else 1 for _ in range(n_nodes)]

    scratch = BeliefDiagram()
    for k in range(n_nodes):
        scratch.add_node(k, cards[k], [], table=np.ones(cards[k]))
        scratch.nodes[k].parents = parents[k]
    order = ordered_list(scratch)
    name = {k: f"X{pos}" for pos, k in enumerate(order)}

    d = BeliefDiagram()
    for k in order:
        shape = (cards[k], *[cards[p] for p in parents[k]])
        values = rng.random(shape) + 0.05
        values = values / values.sum(axis=0, keepdims=True)
        if scale:
            values = values * 10.0 ** rng.uniform(-1, 1)
        d.add_node(name[k], [f"s{o}" for o in range(cards[k])], [name[p] for p in parents[k]], values)
    return d


def random_evidence(
    d: BeliefDiagram, seed: int | np.random.Generator, count: int
) -> list[EvidenceAssertion]:
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    free = d.unobserved()
    count = min(count, len(free))
    picks = rng.choice(len(free), size=count, replace=False)
    return [
        EvidenceAssertion(free[int(k)], int(rng.integers(d.nodes[free[int(k)]].cardinality)))
        for k in sorted(picks)
    ]
