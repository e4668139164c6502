"""Small named diagrams used by the tests and demo scripts.

Node ids are the integers 1..n so the structures read the way they are
usually drawn.  Tables are random (seeded) unless stated otherwise.
"""

from __future__ import annotations

import numpy as np

from .model import BeliefDiagram

RAIN_GRASS = """\
node Rain : yes no
node Grass : wet dry
cpt Rain { [] : 0.2 0.8 ; }
cpt Grass | Rain { [yes] : 0.9 0.1 ; [no] : 0.2 0.8 ; }
evidence { Grass = wet ; }
"""


def _build(arcs: dict, n: int, seed: int, cards=None) -> BeliefDiagram:
    rng = np.random.default_rng(seed)
    cards = cards or {k: 2 for k in range(1, n + 1)}
    d = BeliefDiagram()
    for k in range(1, n + 1):
        parents = arcs.get(k, [])
        values = rng.random((cards[k], *[cards[p] for p in parents])) + 0.1
        d.add_node(k, cards[k], parents, values / values.sum(axis=0, keepdims=True))
    return d


def chain(seed: int = 0) -> BeliefDiagram:
    """1 -> 2 -> 3"""
    return _build({2: [1], 3: [2]}, 3, seed)


def small_forest(seed: int = 0) -> BeliefDiagram:
    """1 -> 2, 1 -> 3, 2 -> 4; node 4's predecessors are 1 then 2."""
    return _build({2: [1], 3: [1], 4: [2]}, 4, seed)


def converging_polytree(seed: int = 0) -> BeliefDiagram:
    """1 -> 3 -> 5 <- 4 <- 2, 5 -> 6.

    Propagating evidence at 6 adds arcs that close an undirected cycle
    whichever ordering of {1, ..., 5} is used.
    """
    return _build({3: [1], 4: [2], 5: [3, 4], 6: [5]}, 6, seed)


def sweep_polytree(seed: int = 0) -> BeliefDiagram:
    """Ten-node polytree whose marginal sweep takes three passes:
    {1, 2, 5}, then {3, 4, 10}, then {6, 7, 8, 9}."""
    arcs = {3: [1, 2], 4: [2], 6: [3], 7: [4], 9: [4], 10: [5], 8: [10]}
    return _build(arcs, 10, seed)


def deep_tree(seed: int = 0) -> BeliefDiagram:
    """Tree rooted at 1: 1 -> 2 -> 3 -> 4, 2 -> 5, 1 -> 6 -> 7."""
    return _build({2: [1], 3: [2], 4: [3], 5: [2], 6: [1], 7: [6]}, 7, seed)


def bayes_pair(prior=(0.2, 0.8), likelihood=(0.7, 0.3)) -> BeliefDiagram:
    """Binary 1 -> 2 with P(2 = t | 1) given by ``likelihood``."""
    d = BeliefDiagram()
    d.add_node(1, ["a", "b"], [], list(prior))
    t = np.asarray(likelihood, dtype=float)
    d.add_node(2, ["t", "f"], [1], np.stack([t, 1 - t]))
    return d
