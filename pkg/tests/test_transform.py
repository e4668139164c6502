from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import posterior_joint_error
from beliefdiagram import samples
from beliefdiagram.errors import (
    AlreadyObservedError,
    ImpossibleEvidenceError,
    InvalidOrderingError,
    NotAbsorbedError,
    NotAnEvidenceArcError,
    OutcomeOutOfRangeError,
    PathExistsError,
)
from beliefdiagram.generate import random_diagram, random_evidence
from beliefdiagram.model import (
    BeliefDiagram,
    EvidenceAssertion,
    TopologyClass,
    classify_topology,
    ordered_list,
    validate_diagram,
)
from beliefdiagram.oracle import oracle_marginals
from beliefdiagram.transform import (
    absorb_all,
    absorb_evidence,
    evidence_reverse,
    propagate_all_evidence,
    propagate_evidence,
    replay_arcs,
)


def test_absorb_in_chain(chain):
    d = chain
    old3 = d.nodes[3].table.values.copy()
    old2 = d.nodes[2].table.values.copy()
    trace = absorb_evidence(d, EvidenceAssertion(2, 1))
    assert set(d.arcs()) == {(1, 2)}
    assert trace.lines() == ["ABSORB node=2 outcome=1", "ARC- 2->3"]
    # child keeps the conditional given the observed value, own table is a likelihood over 1
    np.testing.assert_allclose(d.nodes[3].table.values, old3[:, 1] / old3[:, 1].max())
    np.testing.assert_allclose(d.nodes[2].table.values, old2[1] / old2[1].max())
    assert d.nodes[2].table.axes == (1,)
    assert d.children(2) == []
    assert validate_diagram(d) == []


def test_absorb_isolated_node():
    d = BeliefDiagram()
    d.add_node("x", 3, table=[0.2, 0.5, 0.3])
    trace = absorb_evidence(d, EvidenceAssertion("x", 2))
    assert d.nodes["x"].table.values.shape == ()
    assert d.arcs() == [] and trace.lines() == ["ABSORB node=x outcome=2"]


@pytest.mark.parametrize("seed", range(10))
def test_absorb_two_children_preserves_posterior(seed):
    rng = np.random.default_rng(seed)
    d = BeliefDiagram()
    for k, parents in [(1, []), (2, [1]), (3, [2]), (4, [2])]:
        v = rng.random((2,) * (1 + len(parents)))
        d.add_node(k, 2, parents, v / v.sum(axis=0, keepdims=True))
    original = d.copy()
    e = EvidenceAssertion(2, int(rng.integers(2)))
    absorb_evidence(d, e)
    assert posterior_joint_error(d, original, [e]) <= 1e-12


def test_absorb_errors(chain):
    with pytest.raises(OutcomeOutOfRangeError):
        absorb_evidence(chain, EvidenceAssertion(1, 5))
    absorb_evidence(chain, EvidenceAssertion(1, 0))
    with pytest.raises(AlreadyObservedError):
        absorb_evidence(chain, EvidenceAssertion(1, 1))


def test_reverse_in_chain(chain):
    d = chain
    pi1 = d.nodes[1].table.values.copy()
    pi2 = d.nodes[2].table.values.copy()
    absorb_evidence(d, EvidenceAssertion(2, 0))
    trace = evidence_reverse(d, 1, 2)
    assert trace.lines() == ["REVERSE i=1 j=2", "ARC- 1->2"]
    assert d.arcs() == []
    expected = pi1 * pi2[0]
    got = d.nodes[1].table.values
    np.testing.assert_allclose(got / got.sum(), expected / expected.sum(), atol=1e-15)
    assert d.nodes[2].table.values.shape == ()


def test_reverse_bayes_pair():
    # oracle: brute-force Bayes over the two-outcome joint, in exact arithmetic
    prior = [Fraction(2, 10), Fraction(8, 10)]
    lik = [Fraction(7, 10), Fraction(3, 10)]
    joint = [p * l for p, l in zip(prior, lik)]
    evidence_mass = sum(joint)
    assert joint == [Fraction(14, 100), Fraction(24, 100)] and evidence_mass == Fraction(38, 100)
    posterior = [x / evidence_mass for x in joint]
    assert posterior == [Fraction(7, 19), Fraction(12, 19)]

    d = samples.bayes_pair()
    absorb_evidence(d, EvidenceAssertion(2, 0))
    # keep the unscaled likelihood so the summed value can be read off
    d.nodes[2].table.values = np.array([0.7, 0.3])
    evidence_reverse(d, 1, 2)
    got = d.nodes[1].table.values
    np.testing.assert_allclose(got / got.sum(), [float(x) for x in posterior], atol=1e-15)
    # the new likelihood is a constant; before rescaling it equalled the evidence mass
    pi1 = np.array([0.2, 0.8])
    assert float(np.dot(pi1, [0.7, 0.3])) == pytest.approx(0.38, abs=1e-15)
    assert d.nodes[2].table.values.shape == ()


def test_uninformative_evidence():
    d = samples.bayes_pair(likelihood=(1.0, 1.0))
    d.nodes[2].table.values = np.ones((2, 2))
    before = d.nodes[1].table.values.copy()
    absorb_evidence(d, EvidenceAssertion(2, 0))
    evidence_reverse(d, 1, 2)
    after = d.nodes[1].table.values
    np.testing.assert_allclose(after / after.sum(), before / before.sum())
    assert float(d.nodes[2].table.values) == 1.0
    assert d.arcs() == []


def test_reverse_preconditions():
    d = BeliefDiagram()
    d.add_node(1, 2)
    d.add_node(2, 2, [1])
    d.add_node(3, 2, [1, 2])
    with pytest.raises(NotAnEvidenceArcError):
        evidence_reverse(d, 1, 3)
    absorb_evidence(d, EvidenceAssertion(3, 0))
    with pytest.raises(PathExistsError):
        evidence_reverse(d, 1, 3)  # 1 -> 2 -> 3 remains
    evidence_reverse(d, 2, 3)
    evidence_reverse(d, 1, 3)
    assert d.nodes[3].parents == []


def test_small_forest_propagation_trace(small_forest):
    d = small_forest
    initial = set(d.arcs())
    trace = absorb_evidence(d, EvidenceAssertion(4, 1))
    trace = trace + propagate_evidence(d, 4)
    assert [s for s in trace.lines() if s.startswith("REVERSE")] == ["REVERSE i=2 j=4", "REVERSE i=1 j=4"]
    assert trace.reversals == 2 and trace.fill_ins == 0
    assert not any(s.startswith("ARC+") for s in trace.lines())
    assert classify_topology(d) is TopologyClass.FOREST
    assert d.nodes[4].parents == [] and d.children(4) == []
    assert d.nodes[4].table.values.shape == ()
    history = replay_arcs(initial, trace)
    assert history[-1] == set(d.arcs()) == {(1, 2), (1, 3)}
    # after the first reversal node 4 hangs off node 1 instead of node 2
    reverse_two = trace.lines().index("REVERSE i=2 j=4")
    assert history[reverse_two + 2] == {(1, 2), (1, 3), (1, 4)}


def test_converging_polytree_orderings(converging_polytree):
    original = converging_polytree
    e = EvidenceAssertion(6, 0)
    results = {}
    for order in ([1, 3, 2, 4, 5], [2, 4, 1, 3, 5]):
        d = original.copy()
        absorb_evidence(d, e)
        trace = propagate_evidence(d, 6, order)
        assert [l for l in trace.lines() if l.startswith("REVERSE")] == [
            f"REVERSE i={p} j=6" for p in reversed(order)
        ]
        assert trace.fill_ins > 0
        assert classify_topology(d) is TopologyClass.MULTIPLY_CONNECTED
        results[tuple(order)] = (set(d.arcs()), oracle_marginals(d))
    (arcs_e, marg_e), (arcs_f, marg_f) = results.values()
    assert arcs_e == {(1, 3), (2, 4), (3, 5), (4, 5), (3, 4), (3, 2)}
    assert arcs_f == {(1, 3), (2, 4), (3, 5), (4, 5), (4, 3), (4, 1)}
    for j in marg_e:
        assert np.max(np.abs(marg_e[j] - marg_f[j])) <= 1e-12


def test_invalid_ordering(converging_polytree):
    d = converging_polytree
    absorb_evidence(d, EvidenceAssertion(6, 0))
    with pytest.raises(InvalidOrderingError):
        propagate_evidence(d, 6, [3, 1, 2, 4, 5])
    with pytest.raises(InvalidOrderingError):
        propagate_evidence(d, 6, [1, 2, 3])
    with pytest.raises(NotAbsorbedError):
        propagate_evidence(d, 5)


def test_parentless_evidence_is_noop():
    d = samples.chain()
    absorb_evidence(d, EvidenceAssertion(1, 0))
    assert len(propagate_evidence(d, 1)) == 0
    assert d.nodes[1].parents == []


def test_no_evidence_identity(chain):
    before = chain.copy()
    assert len(propagate_all_evidence(chain)) == 0
    assert chain.arcs() == before.arcs()


def test_disjoint_trees_any_interleaving():
    rng = np.random.default_rng(3)
    d = BeliefDiagram()
    for k, parents in [(1, []), (2, [1]), (3, [2]), (4, []), (5, [4]), (6, [5])]:
        v = rng.random((2,) * (1 + len(parents)))
        d.add_node(k, 2, parents, v / v.sum(axis=0, keepdims=True))
    a, b = d.copy(), d.copy()
    absorb_all(a, [EvidenceAssertion(3, 0), EvidenceAssertion(6, 1)])
    propagate_evidence(a, 3)
    propagate_evidence(a, 6)
    absorb_all(b, [EvidenceAssertion(6, 1), EvidenceAssertion(3, 0)])
    propagate_evidence(b, 6)
    propagate_evidence(b, 3)
    assert set(a.arcs()) == set(b.arcs())
    for j in a:
        np.testing.assert_allclose(a.nodes[j].table.values, b.nodes[j].table.values, atol=1e-15)


def test_impossible_evidence():
    d = BeliefDiagram()
    d.add_node("a", 2, table=[1.0, 0.0])
    d.add_node("b", 2, ["a"], table=[[1.0, 0.0], [0.0, 1.0]])
    absorb_evidence(d, EvidenceAssertion("b", 1))
    with pytest.raises(ImpossibleEvidenceError):
        propagate_evidence(d, "b")
    d = BeliefDiagram()
    d.add_node("a", 2, table=[1.0, 0.0])
    with pytest.raises(ImpossibleEvidenceError):
        absorb_evidence(d, EvidenceAssertion("a", 1))


@pytest.mark.parametrize("seed", range(15))
def test_random_dag_two_observations(seed):
    d = random_diagram(seed, "dag", 6)
    evidence = random_evidence(d, seed, 2)
    truth = oracle_marginals(d, evidence)
    absorb_all(d, evidence)
    propagate_all_evidence(d)
    got = oracle_marginals(d)
    for j in truth:
        assert np.max(np.abs(got[j] - truth[j])) <= 1e-9


@settings(max_examples=80, deadline=None)
@given(seed=st.integers(0, 10**6), n=st.integers(1, 8), k=st.integers(1, 3))
def test_every_step_preserves_joint(seed, n, k):
    d = random_diagram(seed, "dag", n, 3)
    original = d.copy()
    evidence = random_evidence(d, seed + 1, k)
    absorbed = []
    for e in evidence:
        absorb_evidence(d, e)
        absorbed.append(e)
        assert posterior_joint_error(d, original, absorbed) <= 1e-9
        ordered_list(d)

    def check(step):
        assert posterior_joint_error(d, original, absorbed) <= 1e-9
        ordered_list(d)
        i, j = step.steps[0].a, step.steps[0].b
        assert d.nodes[i].table.axes == (i, *d.nodes[i].parents)
        assert set(d.nodes[i].parents) == set(d.nodes[j].parents)
        for t in (r.table.values for r in d.nodes.values()):
            assert np.all(np.isfinite(t)) and np.all(t >= 0)

    propagate_all_evidence(d, on_step=check)
    for e in evidence:
        assert d.nodes[e.node].table.values.shape == ()
        assert d.nodes[e.node].parents == [] and d.children(e.node) == []


@settings(max_examples=80, deadline=None)
@given(seed=st.integers(0, 10**6), n=st.integers(1, 9))
def test_forest_closure(seed, n):
    d = random_diagram(seed, "forest", n)
    (e,) = random_evidence(d, seed, 1)
    absorb_evidence(d, e)
    trace = propagate_evidence(d, e.node)
    assert trace.fill_ins == 0
    assert max((len(r.parents) for r in d.nodes.values()), default=0) <= 1
    assert classify_topology(d) is TopologyClass.FOREST


@settings(max_examples=60, deadline=None)
@given(seed=st.integers(0, 10**6), n=st.integers(2, 8))
def test_order_robustness(seed, n):
    d = random_diagram(seed, "dag", n)
    (e,) = random_evidence(d, seed, 1)
    absorb_evidence(d, e)
    preds = d.ancestors(e.node)
    first = ordered_list(d, preds)
    # a second ordered list: Kahn's algorithm with the opposite tie-break
    rest, second = set(preds), []
    while rest:
        ready = [p for p in rest if not (d.ancestors(p) & rest)]
        pick = max(ready, key=lambda p: d.index(p))
        second.append(pick)
        rest.remove(pick)
    a, b = d.copy(), d.copy()
    propagate_evidence(a, e.node, first)
    propagate_evidence(b, e.node, second)
    ma, mb = oracle_marginals(a), oracle_marginals(b)
    for j in ma:
        assert np.max(np.abs(ma[j] - mb[j])) <= 1e-12
