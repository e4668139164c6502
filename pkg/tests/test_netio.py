import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from beliefdiagram import samples
from beliefdiagram.errors import ParseError
from beliefdiagram.generate import random_diagram
from beliefdiagram.model import EvidenceAssertion, validate_diagram
from beliefdiagram.netio import (
    build_diagram,
    export_dot,
    parse_evidence,
    parse_network,
    read_network,
    write_network,
)
from beliefdiagram.transform import absorb_evidence
from malformed_corpus import MALFORMED

RAIN = samples.RAIN_GRASS


def first_line(text):
    with pytest.raises(ParseError) as info:
        parse_network(text)
    return info.value.diagnostics[0]


def test_sample_document():
    doc = parse_network(RAIN)
    assert [n.name for n in doc.nodes] == ["Rain", "Grass"]
    d = build_diagram(doc)
    assert validate_diagram(d) == []
    np.testing.assert_allclose(d.nodes["Grass"].table.values, [[0.9, 0.2], [0.1, 0.8]])
    _, evidence = read_network(RAIN)
    assert evidence == [EvidenceAssertion("Grass", 0)]


def test_row_shape_diagnostic():
    text = "node A : a b\n\ncpt A {\n  [] : 0.1 0.2 0.7 ;\n}\n"
    diag = first_line(text)
    assert (diag.line, diag.code) == (4, "row-shape")


def test_duplicate_outcome():
    assert first_line("node X : a a\ncpt X { [] : 1 1 ; }\n").code == "duplicate-outcome"


def test_evidence_file():
    d, _ = read_network(RAIN)
    assert parse_evidence("Rain = yes\n", d) == [EvidenceAssertion("Rain", 0)]
    assert parse_evidence("", d) == []
    assert parse_evidence("# nothing\n\n", d) == []
    with pytest.raises(ParseError) as info:
        parse_evidence("Grass = wet\nRain = maybe\n", d)
    assert (info.value.diagnostics[0].line, info.value.diagnostics[0].code) == (2, "unknown-outcome")
    with pytest.raises(ParseError):
        parse_evidence("Rain = yes\nRain = no\n", d)
    with pytest.raises(ParseError):
        parse_evidence("Snow = yes\n", d)
    assert parse_evidence("Rain = no ;", parse_network(RAIN)) == [EvidenceAssertion("Rain", 1)]


def test_write_is_a_fixpoint():
    d, _ = read_network(RAIN)
    once = write_network(d)
    assert write_network(read_network(once)[0]) == once


def test_observed_annotation_round_trip():
    d, _ = read_network(RAIN)
    absorb_evidence(d, EvidenceAssertion("Grass", 0))
    text = write_network(d)
    assert "node Grass : wet dry [observed wet]" in text
    assert "[yes] : 1.0 ;" in text
    back, _ = read_network(text)
    assert back.nodes["Grass"].absorbed and back.nodes["Grass"].evidence == 0
    np.testing.assert_allclose(back.nodes["Grass"].table.values, d.nodes["Grass"].table.values)
    assert validate_diagram(back) == []


def test_pending_evidence_written_to_block():
    d, _ = read_network(RAIN)
    d.nodes["Grass"].evidence = 1
    assert write_network(d).endswith("evidence {\n  Grass = dry ;\n}\n")


def _rescaled(values):
    return values / values.max() if values.size and values.max() > 0 else values


def assert_same(a, b):
    assert [str(j) for j in a] == [str(j) for j in b]
    for ja, jb in zip(a, b):
        ra, rb = a.nodes[ja], b.nodes[jb]
        assert ra.outcomes == rb.outcomes
        assert [str(p) for p in ra.parents] == [str(p) for p in rb.parents]
        assert (ra.evidence, ra.absorbed) == (rb.evidence, rb.absorbed)
        err = np.max(np.abs(_rescaled(ra.table.values) - _rescaled(rb.table.values)), initial=0.0)
        assert err <= 1e-12


@settings(max_examples=100, deadline=None)
@given(seed=st.integers(0, 10**6), topology=st.sampled_from(["forest", "polytree", "dag"]))
def test_round_trip(seed, topology):
    d = random_diagram(seed, topology, 6)
    back, _ = read_network(write_network(d))
    assert_same(d, back)


def test_dot_export():
    d = samples.chain()
    assert sum("->" in line for line in export_dot(d).splitlines()) == 2
    absorb_evidence(d, EvidenceAssertion(2, 0))
    dot = export_dot(d)
    assert '"2" [label="2", style=filled, fillcolor=gray];' in dot
    assert '"2" -> "3"' not in dot and '"1" -> "2";' in dot
    from beliefdiagram.model import BeliefDiagram

    assert export_dot(BeliefDiagram()) == "digraph belief {\n}\n"




def test_corpus_size():
    assert len(MALFORMED) == 50


@pytest.mark.parametrize("text,line", MALFORMED)
def test_malformed_inputs_are_positioned(text, line):
    with pytest.raises(ParseError) as info:
        parse_network(text)
    diags = info.value.diagnostics
    assert diags and all(d.line >= 1 and d.column >= 1 for d in diags)
    assert diags[0].line == line


_ALPHABET = st.sampled_from(list("node cpt evidence AB ab : | { } [ ] ; = 0.5 1 -2 # \n x$"))


@settings(max_examples=500, deadline=None)
@given(st.lists(_ALPHABET, max_size=40).map("".join))
def test_parser_is_total(text):
    try:
        parse_network(text)
    except ParseError as exc:
        assert exc.diagnostics


@settings(max_examples=300, deadline=None)
@given(st.text(max_size=80))
def test_parser_is_total_on_arbitrary_text(text):
    try:
        parse_network(text)
    except ParseError as exc:
        assert exc.diagnostics
