"""Text format for belief diagrams, evidence files and DOT export.

Network grammar (``#`` comments run to end of line)::

    document   := { node-decl } { table-decl } [ evidence-block ]
    node-decl  := "node" IDENT ":" IDENT { IDENT } [ "[" "observed" IDENT "]" ]
    table-decl := "cpt" IDENT [ "|" IDENT { IDENT } ] "{" { row } "}"
    row        := "[" { IDENT } "]" ":" NUMBER { NUMBER } ";"
    evidence-block := "evidence" "{" { IDENT "=" IDENT ";" } "}"

Rows give the child's entries for one parent configuration (parent labels
in parent-list order, ``[]`` when parentless).  Entries are proportional,
so values above 1 are fine; negatives are not.  A node carrying the
``[observed x]`` annotation has absorbed evidence: its rows hold a single
likelihood value each.

Sample::

    node Rain : yes no
    node Grass : wet dry
    cpt Rain { [] : 0.2 0.8 ; }
    cpt Grass | Rain { [yes] : 0.9 0.1 ; [no] : 0.2 0.8 ; }
    evidence { Grass = wet ; }

Evidence files hold one ``Node = outcome`` per line.
"""

from __future__ import annotations

import itertools
import math
import re
from dataclasses import dataclass, field

import numpy as np

from .errors import ParseError
from .model import BeliefDiagram, EvidenceAssertion, PotentialTable

_TOKEN = re.compile(r"(?P<ws>\s+)|(?P<punct>[:|{}\[\];=])|(?P<word>[A-Za-z0-9_.+\-]+)")
_IDENT = re.compile(r"[A-Za-z0-9_][A-Za-z0-9_.\-]*\Z")


@dataclass(frozen=True)
class ParseDiagnostic:
    line: int
    column: int
    code: str
    message: str

    def __str__(self):
        return f"line {self.line}, column {self.column}: {self.code}: {self.message}"


@dataclass(frozen=True)
class Token:
    text: str
    line: int
    column: int
    kind: str  # "punct", "word" or "eof"


@dataclass
class NodeDecl:
    name: str
    outcomes: list
    observed: str | None
    line: int
    column: int


@dataclass
class Row:
    config: list
    numbers: list
    line: int
    column: int


@dataclass
class TableDecl:
    child: str
    parents: list
    rows: list
    line: int
    column: int


@dataclass
class EvidenceDecl:
    node: str
    outcome: str
    line: int
    column: int


@dataclass
class NetworkDocument:
    nodes: list = field(default_factory=list)
    tables: list = field(default_factory=list)
    evidence: list = field(default_factory=list)

    def node(self, name) -> NodeDecl | None:
        for n in self.nodes:
            if n.name == name:
                return n
        return None


def _tokenize(text: str) -> list[Token]:
    tokens = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0]
        pos = 0
        while pos < len(line):
            m = _TOKEN.match(line, pos)
            if m is None:
                raise ParseError(
                    [ParseDiagnostic(lineno, pos + 1, "lex", f"unexpected character {line[pos]!r}")]
                )
            if m.lastgroup != "ws":
                tokens.append(Token(m.group(), lineno, pos + 1, m.lastgroup))
            pos = m.end()
    last = len(text.splitlines()) or 1
    tokens.append(Token("", last + 1 if text.endswith("\n") else last, 1, "eof"))
    return tokens


class _Parser:
    def __init__(self, tokens):
        self.tokens = tokens
        self.pos = 0

    @property
    def tok(self) -> Token:
        return self.tokens[self.pos]

    def fail(self, expected: str):
        t = self.tok
        found = "end of input" if t.kind == "eof" else repr(t.text)
        raise ParseError([ParseDiagnostic(t.line, t.column, "syntax", f"expected {expected}, found {found}")])

    def at(self, text: str) -> bool:
        return self.tok.kind != "eof" and self.tok.text == text

    def expect(self, text: str) -> Token:
        if not self.at(text):
            self.fail(repr(text))
        t = self.tok
        self.pos += 1
        return t

    def ident(self, what: str = "identifier") -> Token:
        t = self.tok
        if t.kind != "word" or not _IDENT.match(t.text):
            self.fail(what)
        self.pos += 1
        return t

    def at_ident(self) -> bool:
        return self.tok.kind == "word" and bool(_IDENT.match(self.tok.text))

    def number(self) -> tuple[float, Token]:
        t = self.tok
        if t.kind != "word":
            self.fail("number")
        try:
            value = float(t.text)
        except ValueError:
            self.fail("number")
        self.pos += 1
        return value, t


_KEYWORDS = {"node", "cpt", "evidence"}


def _parse_tokens(tokens) -> NetworkDocument:
    p = _Parser(tokens)
    doc = NetworkDocument()
    while p.at("node"):
        start = p.expect("node")
        name = p.ident("node name").text
        p.expect(":")
        outcomes = [p.ident("outcome label").text]
        while p.at_ident() and p.tok.text not in _KEYWORDS:
            outcomes.append(p.ident().text)
        observed = None
        if p.at("["):
            p.expect("[")
            p.expect("observed")
            observed = p.ident("observed outcome").text
            p.expect("]")
        doc.nodes.append(NodeDecl(name, outcomes, observed, start.line, start.column))
    while p.at("cpt"):
        start = p.expect("cpt")
        child = p.ident("node name").text
        parents = []
        if p.at("|"):
            p.expect("|")
            parents.append(p.ident("parent name").text)
            while p.at_ident():
                parents.append(p.ident().text)
        p.expect("{")
        rows = []
        while p.at("["):
            open_ = p.expect("[")
            config = []
            while p.at_ident():
                config.append(p.ident().text)
            p.expect("]")
            p.expect(":")
            numbers = [p.number()]
            while not p.at(";"):
                numbers.append(p.number())
            p.expect(";")
            rows.append(Row(config, numbers, open_.line, open_.column))
        p.expect("}")
        doc.tables.append(TableDecl(child, parents, rows, start.line, start.column))
    if p.at("evidence"):
        p.expect("evidence")
        p.expect("{")
        while p.at_ident():
            node = p.ident()
            p.expect("=")
            outcome = p.ident("outcome label")
            p.expect(";")
            doc.evidence.append(EvidenceDecl(node.text, outcome.text, node.line, node.column))
        p.expect("}")
    if p.tok.kind != "eof":
        p.fail("'node', 'cpt', 'evidence' or end of input")
    return doc


def _check(doc: NetworkDocument) -> list[ParseDiagnostic]:
    out = []
    nodes = {}
    for n in doc.nodes:
        if n.name in nodes:
            out.append(ParseDiagnostic(n.line, n.column, "duplicate-node", f"node {n.name} declared twice"))
            continue
        nodes[n.name] = n
        if len(set(n.outcomes)) != len(n.outcomes):
            out.append(
                ParseDiagnostic(n.line, n.column, "duplicate-outcome", f"node {n.name} repeats an outcome label")
            )
        if n.observed is not None and n.observed not in n.outcomes:
            out.append(
                ParseDiagnostic(n.line, n.column, "unknown-outcome", f"observed outcome {n.observed} not in {n.name}")
            )

    tabled = set()
    for t in doc.tables:
        if t.child not in nodes:
            out.append(ParseDiagnostic(t.line, t.column, "unknown-node", f"table for undeclared node {t.child}"))
            continue
        if t.child in tabled:
            out.append(ParseDiagnostic(t.line, t.column, "duplicate-table", f"second table for {t.child}"))
            continue
        tabled.add(t.child)
        bad_parent = False
        for q in t.parents:
            if q not in nodes:
                out.append(ParseDiagnostic(t.line, t.column, "unknown-parent", f"parent {q} is not declared"))
                bad_parent = True
            elif q == t.child:
                out.append(ParseDiagnostic(t.line, t.column, "self-parent", f"{q} conditions on itself"))
                bad_parent = True
        if len(set(t.parents)) != len(t.parents):
            out.append(ParseDiagnostic(t.line, t.column, "duplicate-parent", f"{t.child} repeats a parent"))
            bad_parent = True
        if bad_parent:
            continue
        width = 1 if nodes[t.child].observed is not None else len(nodes[t.child].outcomes)
        seen = set()
        for r in t.rows:
            if len(r.config) != len(t.parents):
                out.append(
                    ParseDiagnostic(
                        r.line,
                        r.column,
                        "row-shape",
                        f"row names {len(r.config)} parent outcomes, expected {len(t.parents)}",
                    )
                )
                continue
            unknown = [lab for lab, q in zip(r.config, t.parents) if lab not in nodes[q].outcomes]
            if unknown:
                out.append(ParseDiagnostic(r.line, r.column, "unknown-outcome", f"unknown parent outcome {unknown[0]}"))
                continue
            if tuple(r.config) in seen:
                out.append(ParseDiagnostic(r.line, r.column, "duplicate-row", f"configuration {r.config} repeated"))
                continue
            seen.add(tuple(r.config))
            if len(r.numbers) != width:
                out.append(
                    ParseDiagnostic(r.line, r.column, "row-shape", f"row has {len(r.numbers)} entries, expected {width}")
                )
            for value, tok in r.numbers:
                if not math.isfinite(value):
                    out.append(ParseDiagnostic(tok.line, tok.column, "bad-number", f"{tok.text} is not finite"))
                elif value < 0:
                    out.append(ParseDiagnostic(tok.line, tok.column, "negative-entry", f"{tok.text} is negative"))
        expected = math.prod(len(nodes[q].outcomes) for q in t.parents)
        if len(seen) < expected and len(seen) == len(t.rows):
            out.append(
                ParseDiagnostic(t.line, t.column, "row-count", f"{len(seen)} rows, expected {expected}")
            )
    for n in doc.nodes:
        if n.name in nodes and nodes[n.name] is n and n.name not in tabled:
            out.append(ParseDiagnostic(n.line, n.column, "missing-table", f"no table for {n.name}"))

    evidenced = set()
    for e in doc.evidence:
        out += _check_assertion(nodes, e, evidenced)
    return out


def _check_assertion(nodes: dict, e: EvidenceDecl, seen: set) -> list[ParseDiagnostic]:
    if e.node not in nodes:
        return [ParseDiagnostic(e.line, e.column, "unknown-node", f"evidence for undeclared node {e.node}")]
    if e.outcome not in nodes[e.node].outcomes:
        return [ParseDiagnostic(e.line, e.column, "unknown-outcome", f"{e.node} has no outcome {e.outcome}")]
    if e.node in seen or nodes[e.node].observed is not None:
        return [ParseDiagnostic(e.line, e.column, "duplicate-evidence", f"{e.node} observed twice")]
    seen.add(e.node)
    return []


def parse_network(text: str) -> NetworkDocument:
    """Parse and check a network document; raise :class:`ParseError` on failure."""
    try:
        doc = _parse_tokens(_tokenize(text))
    except RecursionError:  # pragma: no cover - grammar is not recursive
        raise ParseError([ParseDiagnostic(1, 1, "syntax", "input too deeply nested")])
    problems = _check(doc)
    if problems:
        raise ParseError(sorted(problems, key=lambda d: (d.line, d.column)))
    return doc


def build_diagram(doc: NetworkDocument) -> BeliefDiagram:
    """Diagram from a checked document; node ids are the declared names."""
    tables = {t.child: t for t in doc.tables}
    decls = {n.name: n for n in doc.nodes}
    d = BeliefDiagram()
    for n in doc.nodes:
        t = tables[n.name]
        cards = [len(decls[q].outcomes) for q in t.parents]
        width = 1 if n.observed is not None else len(n.outcomes)
        values = np.zeros((width, *cards))
        for r in t.rows:
            index = tuple(decls[q].outcomes.index(lab) for q, lab in zip(t.parents, r.config))
            values[(slice(None), *index)] = [v for v, _ in r.numbers]
        rec = d.add_node(n.name, n.outcomes, t.parents, table=values)
        if n.observed is not None:
            rec.evidence = n.outcomes.index(n.observed)
            rec.absorbed = True
            rec.table = PotentialTable(tuple(t.parents), values[0])
    return d


def document_evidence(doc: NetworkDocument) -> list[EvidenceAssertion]:
    decls = {n.name: n for n in doc.nodes}
    return [EvidenceAssertion(e.node, decls[e.node].outcomes.index(e.outcome)) for e in doc.evidence]


def read_network(text: str) -> tuple[BeliefDiagram, list[EvidenceAssertion]]:
    doc = parse_network(text)
    return build_diagram(doc), document_evidence(doc)


def parse_evidence(text: str, network) -> list[EvidenceAssertion]:
    """Assertions from an evidence file, resolved against a diagram or document.

    Each non-blank line is ``Node = outcome`` with an optional trailing ``;``.
    """
    if isinstance(network, NetworkDocument):
        nodes = {n.name: n for n in network.nodes}
        index = {n.name: n.name for n in network.nodes}
    else:
        nodes = {}
        index = {}
        for j, rec in network.nodes.items():
            nodes[str(j)] = NodeDecl(str(j), list(rec.outcomes), None, 0, 0)
            index[str(j)] = j
            if rec.observed:
                nodes[str(j)].observed = rec.outcomes[rec.evidence]
    problems = []
    decls = []
    tokens = _tokenize(text)
    by_line: dict = {}
    for t in tokens:
        if t.kind != "eof":
            by_line.setdefault(t.line, []).append(t)
    for line, toks in by_line.items():
        texts = [t.text for t in toks]
        if texts and texts[-1] == ";":
            toks = toks[:-1]
            texts = texts[:-1]
        if (
            len(toks) != 3
            or texts[1] != "="
            or not _IDENT.match(texts[0])
            or not _IDENT.match(texts[2])
        ):
            problems.append(ParseDiagnostic(line, toks[0].column, "syntax", "expected 'Node = outcome'"))
            continue
        decls.append(EvidenceDecl(texts[0], texts[2], line, toks[0].column))
    seen: set = set()
    for e in decls:
        problems += _check_assertion(nodes, e, seen)
    if problems:
        raise ParseError(sorted(problems, key=lambda d: (d.line, d.column)))
    return [EvidenceAssertion(index[e.node], nodes[e.node].outcomes.index(e.outcome)) for e in decls]


def _num(x: float) -> str:
    return repr(float(x))


def write_network(d: BeliefDiagram) -> str:
    """Canonical text for ``d``; unabsorbed observations go to the evidence block."""
    out = []
    for j, rec in d.nodes.items():
        line = f"node {j} : {' '.join(rec.outcomes)}"
        if rec.observed and rec.absorbed:
            line += f" [observed {rec.outcomes[rec.evidence]}]"
        out.append(line)
    for j, rec in d.nodes.items():
        head = f"cpt {j}" + (f" | {' '.join(map(str, rec.parents))}" if rec.parents else "")
        out.append(head + " {")
        labels = [d.nodes[p].outcomes for p in rec.parents]
        absorbed = rec.observed and rec.absorbed
        for index, config in zip(
            itertools.product(*[range(len(ls)) for ls in labels]), itertools.product(*labels)
        ):
            if absorbed:
                numbers = [rec.table.values[index]]
            else:
                numbers = rec.table.values[(slice(None), *index)]
            out.append(f"  [{' '.join(config)}] : {' '.join(_num(x) for x in numbers)} ;")
        out.append("}")
    pending = [(j, rec) for j, rec in d.nodes.items() if rec.observed and not rec.absorbed]
    if pending:
        out.append("evidence {")
        out += [f"  {j} = {rec.outcomes[rec.evidence]} ;" for j, rec in pending]
        out.append("}")
    return "\n".join(out) + "\n"


def _quote(name) -> str:
    return '"' + str(name).replace("\\", "\\\\").replace('"', '\\"') + '"'


def export_dot(d: BeliefDiagram) -> str:
    """Graphviz digraph; evidence nodes are drawn filled."""
    out = ["digraph belief {"]
    for j, rec in d.nodes.items():
        attrs = f"label={_quote(rec.name)}"
        if rec.observed:
            attrs += ", style=filled, fillcolor=gray"
        out.append(f"  {_quote(j)} [{attrs}];")
    for p, j in d.arcs():
        out.append(f"  {_quote(p)} -> {_quote(j)};")
    out.append("}")
    return "\n".join(out) + "\n"
