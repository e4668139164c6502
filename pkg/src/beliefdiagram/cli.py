"""Command-line front end.

Exit status: 0 success, 1 domain error (bad network, impossible evidence,
wrong topology, oracle mismatch), 2 I/O or usage error.  Diagnostics go to
standard error only.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from .errors import BeliefDiagramError, ParseError
from .generate import TOPOLOGIES, random_diagram
from .marginals import posterior_marginals
from .model import classify_topology, validate_diagram
from .netio import export_dot, parse_evidence, read_network, write_network
from .oracle import oracle_marginals
from .scheduler import run_batch, run_message_passing, run_priority
from .transform import absorb_all, propagate_all_evidence, propagate_evidence

ORACLE_TOLERANCE = 1e-9


class _Failure(Exception):
    def __init__(self, status, message=""):
        super().__init__(message)
        self.status = status


def _read(path):
    try:
        with open(path, encoding="utf-8") as fh:
            return fh.read()
    except OSError as exc:
        raise _Failure(2, f"cannot read {path}: {exc.strerror or exc}") from None


def _write(path, text):
    try:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)
    except OSError as exc:
        raise _Failure(2, f"cannot write {path}: {exc.strerror or exc}") from None


def _load(args):
    """Parse the network, check it, and gather every evidence source."""
    d, evidence = read_network(_read(args.network))
    problems = validate_diagram(d)
    if problems:
        raise _Failure(1, "\n".join(str(p) for p in problems))
    if getattr(args, "evidence_file", None):
        evidence += parse_evidence(_read(args.evidence_file), d)
    for item in getattr(args, "evidence", None) or []:
        evidence += parse_evidence(item.replace("=", " = ", 1), d)
    seen = set()
    for e in evidence:
        if e.node in seen:
            raise _Failure(1, f"node {e.node} observed twice")
        seen.add(e.node)
    return d, evidence


def _run(args, d, evidence):
    if args.strategy == "message":
        return run_message_passing(d, evidence)
    if args.strategy == "priority":
        return run_priority(d, evidence)
    return run_batch(d, evidence, allow_fallback=args.allow_fallback)


def _trace_lines(args, d, evidence):
    """Step log plus summary line; transforms ``d`` in place."""
    if args.strategy in ("message", "priority"):
        report = _run(args, d, evidence)
        lines = [line for step in report.diagnostics["steps"] for line in step.lines()]
        summary = f"SUMMARY messages={report.diagnostics['messages']} topology={report.topology}"
        return lines + [summary]
    trace = absorb_all(d, evidence)
    if getattr(args, "ordering", None):
        if len(evidence) != 1:
            raise _Failure(2, "--ordering needs exactly one evidence assertion")
        order = [s.strip() for s in args.ordering.split(",") if s.strip()]
        trace = trace + propagate_evidence(d, evidence[0].node, order)
    trace = trace + propagate_all_evidence(d)
    summary = (
        f"SUMMARY reversals={trace.reversals} fill_in={trace.fill_ins} "
        f"topology={classify_topology(d)}"
    )
    return trace.lines() + [summary]


def cmd_validate(args):
    d, _ = read_network(_read(args.network))
    problems = validate_diagram(d)
    for p in problems:
        print(p, file=sys.stderr)
    return 1 if problems else 0


def cmd_query(args):
    d, evidence = _load(args)
    report = _run(args, d, evidence)
    status = 0
    comparison = None
    if args.oracle:
        reference = oracle_marginals(d, evidence)
        worst = max(
            (float(np.max(np.abs(report.marginals[j] - reference[j]))) for j in report.marginals),
            default=0.0,
        )
        ok = worst <= ORACLE_TOLERANCE
        comparison = {"linf": worst, "tolerance": ORACLE_TOLERANCE, "ok": ok}
        if not ok:
            status = 1
            print(f"oracle mismatch: L-inf {worst:.3e} > {ORACLE_TOLERANCE}", file=sys.stderr)
    if args.format == "json":
        body = report.to_dict()
        if comparison is not None:
            body = {"marginals": body, "oracle": comparison}
        sys.stdout.write(json.dumps(body, indent=2) + "\n")
    else:
        sys.stdout.write(report.to_tsv())
        if comparison is not None:
            verdict = "ok" if comparison["ok"] else "FAIL"
            sys.stdout.write(f"# oracle\tlinf={comparison['linf']:.3e}\t{verdict}\n")
    if args.trace:
        _write(args.trace, "\n".join(_trace_lines(args, d.copy(), evidence)) + "\n")
    if args.dot:
        posterior = d.copy()
        absorb_all(posterior, evidence)
        propagate_all_evidence(posterior)
        _write(args.dot, export_dot(posterior))
    return status


def cmd_trace(args):
    d, evidence = _load(args)
    text = "\n".join(_trace_lines(args, d, evidence)) + "\n"
    if args.trace:
        _write(args.trace, text)
    else:
        sys.stdout.write(text)
    return 0


def cmd_export(args):
    d, evidence = _load(args)
    if evidence:
        absorb_all(d, evidence)
        propagate_all_evidence(d)
    text = export_dot(d)
    if args.dot:
        _write(args.dot, text)
    else:
        sys.stdout.write(text)
    return 0


def cmd_generate(args):
    try:
        d = random_diagram(
            args.seed,
            topology=args.topology,
            n_nodes=args.nodes,
            max_outcomes=args.max_outcomes,
            max_in_degree=args.max_in_degree,
        )
    except ValueError as exc:
        raise _Failure(1, str(exc)) from None
    sys.stdout.write(write_network(d))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="beliefdiagram", description="Exact inference on belief diagrams by evidence reversal."
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def network_command(name, func, help_):
        p = sub.add_parser(name, help=help_)
        p.add_argument("network", help="network file")
        p.add_argument("--evidence-file", help="file of 'Node = outcome' lines")
        p.add_argument(
            "--evidence", action="append", metavar="NODE=OUTCOME", help="inline evidence (repeatable)"
        )
        p.add_argument("--strategy", choices=("batch", "message", "priority"), default="batch")
        p.add_argument("--allow-fallback", action="store_true", help="enumerate on multiply-connected posteriors")
        p.add_argument("--trace", metavar="PATH", help="write the step log here")
        p.add_argument("--dot", metavar="PATH", help="write a DOT drawing here")
        p.set_defaults(func=func)
        return p

    p = sub.add_parser("validate", help="parse and check a network")
    p.add_argument("network")
    p.set_defaults(func=cmd_validate)

    p = network_command("query", cmd_query, "posterior marginals")
    p.add_argument("--format", choices=("tsv", "json"), default="tsv")
    p.add_argument("--oracle", action="store_true", help="cross-check against enumeration")

    p = network_command("trace", cmd_trace, "log transform or message steps")
    p.add_argument("--ordering", help="comma-separated predecessor list for a single observation")

    network_command("export", cmd_export, "DOT drawing of the (posterior) diagram")

    p = sub.add_parser("generate", help="random network document")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--topology", choices=TOPOLOGIES, default="dag")
    p.add_argument("--nodes", type=int, default=6)
    p.add_argument("--max-outcomes", type=int, default=3)
    p.add_argument("--max-in-degree", type=int)
    p.set_defaults(func=cmd_generate)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except _Failure as exc:
        if str(exc):
            print(exc, file=sys.stderr)
        return exc.status
    except ParseError as exc:
        for diag in exc.diagnostics:
            print(diag, file=sys.stderr)
        return 1
    except BeliefDiagramError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
