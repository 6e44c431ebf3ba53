"""Command line front end: compile, validate, simulate, explain.

Diagnostics go to standard error, artifacts to standard output. Exit codes:
0 success, 1 validation errors (or warnings under --strict), 2 usage or
parse errors, 3 I/O errors.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .arbiter import ACCEPT, CONSTRAINT_FALSE, DEFAULT_WINDOW_MS, NO_RULE
from .compiler import check_conflicts, emit_rules, extract_rules
from .model import (
    And,
    Lit,
    Not,
    ParseError,
    apply_auto_observe,
    evaluate_condition,
    has_errors,
    parse_behavior_model,
    parse_condition,
    parse_network,
    render_condition,
    validate,
)
from .simnet import read_trace, run, load_scenario, write_trace

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_USAGE = 2
EXIT_IO = 3


def _print_diagnostics(diagnostics) -> None:
    for diag in diagnostics:
        location = f" {diag.location}:" if diag.location else ""
        print(f"{diag.severity}: [{diag.code}]{location} {diag.message}", file=sys.stderr)


def _load_model_and_network(args):
    model = parse_behavior_model(Path(args.model).read_text(encoding="utf-8"))
    network = parse_network(Path(args.network).read_text(encoding="utf-8"))
    return model, network


def _pipeline(args, auto_observe: bool):
    """parse -> validate -> extract -> conflict-check; returns
    (diagnostics, ruleset, effective network)."""
    model, network = _load_model_and_network(args)
    diagnostics = validate(model, network, auto_observe=auto_observe)
    ruleset = None
    if not has_errors(diagnostics):
        if auto_observe:
            network = apply_auto_observe(model, network)
        ruleset = extract_rules(model, network)
        diagnostics = diagnostics + check_conflicts(ruleset)
    return diagnostics, ruleset, network


def _status(diagnostics, strict: bool) -> int:
    if has_errors(diagnostics):
        return EXIT_VALIDATION
    if strict and diagnostics:
        return EXIT_VALIDATION
    return EXIT_OK


def cmd_compile(args) -> int:
    diagnostics, ruleset, _ = _pipeline(args, args.auto_observe)
    _print_diagnostics(diagnostics)
    if has_errors(diagnostics):
        return EXIT_VALIDATION
    output = emit_rules(ruleset, args.format)
    if args.out:
        Path(args.out).write_text(output, encoding="utf-8")
    else:
        sys.stdout.write(output)
    return _status(diagnostics, args.strict)


def cmd_validate(args) -> int:
    diagnostics, _, _ = _pipeline(args, args.auto_observe)
    _print_diagnostics(diagnostics)
    return _status(diagnostics, args.strict)


def _print_summary(trace) -> None:
    per_port: dict[str, dict[str, int]] = {}
    for record in trace.records:
        counts = per_port.setdefault(record.dst, {ACCEPT: 0, NO_RULE: 0, CONSTRAINT_FALSE: 0})
        if record.outcome == ACCEPT:
            counts[ACCEPT] += 1
        else:
            counts[record.reason] += 1
    for port in sorted(per_port):
        counts = per_port[port]
        discarded = counts[NO_RULE] + counts[CONSTRAINT_FALSE]
        print(
            f"{port}: {counts[ACCEPT]} accepted, {discarded} discarded "
            f"(NO_RULE {counts[NO_RULE]}, CONSTRAINT_FALSE {counts[CONSTRAINT_FALSE]})"
        )
    accepted = sum(1 for r in trace.records if r.outcome == ACCEPT)
    print(f"total: {accepted} accepted, {len(trace.records) - accepted} discarded, "
          f"{len(trace.records)} records")


def cmd_simulate(args) -> int:
    # Simulation always auto-observes: a runnable system needs its rule
    # literals visible, and the additions surface as V3 warnings.
    scenario = load_scenario(args.scenario)
    diagnostics = validate(scenario.model, scenario.network, auto_observe=True)
    if has_errors(diagnostics):
        _print_diagnostics(diagnostics)
        return EXIT_VALIDATION
    network = apply_auto_observe(scenario.model, scenario.network)
    ruleset = extract_rules(scenario.model, network)
    diagnostics = diagnostics + check_conflicts(ruleset)
    _print_diagnostics(diagnostics)
    trace = run(scenario, ruleset, network=network, horizon_ms=args.until)
    if args.trace:
        write_trace(trace, args.trace)
        print(f"wrote {len(trace.records)} records to {args.trace}", file=sys.stderr)
    _print_summary(trace)
    return _status(diagnostics, args.strict)


def _activation_streak_start(records, record, port: str) -> int | None:
    """First arrival of the burst keeping `port` active at record time,
    assuming the default window when bridging gaps between arrivals."""
    arrivals = [r.t for r in records if r.dst == record.dst and r.src == port and r.t <= record.t]
    if not arrivals:
        return None
    start = arrivals[-1]
    for t in reversed(arrivals[:-1]):
        if start - t < DEFAULT_WINDOW_MS:
            start = t
        else:
            break
    return start


def _explain_failure(records, record) -> str:
    candidate, _, rest = record.rule.partition(" => ")
    constraint_text = candidate.partition(" and ")[2] or "true"
    try:
        constraint = parse_condition(constraint_text)
    except ParseError:
        return "constraint false"
    conjuncts = constraint.children if isinstance(constraint, And) else (constraint,)
    reasons = []
    for part in conjuncts:
        if evaluate_condition(part, record.assignment):
            continue
        rendered = render_condition(part)
        if isinstance(part, Not) and isinstance(part.child, Lit):
            port = part.child.port
            since = _activation_streak_start(records, record, port)
            detail = f"{port} active since {since}" if since is not None else f"{port} active"
            reasons.append(f"constraint `{rendered}` false; {detail}")
        elif isinstance(part, Lit):
            reasons.append(f"constraint `{rendered}` false; {part.port} inactive")
        else:
            reasons.append(f"constraint `{rendered}` false")
    return "; ".join(reasons) if reasons else "constraint false"


def cmd_explain(args) -> int:
    records = read_trace(args.trace)
    matches = [
        r for r in records
        if (args.at is None or r.t == args.at) and (args.port is None or r.dst == args.port)
    ]
    if not matches:
        print("no records")
        return EXIT_OK
    for record in matches:
        head = f"t={record.t} {record.src} -> {record.dst}"
        if record.outcome == ACCEPT:
            print(f"{head} accepted: rule satisfied")
        elif record.reason == NO_RULE:
            print(f"{head} discarded: no rule for {record.src} at {record.dst}")
        else:
            print(f"{head} discarded: {_explain_failure(records, record)}")
        print(f"  rule: {record.rule}")
        shown = " ".join(
            f"{port}={str(value).lower()}" for port, value in sorted(record.assignment.items())
        )
        print(f"  assignment: {shown}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="portarb",
        description="Compile behavior models to port-arbitration rules and "
        "simulate them over a component network.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    compile_p = sub.add_parser("compile", help="extract selection rules from a model")
    compile_p.add_argument("model", help="behavior-description XML file")
    compile_p.add_argument("network", help="application-description XML file")
    compile_p.add_argument("--auto-observe", action="store_true",
                           help="add missing observer connections instead of failing")
    compile_p.add_argument("--format", choices=("text", "json"), default="text")
    compile_p.add_argument("--out", help="write rules to this file instead of stdout")
    compile_p.add_argument("--strict", action="store_true",
                           help="treat warnings as failures")
    compile_p.set_defaults(func=cmd_compile)

    validate_p = sub.add_parser("validate", help="check a model against a network")
    validate_p.add_argument("model")
    validate_p.add_argument("network")
    validate_p.add_argument("--auto-observe", action="store_true")
    validate_p.add_argument("--strict", action="store_true")
    validate_p.set_defaults(func=cmd_validate)

    simulate_p = sub.add_parser("simulate", help="compile and run a scenario")
    simulate_p.add_argument("scenario", help="scenario JSON file")
    simulate_p.add_argument("--trace", help="write the JSON-lines trace here")
    simulate_p.add_argument("--until", type=int, help="stop before this time (ms)")
    simulate_p.add_argument("--strict", action="store_true")
    simulate_p.set_defaults(func=cmd_simulate)

    explain_p = sub.add_parser("explain", help="show why trace records were decided")
    explain_p.add_argument("trace", help="trace file written by simulate")
    explain_p.add_argument("--at", type=int, help="only records at this time (ms)")
    explain_p.add_argument("--port", help="only records delivered to this input port")
    explain_p.set_defaults(func=cmd_explain)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ParseError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
