"""Deterministic discrete-event simulation of a publish-subscribe network.

Scripted periodic sources emit over the network's connections, per-port
arbiters gate delivery, sinks record what gets through, and every single
fan-out becomes one trace record. Time is a simulated integer-millisecond
clock; ties are broken by an insertion counter, so identical inputs always
produce byte-identical traces.
"""

from __future__ import annotations

import heapq
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping

from .arbiter import ACCEPT, DEFAULT_WINDOW_MS, PortArbiter
from .bdd import BddManager
from .compiler import RuleSet
from .model import (
    BehaviorModel,
    NetworkDescription,
    ParseError,
    check_port,
    is_input,
    is_output,
    parse_behavior_model,
    parse_network,
)

PAYLOAD_TAG = "pos"


@dataclass(frozen=True)
class PeriodicSource:
    """Emits on `port` at phase + k*period for every k whose instant falls
    inside one of the half-open active intervals."""

    name: str
    port: str
    period_ms: int
    phase_ms: int = 0
    active: tuple[tuple[int, int], ...] = ()

    def emits_at(self, t: int) -> bool:
        return any(start <= t < end for start, end in self.active)


@dataclass(frozen=True)
class Sink:
    name: str
    port: str


@dataclass(frozen=True)
class Scenario:
    model: BehaviorModel
    network: NetworkDescription
    horizon_ms: int
    components: tuple = ()
    model_path: Path | None = None
    network_path: Path | None = None

    def sources(self) -> tuple[PeriodicSource, ...]:
        return tuple(c for c in self.components if isinstance(c, PeriodicSource))

    def sinks(self) -> tuple[Sink, ...]:
        return tuple(c for c in self.components if isinstance(c, Sink))


@dataclass(frozen=True)
class Event:
    time: int
    seq: int
    kind: str  # "wake" or "emit"
    component: str = ""
    port: str = ""
    tag: str = ""


@dataclass(frozen=True)
class TraceRecord:
    t: int
    src: str
    dst: str
    outcome: str
    reason: str
    rule: str
    assignment: Mapping[str, bool]

    def json_line(self) -> str:
        payload = {
            "t": self.t,
            "src": self.src,
            "dst": self.dst,
            "outcome": self.outcome,
            "reason": self.reason,
            "rule": self.rule,
            "assignment": {k: self.assignment[k] for k in sorted(self.assignment)},
        }
        return json.dumps(payload, separators=(",", ":"))


@dataclass(frozen=True)
class Trace:
    records: tuple[TraceRecord, ...] = ()
    deliveries: Mapping[str, tuple[tuple[int, str], ...]] = field(default_factory=dict)

    def __iter__(self):
        return iter(self.records)

    def __len__(self) -> int:
        return len(self.records)


def _schema_error(path, message: str) -> ParseError:
    return ParseError(f"{path}: {message}")


def _require_int(path, obj, key: str, minimum: int | None = None) -> int:
    value = obj.get(key)
    if not isinstance(value, int) or isinstance(value, bool):
        raise _schema_error(path, f"{key!r} must be an integer")
    if minimum is not None and value < minimum:
        raise _schema_error(path, f"{key!r} must be >= {minimum}")
    return value


def _parse_intervals(path, raw) -> tuple[tuple[int, int], ...]:
    if not isinstance(raw, list):
        raise _schema_error(path, "'active' must be a list of [start, end) pairs")
    intervals: list[tuple[int, int]] = []
    for item in raw:
        if (
            not isinstance(item, list)
            or len(item) != 2
            or not all(isinstance(v, int) and not isinstance(v, bool) for v in item)
        ):
            raise _schema_error(path, f"bad interval {item!r}: expected [start, end]")
        start, end = item
        if start < 0 or end <= start:
            raise _schema_error(path, f"bad interval [{start}, {end}): need 0 <= start < end")
        intervals.append((start, end))
    intervals.sort()
    for (_, prev_end), (next_start, _) in zip(intervals, intervals[1:]):
        if next_start < prev_end:
            raise _schema_error(path, "active intervals must be disjoint")
    return tuple(intervals)


def load_scenario(path) -> Scenario:
    """Load a scenario file and the model/network files it references.

    Component ports are checked against the network's declarations; the
    referenced file paths resolve relative to the scenario file.
    """
    path = Path(path)
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise _schema_error(path, f"not valid JSON: {exc}") from None
    if not isinstance(data, dict):
        raise _schema_error(path, "top level must be a JSON object")
    for key in ("model", "network", "horizon_ms", "components"):
        if key not in data:
            raise _schema_error(path, f"missing {key!r}")
    horizon_ms = _require_int(path, data, "horizon_ms", minimum=0)
    if not isinstance(data["components"], list):
        raise _schema_error(path, "'components' must be a list")

    model_path = path.parent / str(data["model"])
    network_path = path.parent / str(data["network"])
    model = parse_behavior_model(model_path.read_text(encoding="utf-8"))
    network = parse_network(network_path.read_text(encoding="utf-8"))

    components: list = []
    names: set[str] = set()
    for entry in data["components"]:
        if not isinstance(entry, dict) or "name" not in entry:
            raise _schema_error(path, f"bad component entry {entry!r}")
        name = str(entry["name"])
        if name in names:
            raise _schema_error(path, f"duplicate component name {name!r}")
        names.add(name)
        if ("source" in entry) == ("sink" in entry):
            raise _schema_error(path, f"component {name!r} needs exactly one of source/sink")
        if "source" in entry:
            spec = entry["source"]
            if not isinstance(spec, dict):
                raise _schema_error(path, f"source of {name!r} must be an object")
            port = check_port(str(spec.get("port", "")))
            if not is_output(port):
                raise _schema_error(path, f"source port {port!r} of {name!r} must be an output")
            if port not in network.declared_outputs:
                raise _schema_error(path, f"source port {port!r} is not declared in the network")
            components.append(PeriodicSource(
                name=name,
                port=port,
                period_ms=_require_int(path, spec, "period_ms", minimum=1),
                phase_ms=_require_int(path, spec, "phase_ms", minimum=0) if "phase_ms" in spec else 0,
                active=_parse_intervals(path, spec.get("active", [])),
            ))
        else:
            spec = entry["sink"]
            if not isinstance(spec, dict):
                raise _schema_error(path, f"sink of {name!r} must be an object")
            port = check_port(str(spec.get("port", "")))
            if not is_input(port):
                raise _schema_error(path, f"sink port {port!r} of {name!r} must be an input")
            if port not in network.declared_inputs:
                raise _schema_error(path, f"sink port {port!r} is not declared in the network")
            components.append(Sink(name=name, port=port))

    return Scenario(
        model=model,
        network=network,
        horizon_ms=horizon_ms,
        components=tuple(components),
        model_path=model_path,
        network_path=network_path,
    )


def run(
    scenario: Scenario,
    ruleset: RuleSet,
    network: NetworkDescription | None = None,
    horizon_ms: int | None = None,
) -> Trace:
    """Run the scenario against a compiled rule set and return the trace.

    Events are processed in (time, seq) order. Each emission fans out to
    every connection leaving the source port in lexicographic destination
    order; per destination the arrival is recorded first and then decided,
    so a discarded message still refreshes its connection's activation.
    `network` overrides the scenario's parsed network (e.g. one augmented
    with observer connections); `horizon_ms` can only shorten the run.
    """
    net = network if network is not None else scenario.network
    horizon = scenario.horizon_ms
    if horizon_ms is not None:
        horizon = min(horizon, horizon_ms)

    manager = BddManager()
    arbiters: dict[str, PortArbiter] = {}
    for port in sorted({c.destination for c in net.connections}):
        arbiters[port] = PortArbiter(
            port,
            net.incoming(port),
            ruleset,
            window_ms=net.windows.get(port, DEFAULT_WINDOW_MS),
            manager=manager,
        )

    grouped: dict[str, list] = {}
    for conn in net.connections:
        grouped.setdefault(conn.source, []).append(conn)
    fanout = {
        src: tuple(sorted(conns, key=lambda c: c.destination))
        for src, conns in grouped.items()
    }

    sources = {comp.name: comp for comp in scenario.sources()}
    sink_log: dict[str, list[tuple[int, str]]] = {s.port: [] for s in scenario.sinks()}

    heap: list[tuple[int, int, Event]] = []
    seq = 0

    def push(event: Event) -> None:
        heapq.heappush(heap, (event.time, event.seq, event))

    for comp in scenario.sources():
        if comp.phase_ms < horizon:
            push(Event(comp.phase_ms, seq, "wake", component=comp.name))
            seq += 1

    records: list[TraceRecord] = []
    while heap:
        _, _, event = heapq.heappop(heap)
        if event.kind == "wake":
            comp = sources[event.component]
            if comp.emits_at(event.time):
                push(Event(event.time, seq, "emit", port=comp.port, tag=PAYLOAD_TAG))
                seq += 1
            next_wake = event.time + comp.period_ms
            if next_wake < horizon:
                push(Event(next_wake, seq, "wake", component=comp.name))
                seq += 1
        else:
            for conn in fanout.get(event.port, ()):
                arb = arbiters[conn.destination]
                arb.record_arrival(conn, event.time)
                decision = arb.decide(conn, event.time)
                records.append(TraceRecord(
                    t=event.time,
                    src=conn.source,
                    dst=conn.destination,
                    outcome=decision.outcome,
                    reason=decision.reason,
                    rule=arb.rule_text_for(conn.source) or "-",
                    assignment=decision.assignment,
                ))
                if decision.outcome == ACCEPT and conn.destination in sink_log:
                    sink_log[conn.destination].append((event.time, conn.source))

    return Trace(
        records=tuple(records),
        deliveries={port: tuple(log) for port, log in sink_log.items()},
    )


def write_trace(trace: Trace | Iterable[TraceRecord], path) -> None:
    """One JSON object per record, fields in fixed order; byte-stable."""
    records = trace.records if isinstance(trace, Trace) else tuple(trace)
    with Path(path).open("w", encoding="utf-8", newline="\n") as fh:
        for record in records:
            fh.write(record.json_line() + "\n")


_TRACE_FIELDS = ("t", "src", "dst", "outcome", "reason", "rule", "assignment")


def read_trace(path) -> tuple[TraceRecord, ...]:
    path = Path(path)
    records: list[TraceRecord] = []
    for lineno, line in enumerate(path.read_text(encoding="utf-8").splitlines(), start=1):
        if not line.strip():
            continue
        try:
            payload = json.loads(line)
        except json.JSONDecodeError as exc:
            raise ParseError(f"{path}:{lineno}: not valid JSON: {exc}") from None
        if not isinstance(payload, dict) or set(payload) != set(_TRACE_FIELDS):
            raise ParseError(f"{path}:{lineno}: expected fields {', '.join(_TRACE_FIELDS)}")
        if not isinstance(payload["assignment"], dict):
            raise ParseError(f"{path}:{lineno}: 'assignment' must be an object")
        records.append(TraceRecord(
            t=payload["t"],
            src=payload["src"],
            dst=payload["dst"],
            outcome=payload["outcome"],
            reason=payload["reason"],
            rule=payload["rule"],
            assignment=dict(payload["assignment"]),
        ))
    return tuple(records)
