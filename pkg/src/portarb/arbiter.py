"""Runtime port arbitration.

Each input port tracks when every incoming connection last delivered data;
a connection is active while the elapsed time since its last arrival stays
strictly below the port's window. Arrivals are recorded before arbitration
and regardless of its outcome, so a discarded stream still holds its
connection active.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Mapping

from . import compiler
from .bdd import BddManager
from .model import Connection

DEFAULT_WINDOW_MS = 1000

ACCEPT = "accept"
DISCARD = "discard"

SELECTED = "SELECTED"
NO_RULE = "NO_RULE"
CONSTRAINT_FALSE = "CONSTRAINT_FALSE"


class ActivationTable:
    """Last-arrival timestamps per connection plus the activation window."""

    def __init__(self, window_ms: int = DEFAULT_WINDOW_MS):
        if window_ms <= 0:
            raise ValueError(f"window must be positive, got {window_ms}")
        self.window_ms = window_ms
        self.last_arrival: dict[Connection, int] = {}
        self._latest: int | None = None

    def record(self, connection: Connection, t: int) -> None:
        if self._latest is not None and t < self._latest:
            raise ValueError(f"time regression: arrival at {t} after {self._latest}")
        self._latest = t
        self.last_arrival[connection] = t

    def active(self, connection: Connection, t: int) -> bool:
        # strict window: an arrival at 0 with window 1000 is inactive at 1000
        last = self.last_arrival.get(connection)
        return last is not None and t - last < self.window_ms


@dataclass(frozen=True)
class Decision:
    outcome: str
    reason: str
    assignment: Mapping[str, bool]

    def __post_init__(self) -> None:
        if (self.outcome == ACCEPT) != (self.reason == SELECTED):
            raise ValueError("accept decisions must carry reason SELECTED")


class PortArbiter:
    """Multiplexer gate on one input port: on each arrival, evaluates the
    arriving connection's rule BDD over the activation snapshot and accepts
    or discards. Connections without a rule are observation-only."""

    def __init__(
        self,
        port: str,
        incoming: Iterable[Connection],
        rules: "compiler.RuleSet | Iterable[compiler.SelectionRule]" = (),
        window_ms: int = DEFAULT_WINDOW_MS,
        manager: BddManager | None = None,
    ):
        self.port = port
        self.incoming = tuple(incoming)
        for conn in self.incoming:
            if conn.destination != port:
                raise ValueError(f"connection {conn} does not end at {port}")
        self._incoming_set = frozenset(self.incoming)
        self.activation = ActivationTable(window_ms)
        self.manager = manager if manager is not None else BddManager()
        sources = {conn.source for conn in self.incoming}
        rule_list = rules.rules if isinstance(rules, compiler.RuleSet) else rules
        self._rules: dict[str, tuple[compiler.SelectionRule, int, str]] = {}
        for rule in rule_list:
            if rule.port != port:
                continue
            if rule.candidate not in sources:
                raise ValueError(
                    f"rule candidate {rule.candidate} has no incoming connection at {port}"
                )
            node = self.manager.build(rule.constraint)
            self._rules[rule.candidate] = (rule, node, compiler.rule_text(rule))

    def record_arrival(self, connection: Connection, t: int) -> None:
        """Mark an arrival; called before decide() for the same message and
        performed whether or not the message is later accepted."""
        if connection not in self._incoming_set:
            raise ValueError(f"unknown connection {connection} at {self.port}")
        self.activation.record(connection, t)

    def activation_snapshot(self, t: int) -> dict[str, bool]:
        """One boolean per distinct incoming source port; a port sharing
        several connections counts active if any of them is."""
        snapshot: dict[str, bool] = {}
        for conn in self.incoming:
            snapshot[conn.source] = snapshot.get(conn.source, False) or self.activation.active(conn, t)
        return snapshot

    def rule_text_for(self, source: str) -> str | None:
        entry = self._rules.get(source)
        return entry[2] if entry is not None else None

    def decide(self, connection: Connection, t: int) -> Decision:
        """Accept or discard the message that just arrived on `connection`."""
        if connection not in self._incoming_set:
            raise ValueError(f"unknown connection {connection} at {self.port}")
        snapshot = self.activation_snapshot(t)
        entry = self._rules.get(connection.source)
        if entry is None:
            return Decision(DISCARD, NO_RULE, snapshot)
        _, node, _ = entry
        if self.manager.evaluate(node, snapshot):
            return Decision(ACCEPT, SELECTED, snapshot)
        return Decision(DISCARD, CONSTRAINT_FALSE, snapshot)
