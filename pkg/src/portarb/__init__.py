"""Port-arbitrated coordination: hierarchical behavior models compiled to
per-port selection rules, evaluated over BDDs against timed connection
activation, and executed in a deterministic simulated component network."""

from .arbiter import (
    ACCEPT,
    CONSTRAINT_FALSE,
    DEFAULT_WINDOW_MS,
    DISCARD,
    NO_RULE,
    SELECTED,
    ActivationTable,
    Decision,
    PortArbiter,
)
from .bdd import BddManager
from .compiler import (
    RuleSet,
    SelectionRule,
    check_conflicts,
    effective_inhibitor_sources,
    emit_rules,
    extract_rules,
    inherited_condition,
    rule_text,
)
from .library import FIXTURE_NAMES, FIXTURES_DIR, Fixture, fixture
from .model import (
    And,
    BehaviorModel,
    BehaviorNode,
    BoolExpr,
    Component,
    Connection,
    Diagnostic,
    FALSE,
    Lit,
    NetworkDescription,
    Not,
    Or,
    ParseError,
    TRUE,
    apply_auto_observe,
    check_port,
    evaluate_condition,
    has_errors,
    normalize,
    observer_connections,
    parse_behavior_model,
    parse_condition,
    parse_network,
    render_condition,
    serialize_behavior_model,
    serialize_network,
    validate,
)
from .simnet import (
    PeriodicSource,
    Scenario,
    Sink,
    Trace,
    TraceRecord,
    load_scenario,
    read_trace,
    run,
    write_trace,
)

__version__ = "0.1.0"
