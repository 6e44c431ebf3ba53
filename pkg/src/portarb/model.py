"""Behavior-model domain types and parsers.

Ports, connections, boolean activation conditions, the hierarchical
behavior tree, the application (network) description, and structural
validation of a model against a network.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterator, Mapping
from xml.etree import ElementTree
from xml.sax.saxutils import escape


class ParseError(ValueError):
    """Malformed input: XML structure, condition syntax, or file schema."""


ERROR = "error"
WARNING = "warning"

BEHAVIOR = "behavior"
META_BEHAVIOR = "meta_behavior"

_PORT_RE = re.compile(r"^(?:/[^/\s:]+)+:[io]$")


def check_port(name: str) -> str:
    """Validate `/segment(/segment)*:(i|o)` and return the name unchanged."""
    if not isinstance(name, str) or not _PORT_RE.match(name):
        raise ParseError(
            f"invalid port name {name!r}: expected /segment(/segment)*:i or :o"
        )
    return name


def is_output(port: str) -> bool:
    return port.endswith(":o")


def is_input(port: str) -> bool:
    return port.endswith(":i")


@dataclass(frozen=True)
class Connection:
    """Directed data path from an output port to an input port."""

    source: str
    destination: str

    def __post_init__(self) -> None:
        check_port(self.source)
        check_port(self.destination)
        if not is_output(self.source):
            raise ParseError(f"connection source {self.source!r} must be an output port (:o)")
        if not is_input(self.destination):
            raise ParseError(f"connection destination {self.destination!r} must be an input port (:i)")

    def __str__(self) -> str:
        return f"{self.source} -> {self.destination}"


# ---------------------------------------------------------------------------
# Boolean condition expressions


class BoolExpr:
    """Base class for condition expressions over output-port activation."""


@dataclass(frozen=True)
class TrueExpr(BoolExpr):
    pass


@dataclass(frozen=True)
class FalseExpr(BoolExpr):
    pass


@dataclass(frozen=True)
class Lit(BoolExpr):
    port: str

    def __post_init__(self) -> None:
        check_port(self.port)
        if not is_output(self.port):
            raise ParseError(
                f"condition literal {self.port!r} must name an output port (:o)"
            )


@dataclass(frozen=True)
class Not(BoolExpr):
    child: BoolExpr


@dataclass(frozen=True)
class And(BoolExpr):
    children: tuple[BoolExpr, ...]


@dataclass(frozen=True)
class Or(BoolExpr):
    children: tuple[BoolExpr, ...]


TRUE = TrueExpr()
FALSE = FalseExpr()


_TOKEN_RE = re.compile(
    r"""(?P<ws>\s+)
      | (?P<lparen>\()
      | (?P<rparen>\))
      | (?P<and>&&|&)
      | (?P<or>\|\||\|)
      | (?P<not>!|¬)
      | (?P<word>[A-Za-z_][A-Za-z0-9_]*)
      | (?P<port>/[^\s()!&|¬]+)
    """,
    re.VERBOSE,
)


def _tokenize_condition(text: str) -> list[tuple[str, str, int]]:
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise ParseError(
                f"condition syntax error at position {pos}: unexpected {text[pos]!r}"
            )
        if m.lastgroup != "ws":
            tokens.append((m.lastgroup, m.group(), pos))
        pos = m.end()
    return tokens


class _ConditionParser:
    """Recursive descent over: expr := term (OR term)*; term := factor (AND factor)*;
    factor := NOT factor | '(' expr ')' | port | 'true' | 'false'."""

    def __init__(self, text: str):
        self.tokens = _tokenize_condition(text)
        self.i = 0

    def _peek(self) -> tuple[str, str, int] | None:
        return self.tokens[self.i] if self.i < len(self.tokens) else None

    def _take(self) -> tuple[str, str, int]:
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def parse(self) -> BoolExpr:
        if not self.tokens:
            return TRUE
        expr = self.expr()
        tok = self._peek()
        if tok is not None:
            raise ParseError(
                f"condition syntax error at position {tok[2]}: unexpected {tok[1]!r}"
            )
        return expr

    def expr(self) -> BoolExpr:
        parts = [self.term()]
        while (tok := self._peek()) is not None and (
            tok[0] == "or" or (tok[0] == "word" and tok[1] == "or")
        ):
            self._take()
            parts.append(self.term())
        return parts[0] if len(parts) == 1 else Or(tuple(parts))

    def term(self) -> BoolExpr:
        parts = [self.factor()]
        while (tok := self._peek()) is not None and (
            tok[0] == "and" or (tok[0] == "word" and tok[1] == "and")
        ):
            self._take()
            parts.append(self.factor())
        return parts[0] if len(parts) == 1 else And(tuple(parts))

    def factor(self) -> BoolExpr:
        tok = self._peek()
        if tok is None:
            raise ParseError("condition syntax error: unexpected end of input")
        kind, value, pos = tok
        if kind == "not" or (kind == "word" and value == "not"):
            self._take()
            return Not(self.factor())
        if kind == "lparen":
            self._take()
            inner = self.expr()
            closing = self._peek()
            if closing is None or closing[0] != "rparen":
                raise ParseError(f"condition syntax error at position {pos}: unclosed '('")
            self._take()
            return inner
        if kind == "port":
            self._take()
            try:
                return Lit(value)
            except ParseError as exc:
                raise ParseError(f"condition syntax error at position {pos}: {exc}") from None
        if kind == "word":
            self._take()
            if value == "true":
                return TRUE
            if value == "false":
                return FALSE
            if value in ("forall", "exists"):
                raise ParseError(
                    f"condition syntax error at position {pos}: quantifier {value!r} is not "
                    "supported; conditions are propositional (and/or/not over output ports)"
                )
            raise ParseError(
                f"condition syntax error at position {pos}: unknown keyword {value!r}"
            )
        raise ParseError(
            f"condition syntax error at position {pos}: expected a port name, 'not' or '('"
        )


def parse_condition(text: str) -> BoolExpr:
    """Parse a condition; empty or whitespace-only input means unconstrained (true).

    Keyword operators `and`, `or`, `not` and symbol forms `&&`/`&`, `||`/`|`,
    `!`/`¬` are accepted. Literals must be output ports.
    """
    return _ConditionParser(text or "").parse()


def normalize(expr: BoolExpr) -> BoolExpr:
    """Flatten nested and/or, absorb constants, drop duplicate children."""
    if isinstance(expr, (TrueExpr, FalseExpr, Lit)):
        return expr
    if isinstance(expr, Not):
        child = normalize(expr.child)
        if child == TRUE:
            return FALSE
        if child == FALSE:
            return TRUE
        return Not(child)
    if isinstance(expr, (And, Or)):
        unit, zero = (TRUE, FALSE) if isinstance(expr, And) else (FALSE, TRUE)
        out: list[BoolExpr] = []
        for child in expr.children:
            child = normalize(child)
            if child == unit:
                continue
            if child == zero:
                return zero
            parts = child.children if isinstance(child, type(expr)) else (child,)
            for part in parts:
                if part not in out:
                    out.append(part)
        if not out:
            return unit
        if len(out) == 1:
            return out[0]
        return type(expr)(tuple(out))
    raise TypeError(f"not a BoolExpr: {expr!r}")


def render_condition(expr: BoolExpr) -> str:
    """Inverse of parse_condition on normalized expressions."""
    if isinstance(expr, TrueExpr):
        return "true"
    if isinstance(expr, FalseExpr):
        return "false"
    if isinstance(expr, Lit):
        return expr.port
    if isinstance(expr, Not):
        inner = render_condition(expr.child)
        if isinstance(expr.child, (And, Or)):
            inner = f"({inner})"
        return f"not {inner}"
    if isinstance(expr, And):
        parts = [
            f"({render_condition(c)})" if isinstance(c, (And, Or)) else render_condition(c)
            for c in expr.children
        ]
        return " and ".join(parts)
    if isinstance(expr, Or):
        parts = [
            f"({render_condition(c)})" if isinstance(c, Or) else render_condition(c)
            for c in expr.children
        ]
        return " or ".join(parts)
    raise TypeError(f"not a BoolExpr: {expr!r}")


def condition_literals(expr: BoolExpr) -> tuple[str, ...]:
    """Distinct literal ports in first-appearance (pre-order) order."""
    out: list[str] = []

    def visit(e: BoolExpr) -> None:
        if isinstance(e, Lit):
            if e.port not in out:
                out.append(e.port)
        elif isinstance(e, Not):
            visit(e.child)
        elif isinstance(e, (And, Or)):
            for c in e.children:
                visit(c)

    visit(expr)
    return tuple(out)


def evaluate_condition(expr: BoolExpr, assignment: Mapping[str, bool]) -> bool:
    """Direct evaluation; ports missing from the assignment count as inactive."""
    if isinstance(expr, TrueExpr):
        return True
    if isinstance(expr, FalseExpr):
        return False
    if isinstance(expr, Lit):
        return bool(assignment.get(expr.port, False))
    if isinstance(expr, Not):
        return not evaluate_condition(expr.child, assignment)
    if isinstance(expr, And):
        return all(evaluate_condition(c, assignment) for c in expr.children)
    if isinstance(expr, Or):
        return any(evaluate_condition(c, assignment) for c in expr.children)
    raise TypeError(f"not a BoolExpr: {expr!r}")


# ---------------------------------------------------------------------------
# Behavior tree


@dataclass(frozen=True)
class BehaviorNode:
    """A behavior (leaf, with configuration connections) or a meta-behavior
    (group, with child nodes). Conditions constrain activation; inhibitions
    name sibling nodes this node suppresses."""

    name: str
    kind: str
    configuration: tuple[Connection, ...] = ()
    children: tuple["BehaviorNode", ...] = ()
    condition: BoolExpr = TRUE
    inhibitions: tuple[str, ...] = ()

    @property
    def is_meta(self) -> bool:
        return self.kind == META_BEHAVIOR


@dataclass(frozen=True)
class BehaviorModel:
    roots: tuple[BehaviorNode, ...] = ()
    defines: Mapping[str, str] = field(default_factory=dict)

    def walk(self) -> Iterator[BehaviorNode]:
        """All nodes, depth-first in document order."""

        def visit(node: BehaviorNode) -> Iterator[BehaviorNode]:
            yield node
            for child in node.children:
                yield from visit(child)

        for root in self.roots:
            yield from visit(root)

    @cached_property
    def _by_name(self) -> dict[str, BehaviorNode]:
        return {node.name: node for node in self.walk()}

    @cached_property
    def _parent_name(self) -> dict[str, str | None]:
        parents: dict[str, str | None] = {root.name: None for root in self.roots}
        for node in self.walk():
            for child in node.children:
                parents[child.name] = node.name
        return parents

    def node(self, name: str) -> BehaviorNode:
        try:
            return self._by_name[name]
        except KeyError:
            raise KeyError(f"no behavior named {name!r} in the model") from None

    def parent_name(self, name: str) -> str | None:
        self.node(name)
        return self._parent_name[name]

    def ancestors(self, name: str) -> tuple[BehaviorNode, ...]:
        """Enclosing meta-behaviors, outermost first, excluding the node itself."""
        chain: list[BehaviorNode] = []
        current = self._parent_name.get(name)
        while current is not None:
            chain.append(self.node(current))
            current = self._parent_name.get(current)
        return tuple(reversed(chain))

    def leaf_behaviors(self) -> tuple[BehaviorNode, ...]:
        return tuple(node for node in self.walk() if not node.is_meta)

    def leaves_under(self, name: str) -> tuple[BehaviorNode, ...]:
        node = self.node(name)
        if not node.is_meta:
            return (node,)
        out: list[BehaviorNode] = []
        for child in node.children:
            out.extend(self.leaves_under(child.name))
        return tuple(out)

    def inhibitors_of(self, name: str) -> tuple[BehaviorNode, ...]:
        """Nodes that list `name` in their inhibitions, in document order."""
        return tuple(node for node in self.walk() if name in node.inhibitions)


# ---------------------------------------------------------------------------
# Behavior XML


_DEFINE_REF_RE = re.compile(r"\$\{([^}]*)\}")
_XML_DECL_RE = re.compile(r"^\s*<\?xml[^>]*\?>")


def _parse_xml_forest(text: str, what: str) -> list[ElementTree.Element]:
    """Parse a document that may carry several top-level elements."""
    try:
        root = ElementTree.fromstring(text)
    except ElementTree.ParseError:
        stripped = _XML_DECL_RE.sub("", text, count=1)
        try:
            root = ElementTree.fromstring(f"<forest>{stripped}</forest>")
        except ElementTree.ParseError as exc:
            raise ParseError(f"malformed {what} XML: {exc}") from None
        return list(root)
    if root.tag in ("define", BEHAVIOR, META_BEHAVIOR):
        return [root]
    return list(root)  # wrapper element of any name


def _extract_defines(elements: list[ElementTree.Element]) -> dict[str, str]:
    defines: dict[str, str] = {}
    for el in elements:
        if el.tag != "define":
            continue
        name = (el.get("name") or "").strip()
        if not name:
            raise ParseError("<define> requires a name attribute")
        if name in defines:
            raise ParseError(f"duplicate <define name={name!r}>")
        defines[name] = (el.text or "").strip()
    return defines


def _substitute_defines(text: str) -> tuple[str, dict[str, str]]:
    """Pure text replacement of ${name} references, before any structural
    interpretation of the behavior elements."""
    defines = _extract_defines(_parse_xml_forest(text, "behavior model"))
    for _ in range(64):
        changed = False
        for key, value in defines.items():
            expanded = _DEFINE_REF_RE.sub(
                lambda m: defines.get(m.group(1), m.group(0)), value
            )
            if expanded != value:
                defines[key] = expanded
                changed = True
        if not changed:
            break
    else:
        raise ParseError("circular ${...} define references")
    for value in defines.values():
        leftover = _DEFINE_REF_RE.search(value)
        if leftover:
            if leftover.group(1) in defines:
                raise ParseError("circular ${...} define references")
            raise ParseError(f"unresolved ${{{leftover.group(1)}}}")

    def replace(m: re.Match) -> str:
        name = m.group(1)
        if name not in defines:
            raise ParseError(f"unresolved ${{{name}}}")
        return defines[name]

    return _DEFINE_REF_RE.sub(replace, text), defines


def _parse_definition(el: ElementTree.Element, name: str):
    kind = el.tag
    configuration: list[Connection] = []
    child_refs: list[str] = []
    condition: BoolExpr | None = None
    inhibitions: list[str] = []
    for child in el:
        if child.tag == "config" and kind == BEHAVIOR:
            at = (child.get("at") or "").strip()
            source = (child.text or "").strip()
            if not at:
                raise ParseError(f"<config> in {name!r} requires an at attribute")
            if not source:
                raise ParseError(f"<config> in {name!r} requires a source port")
            connection = Connection(source, at)
            if connection in configuration:
                raise ParseError(f"duplicate configuration {connection} in {name!r}")
            configuration.append(connection)
        elif child.tag == BEHAVIOR and kind == META_BEHAVIOR:
            if child.get("name"):
                raise ParseError(
                    f"inline definitions are not allowed inside {name!r}; "
                    "reference behaviors by name"
                )
            ref = (child.text or "").strip()
            if not ref:
                raise ParseError(f"empty behavior reference in {name!r}")
            child_refs.append(ref)
        elif child.tag == "condition":
            if condition is not None:
                raise ParseError(f"multiple <condition> elements in {name!r}")
            try:
                condition = parse_condition(child.text or "")
            except ParseError as exc:
                raise ParseError(f"condition of {name!r}: {exc}") from None
        elif child.tag == "inhibition":
            for item in (child.text or "").split(","):
                item = item.strip()
                if item and item not in inhibitions:
                    inhibitions.append(item)
        else:
            raise ParseError(f"unexpected <{child.tag}> inside <{kind} name={name!r}>")
    if kind == BEHAVIOR and not configuration:
        raise ParseError(f"behavior {name!r} must configure at least one connection")
    if kind == META_BEHAVIOR and not child_refs:
        raise ParseError(f"meta_behavior {name!r} must reference at least one behavior")
    return configuration, child_refs, condition or TRUE, inhibitions


def parse_behavior_model(xml_text: str) -> BehaviorModel:
    """Parse a behavior-description document into a BehaviorModel.

    The document holds `<define>`, `<behavior name=...>` and
    `<meta_behavior name=...>` elements (a wrapper root element is
    optional). `${name}` references are substituted textually before the
    elements are interpreted; behaviors referenced from a meta-behavior
    become its children, unreferenced definitions become roots.
    """
    substituted, defines = _substitute_defines(xml_text)
    elements = _parse_xml_forest(substituted, "behavior model")

    definitions: dict[str, tuple] = {}
    order: list[str] = []
    for el in elements:
        if el.tag == "define":
            continue
        if el.tag not in (BEHAVIOR, META_BEHAVIOR):
            raise ParseError(f"unexpected top-level element <{el.tag}>")
        name = (el.get("name") or "").strip()
        if not name:
            raise ParseError(f"<{el.tag}> requires a non-empty name attribute")
        if "," in name:
            raise ParseError(f"behavior name {name!r} must not contain commas")
        if name in definitions:
            raise ParseError(f"duplicate behavior name {name!r}")
        definitions[name] = (el.tag, *_parse_definition(el, name))
        order.append(name)

    referenced: dict[str, str] = {}
    for name in order:
        for ref in definitions[name][2]:
            if ref not in definitions:
                raise ParseError(f"unknown behavior reference {ref!r} in {name!r}")
            if ref == name:
                raise ParseError(f"{name!r} cannot contain itself")
            if ref in referenced:
                raise ParseError(
                    f"{ref!r} is referenced by both {referenced[ref]!r} and {name!r}"
                )
            referenced[ref] = name

    built: dict[str, BehaviorNode] = {}

    def build(name: str) -> BehaviorNode:
        kind, configuration, child_refs, condition, inhibitions = definitions[name]
        node = BehaviorNode(
            name=name,
            kind=kind,
            configuration=tuple(configuration),
            children=tuple(build(ref) for ref in child_refs),
            condition=condition,
            inhibitions=tuple(inhibitions),
        )
        built[name] = node
        return node

    roots = tuple(build(name) for name in order if name not in referenced)
    if len(built) != len(definitions):
        orphans = sorted(set(definitions) - set(built))
        raise ParseError(f"circular containment among {orphans}")
    return BehaviorModel(roots=roots, defines=defines)


def _esc(text: str) -> str:
    return escape(text, {'"': "&quot;"})


def serialize_behavior_model(model: BehaviorModel) -> str:
    """Render a model back to XML; parse_behavior_model inverts this."""
    chunks: list[str] = []
    for name, value in model.defines.items():
        chunks.append(f'<define name="{_esc(name)}">{_esc(value)}</define>')
    for node in model.walk():
        lines = [f'<{node.kind} name="{_esc(node.name)}">']
        if node.is_meta:
            for child in node.children:
                lines.append(f"   <behavior>{_esc(child.name)}</behavior>")
        else:
            for conn in node.configuration:
                lines.append(
                    f'   <config at="{_esc(conn.destination)}">{_esc(conn.source)}</config>'
                )
        rendered = "" if node.condition == TRUE else _esc(render_condition(node.condition))
        lines.append(f"   <condition>{rendered}</condition>")
        if node.inhibitions:
            for target in node.inhibitions:
                lines.append(f"   <inhibition>{_esc(target)}</inhibition>")
        else:
            lines.append("   <inhibition></inhibition>")
        lines.append(f"</{node.kind}>")
        chunks.append("\n".join(lines))
    return "\n\n".join(chunks) + "\n"


# ---------------------------------------------------------------------------
# Application (network) description


@dataclass(frozen=True)
class Component:
    name: str
    inputs: tuple[str, ...] = ()
    outputs: tuple[str, ...] = ()


@dataclass(frozen=True)
class NetworkDescription:
    components: tuple[Component, ...] = ()
    connections: tuple[Connection, ...] = ()
    windows: Mapping[str, int] = field(default_factory=dict)

    def __post_init__(self) -> None:
        declared: set[str] = set()
        for component in self.components:
            for port in component.inputs + component.outputs:
                if port in declared:
                    raise ParseError(f"port {port!r} is declared more than once")
                declared.add(port)
        seen: set[Connection] = set()
        for conn in self.connections:
            if conn.source not in self.declared_outputs:
                raise ParseError(f"connection references undeclared output port {conn.source!r}")
            if conn.destination not in self.declared_inputs:
                raise ParseError(f"connection references undeclared input port {conn.destination!r}")
            if conn in seen:
                raise ParseError(f"duplicate connection {conn}")
            seen.add(conn)
        for port, window in self.windows.items():
            if port not in self.declared_inputs:
                raise ParseError(f"window override for undeclared input port {port!r}")
            if not isinstance(window, int) or window <= 0:
                raise ParseError(f"window override for {port!r} must be a positive integer")

    @cached_property
    def declared_inputs(self) -> frozenset[str]:
        return frozenset(p for c in self.components for p in c.inputs)

    @cached_property
    def declared_outputs(self) -> frozenset[str]:
        return frozenset(p for c in self.components for p in c.outputs)

    def incoming(self, port: str) -> tuple[Connection, ...]:
        return tuple(c for c in self.connections if c.destination == port)

    def with_connections(self, extra) -> "NetworkDescription":
        extra = tuple(c for c in extra if c not in self.connections)
        return NetworkDescription(
            components=self.components,
            connections=self.connections + extra,
            windows=dict(self.windows),
        )


def parse_network(xml_text: str) -> NetworkDescription:
    """Parse an application-description document.

    Schema: `<application> <module name> <input>..</input>* <output>..</output>*
    </module>* <connection from=".." to=".." [window="ms"]/>* </application>`.
    """
    try:
        root = ElementTree.fromstring(xml_text)
    except ElementTree.ParseError as exc:
        raise ParseError(f"malformed application XML: {exc}") from None
    if root.tag != "application":
        raise ParseError(f"expected <application> root element, got <{root.tag}>")

    components: list[Component] = []
    connection_elements = []
    for el in root:
        if el.tag == "module":
            name = (el.get("name") or "").strip()
            if not name:
                raise ParseError("<module> requires a non-empty name attribute")
            inputs: list[str] = []
            outputs: list[str] = []
            for port_el in el:
                port = (port_el.text or "").strip()
                check_port(port)
                if port_el.tag == "input":
                    if not is_input(port):
                        raise ParseError(f"port {port!r} declared as input must end with :i")
                    inputs.append(port)
                elif port_el.tag == "output":
                    if not is_output(port):
                        raise ParseError(f"port {port!r} declared as output must end with :o")
                    outputs.append(port)
                else:
                    raise ParseError(f"unexpected <{port_el.tag}> inside <module {name!r}>")
            components.append(Component(name, tuple(inputs), tuple(outputs)))
        elif el.tag == "connection":
            connection_elements.append(el)
        else:
            raise ParseError(f"unexpected <{el.tag}> inside <application>")

    connections: list[Connection] = []
    windows: dict[str, int] = {}
    for el in connection_elements:
        source = (el.get("from") or "").strip()
        destination = (el.get("to") or "").strip()
        if not source or not destination:
            raise ParseError("<connection> requires from and to attributes")
        connections.append(Connection(source, destination))
        raw_window = el.get("window")
        if raw_window is not None:
            try:
                window = int(raw_window)
            except ValueError:
                raise ParseError(f"window={raw_window!r} is not an integer") from None
            if window <= 0:
                raise ParseError(f"window={window} must be positive")
            if windows.get(destination, window) != window:
                raise ParseError(f"conflicting window overrides for {destination!r}")
            windows[destination] = window
    return NetworkDescription(tuple(components), tuple(connections), windows)


def serialize_network(network: NetworkDescription) -> str:
    lines = ["<application>"]
    for component in network.components:
        lines.append(f'   <module name="{_esc(component.name)}">')
        for port in component.inputs:
            lines.append(f"      <input>{_esc(port)}</input>")
        for port in component.outputs:
            lines.append(f"      <output>{_esc(port)}</output>")
        lines.append("   </module>")
    for conn in network.connections:
        window = network.windows.get(conn.destination)
        attr = f' window="{window}"' if window is not None else ""
        lines.append(
            f'   <connection from="{_esc(conn.source)}" to="{_esc(conn.destination)}"{attr}/>'
        )
    lines.append("</application>")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# Validation


@dataclass(frozen=True)
class Diagnostic:
    severity: str
    code: str
    message: str
    location: str = ""


def has_errors(diagnostics) -> bool:
    return any(d.severity == ERROR for d in diagnostics)


def _needed_literals(leaf: BehaviorNode, model: BehaviorModel) -> tuple[str, ...]:
    # Every literal that ends up in this behavior's compiled rules: inherited
    # condition literals plus negated inhibitor sources.
    from .compiler import effective_inhibitor_sources, inherited_condition

    needed = list(condition_literals(inherited_condition(leaf, model)))
    for port in effective_inhibitor_sources(leaf, model):
        if port not in needed:
            needed.append(port)
    return tuple(needed)


def observer_connections(
    model: BehaviorModel, network: NetworkDescription
) -> tuple[Connection, ...]:
    """Connections that must be added so every rule literal is visible at the
    port where the rule is evaluated."""
    present = set(network.connections)
    missing: list[Connection] = []
    for leaf in model.leaf_behaviors():
        needed = _needed_literals(leaf, model)
        for conn in leaf.configuration:
            for port in needed:
                if port not in network.declared_outputs:
                    continue  # validate() reports this as a V3 error
                candidate = Connection(port, conn.destination)
                if candidate not in present and candidate not in missing:
                    missing.append(candidate)
    return tuple(missing)


def apply_auto_observe(
    model: BehaviorModel, network: NetworkDescription
) -> NetworkDescription:
    return network.with_connections(observer_connections(model, network))


def _sibling_cycles(model: BehaviorModel) -> list[list[str]]:
    groups: dict[str | None, list[BehaviorNode]] = {}
    for node in model.walk():
        groups.setdefault(model.parent_name(node.name), []).append(node)
    cycles: list[list[str]] = []
    for parent, members in groups.items():
        names = {n.name for n in members}
        adjacency = {
            n.name: [t for t in n.inhibitions if t in names] for n in members
        }
        color: dict[str, int] = {}
        stack: list[str] = []

        def visit(name: str) -> None:
            color[name] = 1
            stack.append(name)
            for target in adjacency[name]:
                if color.get(target, 0) == 0:
                    visit(target)
                elif color.get(target) == 1:
                    cycles.append(stack[stack.index(target):] + [target])
            stack.pop()
            color[name] = 2

        for member in members:
            if color.get(member.name, 0) == 0:
                visit(member.name)
    return cycles


def validate(
    model: BehaviorModel, network: NetworkDescription, auto_observe: bool = False
) -> list[Diagnostic]:
    """Check the model against the network; findings come back as diagnostics.

    V1 inhibitions stay within sibling scope; V2 configured connections exist
    in the network; V3 every rule literal is observable at each destination
    port it constrains (with auto_observe, missing observer connections are
    reported as warnings instead of errors); V4 sibling inhibition relations
    are acyclic; V5 inhibition targets resolve.
    """
    diagnostics: list[Diagnostic] = []
    names = {node.name for node in model.walk()}

    for node in model.walk():
        for target in node.inhibitions:
            if target not in names:
                diagnostics.append(Diagnostic(
                    ERROR, "V5",
                    f"inhibition target {target!r} does not exist",
                    node.name,
                ))
            elif model.parent_name(target) != model.parent_name(node.name):
                diagnostics.append(Diagnostic(
                    ERROR, "V1",
                    f"{node.name!r} may only inhibit siblings; {target!r} has a different parent",
                    node.name,
                ))

    for cycle in _sibling_cycles(model):
        diagnostics.append(Diagnostic(
            ERROR, "V4",
            "inhibition cycle among siblings: " + " -> ".join(cycle),
            min(cycle),
        ))

    present = set(network.connections)
    for leaf in model.leaf_behaviors():
        for conn in leaf.configuration:
            if conn not in present:
                diagnostics.append(Diagnostic(
                    ERROR, "V2",
                    f"configured connection {conn} is not in the network",
                    leaf.name,
                ))

    for leaf in model.leaf_behaviors():
        needed = _needed_literals(leaf, model)
        for port in needed:
            if port not in network.declared_outputs:
                diagnostics.append(Diagnostic(
                    ERROR, "V3",
                    f"rule literal {port!r} is not a declared output port",
                    leaf.name,
                ))
        for conn in leaf.configuration:
            for port in needed:
                if port not in network.declared_outputs:
                    continue
                if Connection(port, conn.destination) in present:
                    continue
                if auto_observe:
                    diagnostics.append(Diagnostic(
                        WARNING, "V3",
                        f"adding observer connection {port} -> {conn.destination} "
                        f"so {leaf.name!r} can evaluate {port}",
                        leaf.name,
                    ))
                else:
                    diagnostics.append(Diagnostic(
                        ERROR, "V3",
                        f"literal {port} of {leaf.name!r} is not observable at "
                        f"{conn.destination}: connection {port} -> {conn.destination} "
                        "is missing (auto-observe can add it)",
                        leaf.name,
                    ))

    diagnostics.sort(key=lambda d: (d.location, d.code, d.message))
    return diagnostics
