"""Behavior and application XML parsing, serialization, validation."""

import pytest
from hypothesis import given, settings

from conftest import behavior_models
from portarb import (
    Connection,
    ParseError,
    apply_auto_observe,
    check_port,
    fixture,
    observer_connections,
    parse_behavior_model,
    parse_network,
    serialize_behavior_model,
    serialize_network,
    validate,
)
from portarb.model import ERROR, TRUE, WARNING, is_input, is_output


LISTING = fixture("be-curious").model.read_text()
FIG3_MODEL = fixture("search-and-track").model.read_text()
FIG2_NETWORK = fixture("search-and-track").network.read_text()


@pytest.mark.parametrize("port", ["/Gaze/pos:i", "/collision:o", "/a/b/c/d:o", "/RestArm/pos:o"])
def test_valid_port_names(port):
    assert check_port(port) == port


@pytest.mark.parametrize("port", [
    "", "/", "Gaze/pos:i", "/Gaze/pos", "/Gaze/pos:x", "/:o", "//x:o",
    "/a b:o", "/a:o/b:o", ":i",
])
def test_invalid_port_names(port):
    with pytest.raises(ParseError):
        check_port(port)


def test_port_direction_helpers():
    assert is_output("/a:o") and not is_input("/a:o")
    assert is_input("/a:i") and not is_output("/a:i")


def test_connection_direction_enforced():
    with pytest.raises(ParseError, match="output"):
        Connection("/a:i", "/b:i")
    with pytest.raises(ParseError, match="input"):
        Connection("/a:o", "/b:o")


# -- behavior XML -----------------------------------------------------------


def test_listing_parses_to_expected_structure():
    model = parse_behavior_model(LISTING)
    assert model.defines == {"gaze": "/Gaze/pos:i"}
    assert [n.name for n in model.roots] == ["Be Curious"]
    curious = model.roots[0]
    assert curious.is_meta
    assert [c.name for c in curious.children] == ["Look Around", "Follow Face"]
    look = model.node("Look Around")
    assert look.configuration == (Connection("/RandomLook/pos:o", "/Gaze/pos:i"),)
    assert look.condition == TRUE and look.inhibitions == ()
    follow = model.node("Follow Face")
    assert follow.configuration == (Connection("/Face/pos:o", "/Gaze/pos:i"),)
    assert follow.inhibitions == ("Look Around",)


def test_minimal_document():
    model = parse_behavior_model('<behavior name="B"><config at="/X:i">/Y:o</config></behavior>')
    assert len(model.roots) == 1
    node = model.roots[0]
    assert node.name == "B" and not node.is_meta
    assert node.configuration == (Connection("/Y:o", "/X:i"),)
    assert node.condition == TRUE
    assert node.inhibitions == ()


def test_missing_define_is_a_parse_error():
    broken = LISTING.replace('<define name="gaze"> /Gaze/pos:i </define>', "")
    with pytest.raises(ParseError, match=r"unresolved \$\{gaze\}"):
        parse_behavior_model(broken)


def test_define_chains_resolve():
    text = """
    <define name="base">/Gaze</define>
    <define name="gaze">${base}/pos:i</define>
    <behavior name="B"><config at="${gaze}">/Y:o</config></behavior>
    """
    model = parse_behavior_model(f"<behaviors>{text}</behaviors>")
    assert model.roots[0].configuration == (Connection("/Y:o", "/Gaze/pos:i"),)


def test_circular_defines_rejected():
    text = """
    <define name="a">${b}</define>
    <define name="b">${a}</define>
    <behavior name="B"><config at="${a}">/Y:o</config></behavior>
    """
    with pytest.raises(ParseError, match="circular"):
        parse_behavior_model(f"<behaviors>{text}</behaviors>")


def test_duplicate_names_rejected():
    text = (
        '<behavior name="B"><config at="/X:i">/Y:o</config></behavior>'
        '<behavior name="B"><config at="/X:i">/Z:o</config></behavior>'
    )
    with pytest.raises(ParseError, match="duplicate behavior name"):
        parse_behavior_model(text)


def test_unknown_reference_rejected():
    text = '<meta_behavior name="M"><behavior>Ghost</behavior></meta_behavior>'
    with pytest.raises(ParseError, match="unknown behavior reference"):
        parse_behavior_model(text)


def test_doubly_referenced_child_rejected():
    text = (
        '<behavior name="B"><config at="/X:i">/Y:o</config></behavior>'
        '<meta_behavior name="M1"><behavior>B</behavior></meta_behavior>'
        '<meta_behavior name="M2"><behavior>B</behavior></meta_behavior>'
    )
    with pytest.raises(ParseError, match="referenced by both"):
        parse_behavior_model(text)


def test_circular_containment_rejected():
    text = (
        '<behavior name="B"><config at="/X:i">/Y:o</config></behavior>'
        '<meta_behavior name="M1"><behavior>M2</behavior><behavior>B</behavior></meta_behavior>'
        '<meta_behavior name="M2"><behavior>M1</behavior></meta_behavior>'
    )
    with pytest.raises(ParseError, match="circular containment|cannot contain itself"):
        parse_behavior_model(text)


def test_meta_with_config_rejected():
    text = '<meta_behavior name="M"><config at="/X:i">/Y:o</config></meta_behavior>'
    with pytest.raises(ParseError, match="unexpected <config>"):
        parse_behavior_model(text)


def test_behavior_without_config_rejected():
    with pytest.raises(ParseError, match="at least one connection"):
        parse_behavior_model('<behavior name="B"><condition></condition></behavior>')


def test_comma_separated_inhibition_list():
    model = parse_behavior_model(FIG3_MODEL)
    assert model.node("Track Object").inhibitions == ("Rest Arm", "Be Curious")


def test_repeated_inhibition_elements():
    text = (
        '<behaviors>'
        '<behavior name="A"><config at="/X:i">/Y:o</config></behavior>'
        '<behavior name="B"><config at="/X:i">/Z:o</config>'
        "<inhibition>A</inhibition><inhibition>A</inhibition></behavior>"
        "</behaviors>"
    )
    assert parse_behavior_model(text).node("B").inhibitions == ("A",)


def test_multiple_condition_elements_rejected():
    text = (
        '<behavior name="B"><config at="/X:i">/Y:o</config>'
        "<condition>/a:o</condition><condition>/b:o</condition></behavior>"
    )
    with pytest.raises(ParseError, match="multiple <condition>"):
        parse_behavior_model(text)


def test_malformed_xml_rejected():
    with pytest.raises(ParseError, match="malformed"):
        parse_behavior_model("<behavior name='B'>")


def test_serialize_roundtrip_listing():
    model = parse_behavior_model(LISTING)
    assert parse_behavior_model(serialize_behavior_model(model)) == model


def test_serialize_roundtrip_search_and_track():
    model = parse_behavior_model(FIG3_MODEL)
    assert parse_behavior_model(serialize_behavior_model(model)) == model


@settings(max_examples=50)
@given(behavior_models())
def test_serialize_roundtrip_random_models(model):
    assert parse_behavior_model(serialize_behavior_model(model)) == model


# -- application XML --------------------------------------------------------


def test_network_parses_components_and_connections():
    network = parse_network(FIG2_NETWORK)
    assert len(network.components) == 7
    assert len(network.connections) == 6
    assert Connection("/Object/pos:o", "/Gaze/pos:i") in network.connections
    assert Connection("/collision:o", "/Arm/pos:i") in network.connections
    assert network.windows == {}


def test_empty_application():
    network = parse_network("<application/>")
    assert network.components == () and network.connections == ()


def test_connection_to_undeclared_port_rejected():
    text = (
        '<application><module name="A"><output>/a:o</output></module>'
        '<connection from="/a:o" to="/ghost:i"/></application>'
    )
    with pytest.raises(ParseError, match="/ghost:i"):
        parse_network(text)


def test_duplicate_connection_rejected():
    text = (
        '<application><module name="A"><output>/a:o</output></module>'
        '<module name="B"><input>/b:i</input></module>'
        '<connection from="/a:o" to="/b:i"/><connection from="/a:o" to="/b:i"/></application>'
    )
    with pytest.raises(ParseError, match="duplicate connection"):
        parse_network(text)


def test_window_override():
    text = (
        '<application><module name="A"><output>/a:o</output></module>'
        '<module name="B"><input>/b:i</input></module>'
        '<connection from="/a:o" to="/b:i" window="250"/></application>'
    )
    assert parse_network(text).windows == {"/b:i": 250}


@pytest.mark.parametrize("window", ["0", "-5", "abc"])
def test_bad_window_rejected(window):
    text = (
        '<application><module name="A"><output>/a:o</output></module>'
        '<module name="B"><input>/b:i</input></module>'
        f'<connection from="/a:o" to="/b:i" window="{window}"/></application>'
    )
    with pytest.raises(ParseError):
        parse_network(text)


def test_duplicate_port_declaration_rejected():
    text = (
        '<application><module name="A"><output>/a:o</output></module>'
        '<module name="B"><output>/a:o</output></module></application>'
    )
    with pytest.raises(ParseError, match="declared more than once"):
        parse_network(text)


def test_network_serialize_roundtrip():
    network = parse_network(FIG2_NETWORK)
    assert parse_network(serialize_network(network)) == network


# -- validation -------------------------------------------------------------


def _fig3():
    return parse_behavior_model(FIG3_MODEL), parse_network(FIG2_NETWORK)


def test_cross_group_inhibition_is_v1():
    # Follow Face may not inhibit Rest Arm: different parents
    model_text = FIG3_MODEL.replace(
        "<inhibition>Look Around</inhibition>",
        "<inhibition>Look Around</inhibition>\n   <inhibition>Rest Arm</inhibition>",
    )
    model = parse_behavior_model(model_text)
    network = parse_network(FIG2_NETWORK)
    v1 = [d for d in validate(model, network) if d.code == "V1"]
    assert len(v1) == 1
    assert v1[0].severity == ERROR and v1[0].location == "Follow Face"


def test_missing_configured_connection_is_v2():
    model, _ = _fig3()
    network = parse_network(FIG2_NETWORK.replace(
        '   <connection from="/RestArm/pos:o" to="/Arm/pos:i"/>\n', ""
    ))
    v2 = [d for d in validate(model, network) if d.code == "V2"]
    assert len(v2) == 1 and v2[0].location == "Rest Arm"


def test_unobservable_condition_literal_is_v3():
    model, network = _fig3()
    diagnostics = validate(model, network)
    assert [d.code for d in diagnostics] == ["V3"]
    assert diagnostics[0].severity == ERROR
    assert "/collision:o" in diagnostics[0].message
    assert "/Gaze/pos:i" in diagnostics[0].message


def test_auto_observe_downgrades_v3_to_warning_and_adds_connection():
    model, network = _fig3()
    diagnostics = validate(model, network, auto_observe=True)
    assert [d.severity for d in diagnostics] == [WARNING]
    added = observer_connections(model, network)
    assert added == (Connection("/collision:o", "/Gaze/pos:i"),)
    augmented = apply_auto_observe(model, network)
    assert Connection("/collision:o", "/Gaze/pos:i") in augmented.connections
    assert validate(model, augmented) == []


def test_undeclared_literal_port_is_v3_even_with_auto_observe():
    model, _ = _fig3()
    network = parse_network(FIG2_NETWORK.replace(
        '   <module name="Collision Detector">\n      <output>/collision:o</output>\n   </module>\n',
        "",
    ).replace('   <connection from="/collision:o" to="/Arm/pos:i"/>\n', ""))
    diagnostics = validate(model, network, auto_observe=True)
    assert any(d.code == "V3" and d.severity == ERROR for d in diagnostics)


def test_inhibition_cycle_is_v4():
    text = (
        '<behaviors>'
        '<behavior name="A"><config at="/X:i">/a:o</config><inhibition>B</inhibition></behavior>'
        '<behavior name="B"><config at="/X:i">/b:o</config><inhibition>A</inhibition></behavior>'
        "</behaviors>"
    )
    network = parse_network(
        '<application><module name="S"><output>/a:o</output><output>/b:o</output></module>'
        '<module name="D"><input>/X:i</input></module>'
        '<connection from="/a:o" to="/X:i"/><connection from="/b:o" to="/X:i"/></application>'
    )
    model = parse_behavior_model(text)
    v4 = [d for d in validate(model, network) if d.code == "V4"]
    assert len(v4) == 1 and "A -> B -> A" in v4[0].message


def test_unresolved_inhibition_is_v5():
    text = '<behavior name="A"><config at="/X:i">/a:o</config><inhibition>Ghost</inhibition></behavior>'
    network = parse_network(
        '<application><module name="S"><output>/a:o</output></module>'
        '<module name="D"><input>/X:i</input></module>'
        '<connection from="/a:o" to="/X:i"/></application>'
    )
    diagnostics = validate(parse_behavior_model(text), network)
    assert [d.code for d in diagnostics] == ["V5"]


def test_clean_model_validates_empty():
    model, network = _fig3()
    assert validate(model, apply_auto_observe(model, network)) == []


def test_validate_is_deterministic():
    model, network = _fig3()
    first = validate(model, network)
    second = validate(model, network)
    assert first == second


def test_top_level_nodes_may_inhibit_each_other():
    model = parse_behavior_model(fixture("conflict-demo").model.read_text().replace(
        '<behavior name="Pong">\n      <config at="/Motor/cmd:i">/Pong/cmd:o</config>\n      <condition></condition>\n      <inhibition></inhibition>',
        '<behavior name="Pong">\n      <config at="/Motor/cmd:i">/Pong/cmd:o</config>\n      <condition></condition>\n      <inhibition>Ping</inhibition>',
    ))
    network = parse_network(fixture("conflict-demo").network.read_text())
    assert validate(model, network) == []
