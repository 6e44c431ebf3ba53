"""Condition grammar: parsing, rendering, normalization."""

import pytest
from hypothesis import given

from conftest import expressions
from portarb import And, Lit, Not, Or, ParseError, normalize, parse_condition, render_condition
from portarb.model import FALSE, TRUE


def lit(port):
    return Lit(port)


def test_empty_input_is_unconstrained():
    assert parse_condition("") == TRUE
    assert parse_condition("   \n\t") == TRUE
    assert parse_condition(None) == TRUE


def test_single_negated_literal():
    assert parse_condition("not /collision:o") == Not(lit("/collision:o"))


def test_symbols_and_grouping():
    expr = parse_condition("!/a:o && (/b:o || !/c:o)")
    assert expr == And((Not(lit("/a:o")), Or((lit("/b:o"), Not(lit("/c:o"))))))


def test_keyword_and_symbol_forms_agree():
    keyword = parse_condition("not /a:o and /b:o or /c:o")
    symbols = parse_condition("¬/a:o & /b:o | /c:o")
    assert keyword == symbols


def test_chains_parse_n_ary():
    assert parse_condition("/a:o or /b:o or /c:o") == Or((lit("/a:o"), lit("/b:o"), lit("/c:o")))
    assert parse_condition("/a:o and /b:o and /c:o") == And((lit("/a:o"), lit("/b:o"), lit("/c:o")))


def test_and_binds_tighter_than_or():
    expr = parse_condition("/a:o or /b:o and /c:o")
    assert expr == Or((lit("/a:o"), And((lit("/b:o"), lit("/c:o")))))


def test_constants_parse():
    assert parse_condition("true") == TRUE
    assert parse_condition("false") == FALSE


@pytest.mark.parametrize("text", [
    "/a:o and",
    "(/a:o",
    "/a:o /b:o",
    "and /a:o",
    ")",
])
def test_syntax_errors_carry_position(text):
    with pytest.raises(ParseError, match="position|end of input"):
        parse_condition(text)


def test_input_port_literal_rejected():
    with pytest.raises(ParseError, match="output port"):
        parse_condition("/Gaze/pos:i")


def test_bad_port_grammar_rejected():
    with pytest.raises(ParseError, match="invalid port name"):
        parse_condition("/a//b:o")


def test_quantifiers_rejected():
    with pytest.raises(ParseError, match="quantifier"):
        parse_condition("forall /a:o")
    with pytest.raises(ParseError, match="quantifier"):
        parse_condition("exists /a:o")


def test_unknown_keyword_rejected():
    with pytest.raises(ParseError, match="unknown keyword"):
        parse_condition("nand /a:o")


def test_normalize_flattens_and_dedups():
    nested = And((And((lit("/a:o"), lit("/b:o"))), lit("/a:o")))
    assert normalize(nested) == And((lit("/a:o"), lit("/b:o")))


def test_normalize_absorbs_constants():
    assert normalize(And((TRUE, lit("/a:o")))) == lit("/a:o")
    assert normalize(And((FALSE, lit("/a:o")))) == FALSE
    assert normalize(Or((TRUE, lit("/a:o")))) == TRUE
    assert normalize(Or((FALSE, lit("/a:o")))) == lit("/a:o")
    assert normalize(Not(TRUE)) == FALSE
    assert normalize(And(())) == TRUE


def test_render_parenthesizes_or_under_and():
    expr = And((lit("/a:o"), Or((lit("/b:o"), lit("/c:o")))))
    assert render_condition(expr) == "/a:o and (/b:o or /c:o)"


def test_render_parenthesizes_compound_under_not():
    expr = Not(And((lit("/a:o"), lit("/b:o"))))
    assert render_condition(expr) == "not (/a:o and /b:o)"


@given(expressions())
def test_roundtrip_normalized_expressions(expr):
    normalized = normalize(expr)
    assert parse_condition(render_condition(normalized)) == normalized


@given(expressions())
def test_normalize_is_idempotent(expr):
    once = normalize(expr)
    assert normalize(once) == once
