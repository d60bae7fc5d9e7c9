from __future__ import annotations

import pytest
from hypothesis import given, settings

from conftest import FGV_SRC, terms, types
from gsec.harness import CorpusParams, enumerate_terms
from gsec.lattice import DIAMOND, TWO_POINT
from gsec.syntax import (
    App,
    Ascribe,
    BinOp,
    Bool,
    BoolLit,
    Fun,
    Lam,
    ParseError,
    Var,
    free_vars,
    parse,
    parse_type,
    pretty,
    term_depth,
)


def test_lambda_literal():
    assert parse(r"(\x:Bool@L. x)@L") == Lam("x", Bool("L"), Var("x"), "L")


def test_operator():
    assert parse("true@H && false@L") == BinOp("&&", BoolLit(True, "H"), BoolLit(False, "L"))


def test_application_binds_tighter_than_ascription():
    t = parse(r"((\x:Bool@?. x)@L false@H) :: Bool@L")
    assert t == Ascribe(App(Lam("x", Bool("?"), Var("x"), "L"), BoolLit(False, "H")), Bool("L"))
    assert parse(pretty(t)) == t


def test_pretty_examples():
    assert pretty(Var("x")) == "x"
    assert pretty(parse(FGV_SRC)) == r"(\x:Bool@L. x)@L ((\x:Bool@?. x)@L false@H)"


def test_unlabelled_literal_defaults_to_bottom():
    assert parse("true") == BoolLit(True, "L")
    assert parse("false", DIAMOND) == BoolLit(False, "bot")


def test_function_type():
    assert parse_type("(Bool@L -> Bool@?)@H") == Fun(Bool("L"), Bool("?"), "H")


def test_spans_point_at_source():
    t = parse("true@L &&\n  false@H")
    assert str(t.rhs.span) == "2:3"
    assert t == BinOp("&&", BoolLit(True, "L"), BoolLit(False, "H"))  # spans do not affect equality


@pytest.mark.parametrize("src", ["", "   ", "true@", "(true@L", r"\x:Bool@L. x", "if true@L then x", "true@L ::"])
def test_parse_errors(src):
    with pytest.raises(ParseError):
        parse(src)


def test_free_vars_and_depth():
    t = parse(r"(\x:Bool@L. x && y)@L z")
    assert free_vars(t) == {"y", "z"}
    assert term_depth(BoolLit(True, "L")) == 1
    assert term_depth(t) == 4


def test_roundtrip_on_enumerated_terms():
    corpus = list(enumerate_terms(CorpusParams(TWO_POINT, 2, 2, True, (("x", Bool("H")),))))[:1000]
    assert len(corpus) == 1000
    for t in corpus:
        assert parse(pretty(t)) == t


@settings(max_examples=300, deadline=None)
@given(terms(TWO_POINT))
def test_roundtrip_property(t):
    assert parse(pretty(t)) == t


@settings(max_examples=200, deadline=None)
@given(types(DIAMOND))
def test_type_roundtrip_property(ty):
    assert parse_type(str(ty)) == ty
