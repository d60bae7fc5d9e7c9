from __future__ import annotations

import pytest
from hypothesis import assume, given, settings

from conftest import FGV_SRC, FV_SRC, p, terms
from gsec.elaborate import (
    Ev,
    IApp,
    IAsc,
    IllFormed,
    ILit,
    elaborate,
    recompute_type,
    show,
    term_precision,
    typecheck_gradual,
)
from gsec.gradual import Evidence, interior_type_oracle, precision_type
from gsec.harness import CorpusParams, enumerate_terms, relaxations
from gsec.lattice import DIAMOND, TWO_POINT
from gsec.statics import TypeCheckError, typecheck_static
from gsec.syntax import Bool, Fun, parse

LAT = TWO_POINT
SF = Fun(Bool("L"), Bool("L"), "L")
SG = Fun(Bool("?"), Bool("?"), "L")


def ev(t):
    return Evidence(t, t)


def test_golden_program_types_and_elaborates():
    it = elaborate(LAT, {}, p(FGV_SRC))
    assert it.type == Bool("L")
    assert isinstance(it, IApp)
    assert it.fun.ev == ev(SF)
    assert it.arg.ev == ev(Bool("L"))
    inner = it.arg.term
    assert inner.fun.ev == ev(SG)
    assert inner.arg.ev == ev(Bool("H"))
    assert show(it) == (
        r"(<(Bool@L -> Bool@L)@L, (Bool@L -> Bool@L)@L>(\x:Bool@L. x)@L) "
        r"(<Bool@L, Bool@L>((<(Bool@? -> Bool@?)@L, (Bool@? -> Bool@?)@L>(\x:Bool@?. x)@L) "
        r"(<Bool@H, Bool@H>false@H)))"
    )


def test_direct_flow_is_rejected():
    with pytest.raises(TypeCheckError) as info:
        elaborate(LAT, {}, p(FV_SRC))
    assert info.value.rule == "(S̃app)"


def test_literal_passes_through():
    assert elaborate(LAT, {}, p("true@L")) == ILit(True, "L")


def test_ascription_carries_interior():
    it = elaborate(LAT, {}, p("true@H :: Bool@?"))
    assert it == IAsc(Ev(Evidence(Bool("H"), Bool("H")), ILit(True, "H")), Bool("?"))
    assert it.term.ev == interior_type_oracle(LAT, Bool("H"), Bool("?"))


@pytest.mark.parametrize(
    "src, expected",
    [
        ("true@? && false@L", Bool("?")),
        ("true@? || true@H", Bool("H")),
        (r"(\x:Bool@L. x)@? true@?", Bool("?")),
        ("if true@? then true@L else false@L", Bool("?")),
        ("if true@L then true@? else false@H", Bool("H")),
        ("true@H :: Bool@?", Bool("?")),
    ],
)
def test_gradual_types(src, expected):
    assert typecheck_gradual(LAT, {}, p(src)) == expected


@pytest.mark.parametrize(
    "src, rule",
    [
        ("true@H :: Bool@L", "(S̃::)"),
        ("true@Q", "(S̃b)"),
        (r"if true@L then true@L else (\x:Bool@?. x)@L", "(S̃if)"),
        ("x", "(S̃x)"),
    ],
)
def test_gradual_type_errors(src, rule):
    with pytest.raises(TypeCheckError) as info:
        elaborate(LAT, {}, p(src))
    assert info.value.rule == rule


def test_labels_must_belong_to_the_lattice():
    with pytest.raises(TypeCheckError):
        elaborate(DIAMOND, {}, parse("true@L", DIAMOND))
    assert elaborate(DIAMOND, {}, parse("true@? :: Bool@M1", DIAMOND)).type == Bool("M1")


def test_agrees_with_static_checker_on_static_corpus():
    for t in enumerate_terms(CorpusParams(LAT, 2, 2, False, (("x", Bool("H")),))):
        env = {"x": Bool("H")}
        try:
            want = typecheck_static(LAT, env, t)
        except TypeCheckError:
            want = None
        try:
            got = typecheck_gradual(LAT, env, t)
        except TypeCheckError:
            got = None
        assert got == want, t


def test_term_precision():
    a, b = p(r"(\x:Bool@L. x)@L true@H"), p(r"(\x:Bool@?. x)@L true@?")
    assert term_precision(a, b)
    assert not term_precision(b, a)
    assert not term_precision(p("true@L"), p("false@?"))


def test_relaxations_are_less_precise():
    t = p(r"(\x:(Bool@L -> Bool@H)@L. x)@H :: (Bool@L -> Bool@H)@H")
    rs = list(relaxations(t))
    assert len(rs) == 7
    assert all(term_precision(t, r) and not term_precision(r, t) for r in rs)


def test_recompute_detects_bad_evidence():
    it = elaborate(LAT, {}, p("true@H :: Bool@?"))
    assert recompute_type(LAT, it) == Bool("?")
    bad = IAsc(Ev(Evidence(Bool("L"), Bool("L")), ILit(True, "H")), Bool("?"))
    with pytest.raises(IllFormed):
        recompute_type(LAT, bad)


@settings(max_examples=400, deadline=None)
@given(terms(TWO_POINT, scope=("x",)))
def test_elaborated_terms_are_well_formed(t):
    env = {"x": Bool("?")}
    try:
        it = elaborate(LAT, env, t)
    except TypeCheckError:
        assume(False)
        return
    assert recompute_type(LAT, it) == it.type


@settings(max_examples=400, deadline=None)
@given(terms(TWO_POINT, gradual=False, scope=("x",)))
def test_static_gradual_guarantee_property(t):
    env = {"x": Bool("H")}
    try:
        ty = typecheck_gradual(LAT, env, t)
    except TypeCheckError:
        assume(False)
        return
    for r in relaxations(t):
        assert precision_type(ty, typecheck_gradual(LAT, env, r))
