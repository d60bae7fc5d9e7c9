from __future__ import annotations

from itertools import product

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import FV_SRC, p, types
from gsec.gradual import all_types
from gsec.lattice import DIAMOND, TWO_POINT
from gsec.statics import Stamp, TypeCheckError, stamp, sub_join, sub_meet, subtype, typecheck_static
from gsec.syntax import Bool, BoolLit, Fun, parse

L, H = "L", "H"


def fn(d, c, lab):
    return Fun(d, c, lab)


def derivable(lat, universe):
    """Subtyping as the least relation closed under the rules plus
    transitivity, computed by saturation over a finite universe."""
    rel = {(a, b) for a, b in product(universe, repeat=2)
           if isinstance(a, Bool) and isinstance(b, Bool) and lat.leq(a.label, b.label)}
    while True:
        new = set(rel)
        for a, b in product(universe, repeat=2):
            if isinstance(a, Fun) and isinstance(b, Fun) and lat.leq(a.label, b.label):
                if (b.dom, a.dom) in rel and (a.cod, b.cod) in rel:
                    new.add((a, b))
        for (a, b), (c, d) in product(rel, repeat=2):
            if b == c:
                new.add((a, d))
        if new == rel:
            return rel
        rel = new


def test_subtype_examples():
    assert subtype(TWO_POINT, Bool(L), Bool(H))
    assert not subtype(TWO_POINT, fn(Bool(L), Bool(L), L), fn(Bool(H), Bool(L), L))
    assert subtype(TWO_POINT, fn(Bool(H), Bool(L), L), fn(Bool(L), Bool(H), H))


def test_subtype_matches_derivation_search():
    universe = all_types(TWO_POINT.elements, 2)
    rel = derivable(TWO_POINT, universe)
    for a, b in product(universe, repeat=2):
        assert subtype(TWO_POINT, a, b) == ((a, b) in rel), (a, b)


def test_join_examples():
    assert sub_join(TWO_POINT, Bool(L), Bool(H)) == Bool(H)
    assert sub_join(TWO_POINT, fn(Bool(H), Bool(L), L), fn(Bool(L), Bool(H), H)) == fn(Bool(L), Bool(H), H)
    assert sub_join(TWO_POINT, Bool(L), fn(Bool(L), Bool(L), L)) is None
    assert sub_meet(TWO_POINT, fn(Bool(H), Bool(L), L), fn(Bool(L), Bool(H), H)) == fn(Bool(H), Bool(L), L)


def test_stamp_examples():
    assert stamp(TWO_POINT, Bool(L), H) == Bool(H)
    assert stamp(DIAMOND, Bool("M1"), "M2") == Bool("top")
    for s in all_types(DIAMOND.elements, 2):
        assert stamp(DIAMOND, s, DIAMOND.bottom) == s


@pytest.mark.parametrize(
    "src, expected",
    [
        ("true@L", Bool(L)),
        ("if true@H then true@L else false@L", Bool(H)),
        (r"(\x:Bool@L. x)@H true@L", Bool(H)),
        ("true@L || false@H", Bool(H)),
        ("true@L :: Bool@H", Bool(H)),
        (r"(\f:(Bool@H -> Bool@L)@L. f)@L (\x:Bool@H. false@L)@L", fn(Bool(H), Bool(L), L)),
    ],
)
def test_typecheck_examples(src, expected):
    assert typecheck_static(TWO_POINT, {}, p(src)) == expected


@pytest.mark.parametrize(
    "src, rule",
    [
        (FV_SRC, "(Sapp)"),
        ("true@H :: Bool@L", "(S::)"),
        ("true@L true@L", "(Sapp)"),
        (r"if (\x:Bool@L. x)@L then true@L else false@L", "(Sif)"),
        (r"if true@L then true@L else (\x:Bool@L. x)@L", "(Sif)"),
        (r"(\x:Bool@L. x)@L && true@L", "(S⊕)"),
        ("y", "(Sx)"),
        ("true@?", "(Sb)"),
    ],
)
def test_type_errors_name_the_rule(src, rule):
    with pytest.raises(TypeCheckError) as info:
        typecheck_static(TWO_POINT, {}, p(src))
    assert info.value.rule == rule


def test_stamp_terms_type_by_stamping():
    assert typecheck_static(TWO_POINT, {}, Stamp(BoolLit(True, L), H)) == Bool(H)


def _static(lat):
    return types(lat, gradual=False, max_leaves=5)


@settings(max_examples=200, deadline=None)
@given(st.data())
def test_subtyping_is_a_partial_order(data):
    lat = data.draw(st.sampled_from([TWO_POINT, DIAMOND]))
    a, b, c = (data.draw(_static(lat)) for _ in range(3))
    assert subtype(lat, a, a)
    if subtype(lat, a, b) and subtype(lat, b, c):
        assert subtype(lat, a, c)
    if subtype(lat, a, b) and subtype(lat, b, a):
        assert a == b


@settings(max_examples=200, deadline=None)
@given(st.data())
def test_join_and_meet_are_bounds(data):
    lat = data.draw(st.sampled_from([TWO_POINT, DIAMOND]))
    a, b = data.draw(_static(lat)), data.draw(_static(lat))
    j, m = sub_join(lat, a, b), sub_meet(lat, a, b)
    assert (j is None) == (m is None)
    if j is not None:
        assert subtype(lat, a, j) and subtype(lat, b, j)
        assert subtype(lat, m, a) and subtype(lat, m, b)
        assert j == sub_join(lat, b, a)
