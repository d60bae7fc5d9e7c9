from __future__ import annotations

import json
from itertools import product

import pytest

from gsec.lattice import (
    BUILTIN,
    DIAMOND,
    TWO_POINT,
    LatticeError,
    build_lattice,
    load_lattice,
    resolve_lattice,
)


def test_two_point_from_json():
    lat = load_lattice(json.dumps({"elements": ["L", "H"], "order": [["L", "H"]]}))
    assert (lat.bottom, lat.top) == ("L", "H")
    assert lat.join("L", "H") == "H"
    assert not lat.leq("H", "L")


def test_one_point_lattice():
    lat = load_lattice('{"elements": ["X"], "order": []}')
    assert lat.bottom == lat.top == "X"
    assert lat.join("X", "X") == "X"


def test_diamond_join_and_meet():
    assert DIAMOND.join("M1", "M2") == "top"
    assert DIAMOND.meet("M1", "M2") == "bot"
    assert not DIAMOND.leq("M1", "M2")
    assert DIAMOND.leq("bot", "top")


@pytest.mark.parametrize(
    "doc",
    [
        "not json",
        '{"elements": ["A", "B"], "order": []}',  # no top or bottom
        '{"elements": ["A", "B"], "order": [["A", "B"], ["B", "A"]]}',  # cycle
        '{"elements": ["A", "A"], "order": []}',
        '{"elements": ["A"], "order": [["A", "Z"]]}',
        '{"elements": [], "order": []}',
        '{"elements": ["?"], "order": []}',
        '{"elements": ["A"], "order": [], "extra": 1}',
        '["A"]',
    ],
)
def test_malformed_configs_are_rejected(doc):
    with pytest.raises(LatticeError):
        load_lattice(doc)


def test_non_lattice_order_is_rejected():
    # bot below a and b, both below c and d: a and b have no least upper bound
    with pytest.raises(LatticeError):
        build_lattice(
            ["bot", "a", "b", "c", "d", "top"],
            [("bot", "a"), ("bot", "b"), ("a", "c"), ("a", "d"), ("b", "c"), ("b", "d"), ("c", "top"), ("d", "top")],
        )


def test_unknown_label_is_an_error():
    with pytest.raises(ValueError):
        TWO_POINT.leq("L", "M1")


def test_resolve_builtin_and_file(tmp_path):
    assert resolve_lattice("two-point") is TWO_POINT
    path = tmp_path / "lat.json"
    path.write_text(DIAMOND.to_json())
    loaded = resolve_lattice(str(path))
    assert loaded.elements == DIAMOND.elements
    assert loaded.order == DIAMOND.order
    with pytest.raises(LatticeError):
        resolve_lattice(str(tmp_path / "missing.json"))


@pytest.mark.parametrize("lat", list(BUILTIN.values()), ids=list(BUILTIN))
def test_lattice_laws(lat):
    els = lat.elements
    for a, b in product(els, repeat=2):
        j, m = lat.join(a, b), lat.meet(a, b)
        assert lat.leq(a, j) and lat.leq(b, j)
        assert lat.leq(m, a) and lat.leq(m, b)
        assert j == lat.join(b, a) and m == lat.meet(b, a)
        assert all(lat.leq(j, c) for c in els if lat.leq(a, c) and lat.leq(b, c))
        assert all(lat.leq(c, m) for c in els if lat.leq(c, a) and lat.leq(c, b))
        assert lat.leq(a, b) == (j == b)
    for a in els:
        assert lat.leq(lat.bottom, a) and lat.leq(a, lat.top)
