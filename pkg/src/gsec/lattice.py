"""Finite bounded security lattices.

A lattice is loaded from a small JSON document listing its elements and the
covering edges of the order.  The reflexive-transitive closure, joins, meets,
top and bottom are all computed once at load time, so every later query is a
table lookup.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from itertools import product
from typing import Iterable, Mapping

UNKNOWN = "?"


class LatticeError(ValueError):
    """Raised when a lattice description is malformed or not a lattice."""


@dataclass(frozen=True, eq=False)
class SecurityLattice:
    """Lattices compare and hash by identity so they can key caches cheaply."""

    name: str
    elements: tuple[str, ...]
    order: frozenset[tuple[str, str]]
    bottom: str
    top: str
    _join: Mapping[tuple[str, str], str] = field(repr=False, compare=False)
    _meet: Mapping[tuple[str, str], str] = field(repr=False, compare=False)

    def __contains__(self, label: object) -> bool:
        return label in self.elements

    def check(self, *labels: str) -> None:
        for lab in labels:
            if lab not in self.elements:
                raise ValueError(f"label {lab!r} is not an element of lattice {self.name!r}")

    def leq(self, l1: str, l2: str) -> bool:
        if (l1, l2) in self.order:
            return True
        self.check(l1, l2)
        return False

    def join(self, l1: str, l2: str) -> str:
        try:
            return self._join[l1, l2]
        except KeyError:
            self.check(l1, l2)
            raise

    def meet(self, l1: str, l2: str) -> str:
        try:
            return self._meet[l1, l2]
        except KeyError:
            self.check(l1, l2)
            raise

    def up_set(self, label: str) -> frozenset[str]:
        return frozenset(x for x in self.elements if self.leq(label, x))

    def down_set(self, label: str) -> frozenset[str]:
        return frozenset(x for x in self.elements if self.leq(x, label))

    def to_json(self) -> str:
        covers = sorted((a, b) for (a, b) in self.order if a != b)
        return json.dumps({"elements": list(self.elements), "order": [list(e) for e in covers]})


def _closure(elements: tuple[str, ...], edges: Iterable[tuple[str, str]]) -> set[tuple[str, str]]:
    rel = {(x, x) for x in elements} | set(edges)
    # Warshall
    for k in elements:
        for i in elements:
            if (i, k) not in rel:
                continue
            for j in elements:
                if (k, j) in rel:
                    rel.add((i, j))
    return rel


def _bound(candidates: list[str], rel: set[tuple[str, str]], least: bool) -> str | None:
    for c in candidates:
        if least and all((c, d) in rel for d in candidates):
            return c
        if not least and all((d, c) in rel for d in candidates):
            return c
    return None


def build_lattice(elements: Iterable[str], edges: Iterable[tuple[str, str]], name: str = "custom") -> SecurityLattice:
    elems = tuple(elements)
    if not elems:
        raise LatticeError("a lattice needs at least one element")
    if len(set(elems)) != len(elems):
        raise LatticeError("duplicate lattice elements")
    for e in elems:
        if not isinstance(e, str) or not e or e == UNKNOWN:
            raise LatticeError(f"invalid element name {e!r}")
        if not (e[0].isalpha() or e[0] == "_") or not all(ch.isalnum() or ch in "_'" for ch in e):
            raise LatticeError(f"element name {e!r} is not an identifier")
        if e in ("true", "false", "if", "then", "else", "Bool"):
            raise LatticeError(f"element name {e!r} is a reserved word")
    edge_list = []
    for edge in edges:
        if len(edge) != 2:
            raise LatticeError(f"order edge {edge!r} must have two elements")
        a, b = edge
        for x in (a, b):
            if x not in elems:
                raise LatticeError(f"order edge mentions unknown element {x!r}")
        edge_list.append((a, b))

    rel = _closure(elems, edge_list)
    for a, b in rel:
        if a != b and (b, a) in rel:
            raise LatticeError(f"order has a cycle through {a!r} and {b!r}")

    join: dict[tuple[str, str], str] = {}
    meet: dict[tuple[str, str], str] = {}
    for a, b in product(elems, repeat=2):
        uppers = [c for c in elems if (a, c) in rel and (b, c) in rel]
        lowers = [c for c in elems if (c, a) in rel and (c, b) in rel]
        lub = _bound(uppers, rel, least=True)
        glb = _bound(lowers, rel, least=False)
        if lub is None:
            raise LatticeError(f"no unique join for {a!r} and {b!r}")
        if glb is None:
            raise LatticeError(f"no unique meet for {a!r} and {b!r}")
        join[a, b] = lub
        meet[a, b] = glb

    bottom = _bound(list(elems), rel, least=True)
    top = _bound(list(elems), rel, least=False)
    if bottom is None or top is None:
        raise LatticeError("lattice has no unique top or bottom")
    return SecurityLattice(name, elems, frozenset(rel), bottom, top, join, meet)


def load_lattice(config: str, name: str = "custom") -> SecurityLattice:
    """Parse and validate a JSON lattice description."""
    try:
        data = json.loads(config)
    except json.JSONDecodeError as exc:
        raise LatticeError(f"lattice config is not valid JSON: {exc}") from exc
    if not isinstance(data, dict) or set(data) - {"elements", "order", "name"}:
        raise LatticeError("lattice config must be an object with 'elements' and 'order'")
    elements = data.get("elements")
    order = data.get("order", [])
    if not isinstance(elements, list) or not isinstance(order, list):
        raise LatticeError("'elements' and 'order' must be arrays")
    if any(not isinstance(e, list) for e in order):
        raise LatticeError("each order edge must be a 2-element array")
    return build_lattice(elements, [tuple(e) for e in order], name=data.get("name", name))


TWO_POINT = build_lattice(["L", "H"], [("L", "H")], name="two-point")
DIAMOND = build_lattice(
    ["bot", "M1", "M2", "top"],
    [("bot", "M1"), ("bot", "M2"), ("M1", "top"), ("M2", "top")],
    name="diamond",
)
BUILTIN = {"two-point": TWO_POINT, "diamond": DIAMOND}


def resolve_lattice(spec: str) -> SecurityLattice:
    """Look up a built-in lattice by name, or read one from a JSON file."""
    if spec in BUILTIN:
        return BUILTIN[spec]
    try:
        with open(spec, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise LatticeError(f"unknown lattice {spec!r}: {exc.strerror}") from exc
    return load_lattice(text, name=spec)
