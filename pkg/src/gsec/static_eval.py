"""Small-step and big-step evaluation for the fully static language.

Small-step reduction introduces term stamping ``t ⋎ ℓ`` so that the label of
a function or conditional guard can be joined into the eventual result.
Ascriptions have no runtime content here and are erased when their operand
is a value.
"""

from __future__ import annotations

from dataclasses import replace
from typing import Optional, Union

from .lattice import SecurityLattice
from .statics import Stamp
from .syntax import (
    App,
    Ascribe,
    BinOp,
    BoolLit,
    If,
    Lam,
    Term,
    Var,
    apply_op,
    format_type,
    pretty,
)


RTerm = Union[Term, Stamp]
StaticValue = Union[BoolLit, Lam]


class StuckError(RuntimeError):
    pass


def is_value(t: RTerm) -> bool:
    return isinstance(t, (BoolLit, Lam))


def relabel(v: StaticValue, label: str) -> StaticValue:
    return replace(v, label=label)


def subst(t: RTerm, name: str, v: StaticValue) -> RTerm:
    """Replace free occurrences of ``name`` by the closed value ``v``.

    Only closed values are substituted, so no binder can capture anything.
    """
    if isinstance(t, Var):
        return v if t.name == name else t
    if isinstance(t, BoolLit):
        return t
    if isinstance(t, Lam):
        if t.param == name:
            return t
        return replace(t, body=subst(t.body, name, v))
    if isinstance(t, App):
        return replace(t, fun=subst(t.fun, name, v), arg=subst(t.arg, name, v))
    if isinstance(t, BinOp):
        return replace(t, lhs=subst(t.lhs, name, v), rhs=subst(t.rhs, name, v))
    if isinstance(t, If):
        return replace(
            t, cond=subst(t.cond, name, v), then=subst(t.then, name, v), else_=subst(t.else_, name, v)
        )
    if isinstance(t, Ascribe):
        return replace(t, term=subst(t.term, name, v))
    if isinstance(t, Stamp):
        return Stamp(subst(t.term, name, v), t.label)
    raise TypeError(f"not a term: {t!r}")


def _notion(lat: SecurityLattice, t: RTerm) -> RTerm:
    if isinstance(t, BinOp):
        b1, b2 = t.lhs, t.rhs
        assert isinstance(b1, BoolLit) and isinstance(b2, BoolLit)
        return BoolLit(apply_op(t.op, b1.value, b2.value), lat.join(b1.label, b2.label))
    if isinstance(t, App):
        f = t.fun
        if not isinstance(f, Lam):
            raise StuckError(f"applying a non-function: {show(t)}")
        return Stamp(subst(f.body, f.param, t.arg), f.label)
    if isinstance(t, If):
        c = t.cond
        if not isinstance(c, BoolLit):
            raise StuckError(f"non-boolean condition: {show(t)}")
        return Stamp(t.then if c.value else t.else_, c.label)
    if isinstance(t, Stamp):
        return relabel(t.term, lat.join(t.term.label, t.label))
    if isinstance(t, Ascribe):
        return t.term
    raise StuckError(f"no reduction for {show(t)}")


def step_static(lat: SecurityLattice, t: RTerm) -> Optional[RTerm]:
    """One leftmost reduction step, or ``None`` when ``t`` is a value."""
    if is_value(t):
        return None
    if isinstance(t, Var):
        raise StuckError(f"free variable {t.name!r}")
    if isinstance(t, BinOp):
        if not is_value(t.lhs):
            return replace(t, lhs=step_static(lat, t.lhs))
        if not is_value(t.rhs):
            return replace(t, rhs=step_static(lat, t.rhs))
    elif isinstance(t, App):
        if not is_value(t.fun):
            return replace(t, fun=step_static(lat, t.fun))
        if not is_value(t.arg):
            return replace(t, arg=step_static(lat, t.arg))
    elif isinstance(t, If):
        if not is_value(t.cond):
            return replace(t, cond=step_static(lat, t.cond))
    elif isinstance(t, Stamp):
        if not is_value(t.term):
            return Stamp(step_static(lat, t.term), t.label)
    elif isinstance(t, Ascribe):
        if not is_value(t.term):
            return replace(t, term=step_static(lat, t.term))
    return _notion(lat, t)


def trace_small(lat: SecurityLattice, t: RTerm, fuel: int = 10_000) -> list[RTerm]:
    """All terms visited by small-step reduction, starting with ``t``."""
    seen = [t]
    while fuel > 0:
        nxt = step_static(lat, seen[-1])
        if nxt is None:
            return seen
        seen.append(nxt)
        fuel -= 1
    raise RuntimeError("step budget exhausted")


def eval_small(lat: SecurityLattice, t: RTerm, fuel: int = 10_000) -> StaticValue:
    return trace_small(lat, t, fuel)[-1]


def eval_big(lat: SecurityLattice, t: RTerm) -> StaticValue:
    if is_value(t):
        return t
    if isinstance(t, BinOp):
        v1 = eval_big(lat, t.lhs)
        v2 = eval_big(lat, t.rhs)
        return BoolLit(apply_op(t.op, v1.value, v2.value), lat.join(v1.label, v2.label))
    if isinstance(t, App):
        f = eval_big(lat, t.fun)
        v = eval_big(lat, t.arg)
        r = eval_big(lat, subst(f.body, f.param, v))
        return relabel(r, lat.join(r.label, f.label))
    if isinstance(t, If):
        c = eval_big(lat, t.cond)
        r = eval_big(lat, t.then if c.value else t.else_)
        return relabel(r, lat.join(r.label, c.label))
    if isinstance(t, Ascribe):
        return eval_big(lat, t.term)
    if isinstance(t, Stamp):
        r = eval_big(lat, t.term)
        return relabel(r, lat.join(r.label, t.label))
    raise StuckError(f"cannot evaluate {show(t)}")


def show(t: RTerm) -> str:
    """Print a runtime term; stamps are written ``(t) \\/ ℓ``."""
    if not _has_stamp(t):
        return pretty(t)
    if isinstance(t, Stamp):
        return f"({show(t.term)}) \\/ {t.label}"
    if isinstance(t, BinOp):
        return f"{_wrap(t.lhs)} {t.op} {_wrap(t.rhs)}"
    if isinstance(t, App):
        return f"{_wrap(t.fun)} {_wrap(t.arg)}"
    if isinstance(t, If):
        return f"if {show(t.cond)} then {show(t.then)} else {show(t.else_)}"
    if isinstance(t, Ascribe):
        return f"{_wrap(t.term)} :: {format_type(t.type)}"
    raise TypeError(f"not a runtime term: {t!r}")


def _wrap(t: RTerm) -> str:
    s = show(t)
    return s if isinstance(t, (BoolLit, Lam, Var, Stamp)) else f"({s})"


def _has_stamp(t: RTerm) -> bool:
    if isinstance(t, Stamp):
        return True
    if isinstance(t, (BoolLit, Var, Lam)):
        return False
    if isinstance(t, App):
        return _has_stamp(t.fun) or _has_stamp(t.arg)
    if isinstance(t, BinOp):
        return _has_stamp(t.lhs) or _has_stamp(t.rhs)
    if isinstance(t, If):
        return _has_stamp(t.cond) or _has_stamp(t.then) or _has_stamp(t.else_)
    if isinstance(t, Ascribe):
        return _has_stamp(t.term)
    raise TypeError(f"not a runtime term: {t!r}")


def format_static_trace(terms: list[RTerm]) -> list[str]:
    """One line per term; every line after the first starts with ``-->``."""
    return [show(terms[0])] + [f"--> {show(t)}" for t in terms[1:]]
