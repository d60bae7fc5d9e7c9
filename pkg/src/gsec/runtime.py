"""Evidence-based reduction of intrinsic terms.

A step either contracts a redex, combines two evidences around an ascribed
value (tagged ``−→c``), or fails because two evidences cannot be combined.
Frames are searched left to right; reduction happens under an evidence
wrapper exactly as it would at the top.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Optional, Union

from .elaborate import (
    Ev,
    IApp,
    IAsc,
    IIf,
    ILam,
    ILit,
    IOp,
    ITerm,
    IVar,
    is_ascribed_value,
    is_simple_value,
    is_value,
    show,
)
from .gradual import Evidence, consistent_transitivity, glabel_join, gstamp, icod, idom
from .lattice import SecurityLattice
from .syntax import Bool, Span, apply_op

NOTION = "↦"
COMBINE = "−→c"


@dataclass(frozen=True)
class Value:
    value: ITerm


@dataclass(frozen=True)
class Error:
    """Two evidences failed to combine (``first ∘ second`` is undefined)."""

    first: Evidence
    second: Evidence
    span: Optional[Span]
    kind: str = COMBINE

    def __str__(self) -> str:
        where = str(self.span) if self.span is not None else "?"
        return f"cannot combine {self.first} with {self.second} at {where}"


@dataclass(frozen=True)
class Step:
    term: ITerm
    kind: str


Outcome = Union[Value, Error, Step]


class Stuck(RuntimeError):
    """A closed, well-formed non-value had no applicable rule."""


class FuelExhausted(RuntimeError):
    pass


# -- substitution ------------------------------------------------------------


def subst(t: ITerm, name: str, v: ITerm) -> ITerm:
    """Replace free ``name`` in ``t`` by the closed value ``v``.

    Values substituted at runtime are closed, so no binder in ``t`` can capture
    one of their variables and renaming is never needed.
    """
    if isinstance(t, IVar):
        return v if t.name == name else t
    if isinstance(t, ILit):
        return t
    if isinstance(t, ILam):
        if t.param == name:
            return t
        return replace(t, body=subst(t.body, name, v))
    if isinstance(t, IOp):
        return replace(t, lhs=_subst_ev(t.lhs, name, v), rhs=_subst_ev(t.rhs, name, v))
    if isinstance(t, IApp):
        return replace(t, fun=_subst_ev(t.fun, name, v), arg=_subst_ev(t.arg, name, v))
    if isinstance(t, IIf):
        return replace(
            t,
            cond=_subst_ev(t.cond, name, v),
            then=_subst_ev(t.then, name, v),
            else_=_subst_ev(t.else_, name, v),
        )
    if isinstance(t, IAsc):
        return replace(t, term=_subst_ev(t.term, name, v))
    raise TypeError(f"not an intrinsic term: {t!r}")


def _subst_ev(e: Ev, name: str, v: ITerm) -> Ev:
    return replace(e, term=subst(e.term, name, v))


# -- reduction ---------------------------------------------------------------


def combine_step(lat: SecurityLattice, et: Ev) -> Union[Ev, Error]:
    """``ε1(⟨ε2⟩u :: S)`` becomes ``(ε2 ∘ ε1)u``."""
    inner = et.term
    assert isinstance(inner, IAsc) and is_simple_value(inner.term.term)
    ev = consistent_transitivity(lat, inner.term.ev, et.ev)
    if ev is None:
        return Error(inner.term.ev, et.ev, et.span)
    return Ev(ev, inner.term.term, et.span)


def _stamp_right(lat: SecurityLattice, e: Evidence, label: str) -> Evidence:
    return Evidence(e.left, gstamp(lat, e.right, label))


def notion_step(lat: SecurityLattice, t: ITerm) -> Union[ITerm, Error]:
    """Contract a redex whose evidence positions all hold simple values."""
    if isinstance(t, IOp):
        (e1, u1), (e2, u2) = (t.lhs.ev, t.lhs.term), (t.rhs.ev, t.rhs.term)
        assert isinstance(u1, ILit) and isinstance(u2, ILit)
        ev = Evidence(
            Bool(glabel_join(lat, e1.left.label, e2.left.label)),
            Bool(glabel_join(lat, e1.right.label, e2.right.label)),
        )
        res = ILit(apply_op(t.op, u1.value, u2.value), glabel_join(lat, u1.label, u2.label), t.span)
        return IAsc(Ev(ev, res, t.span), t.type, t.span)
    if isinstance(t, IApp):
        lam, u = t.fun.term, t.arg.term
        assert isinstance(lam, ILam)
        dom = idom(t.fun.ev)
        arg_ev = consistent_transitivity(lat, t.arg.ev, dom)
        if arg_ev is None:
            return Error(t.arg.ev, dom, t.arg.span, NOTION)
        arg = IAsc(Ev(arg_ev, u, t.arg.span), lam.annot, t.arg.span)
        body = subst(lam.body, lam.param, arg)
        return IAsc(Ev(icod(lat, t.fun.ev), body, t.span), t.type, t.span)
    if isinstance(t, IIf):
        c = t.cond.term
        assert isinstance(c, ILit)
        branch = t.then if c.value else t.else_
        # The branch result must carry the level of the guard that chose it.
        ev = _stamp_right(lat, branch.ev, t.cond.ev.right.label)
        return IAsc(Ev(ev, branch.term, branch.span), t.type, t.span)
    raise Stuck(f"no reduction for {show(t)}")


def _step_ev(lat: SecurityLattice, e: Ev) -> Optional[Union[tuple[Ev, str], Error]]:
    """Advance the term inside an evidence hole; ``None`` if it is a simple value."""
    if is_simple_value(e.term):
        return None
    if is_ascribed_value(e.term):
        r = combine_step(lat, e)
        return r if isinstance(r, Error) else (r, COMBINE)
    out = step(lat, e.term)
    if isinstance(out, Step):
        return replace(e, term=out.term), out.kind
    if isinstance(out, Error):
        return out
    raise Stuck(f"value in evidence hole was not simple: {show(e.term)}")


def step(lat: SecurityLattice, t: ITerm) -> Outcome:
    """One step of ``t``: ``Value`` if it is already a value."""
    if is_value(t):
        return Value(t)
    if isinstance(t, IVar):
        raise Stuck(f"free variable {t.name!r}")
    slots = {IOp: ("lhs", "rhs"), IApp: ("fun", "arg"), IIf: ("cond",), IAsc: ("term",)}[type(t)]
    for slot in slots:
        r = _step_ev(lat, getattr(t, slot))
        if r is None:
            continue
        if isinstance(r, Error):
            return r
        e, kind = r
        return Step(replace(t, **{slot: e}), kind)
    if isinstance(t, IAsc):
        raise Stuck(f"ascription of a non-value: {show(t)}")
    out = notion_step(lat, t)
    return out if isinstance(out, Error) else Step(out, NOTION)


@dataclass(frozen=True)
class Run:
    outcome: Union[Value, Error]
    trace: tuple[Step, ...]

    @property
    def steps(self) -> int:
        return len(self.trace)


def evaluate(lat: SecurityLattice, t: ITerm, fuel: int = 10_000) -> Run:
    trace: list[Step] = []
    cur = t
    for _ in range(fuel + 1):
        out = step(lat, cur)
        if isinstance(out, Step):
            trace.append(out)
            cur = out.term
            continue
        return Run(out, tuple(trace))
    raise FuelExhausted(f"no value after {fuel} steps")


def format_trace(t: ITerm, run: Run) -> list[str]:
    lines = [f"0    {show(t)}"]
    for i, st in enumerate(run.trace, 1):
        lines.append(f"{i:<4} {st.kind} {show(st.term)}")
    if isinstance(run.outcome, Error):
        lines.append(f"{len(run.trace) + 1:<4} {run.outcome.kind} error")
        lines.append(f"ERROR: {run.outcome}")
    else:
        lines.append(f"VALUE: {show(run.outcome.value)}")
    return lines


# -- observations ------------------------------------------------------------


def bare_value(v: ITerm) -> object:
    """Strip labels, evidence and ascriptions.  Functions are opaque."""
    if isinstance(v, IAsc):
        v = v.term.term
    if isinstance(v, ILit):
        return v.value
    if isinstance(v, ILam):
        return "<fun>"
    raise TypeError(f"not a value: {v!r}")


def raw_value(v: ITerm) -> ITerm:
    return v.term.term if isinstance(v, IAsc) else v
