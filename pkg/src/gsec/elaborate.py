"""Gradual type checking and elaboration into evidence-carrying terms.

Checking and elaboration are one pass: every place where the gradual checker
needs a consistent-subtyping premise ``S ≲ S'`` records the interior of that
judgment as the initial evidence.  The checker's answer is simply the type of
the elaborated term.

Intrinsic terms are immutable.  Every node knows its type; subterms sitting
under a consistent judgment are wrapped in :class:`Ev`.  At runtime an
ascription node whose body is ``Ev(ε, u)`` with ``u`` a literal or lambda is
a value.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Optional, Union

from .gradual import (
    Evidence,
    csub_join,
    csubtype,
    gstamp,
    glabel_join,
    interior_type,
    precision_evidence,
    precision_label,
    precision_type,
)
from .lattice import UNKNOWN, SecurityLattice
from .statics import TypeCheckError
from .syntax import (
    App,
    Ascribe,
    BinOp,
    Bool,
    BoolLit,
    Fun,
    If,
    Lam,
    Span,
    Term,
    Type,
    Var,
    format_type,
    type_labels,
)

GEnv = Mapping[str, Type]


# -- intrinsic terms ---------------------------------------------------------


@dataclass(frozen=True)
class IVar:
    name: str
    type: Type
    span: Optional[Span] = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class ILit:
    value: bool
    label: str
    span: Optional[Span] = field(default=None, compare=False, repr=False)

    @property
    def type(self) -> Type:
        return Bool(self.label)


@dataclass(frozen=True)
class ILam:
    param: str
    annot: Type
    body: "ITerm"
    label: str
    span: Optional[Span] = field(default=None, compare=False, repr=False)

    @property
    def type(self) -> Type:
        return Fun(self.annot, self.body.type, self.label)


@dataclass(frozen=True)
class Ev:
    """A subterm together with the evidence for its consistent judgment."""

    ev: Evidence
    term: "ITerm"
    span: Optional[Span] = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class IOp:
    """``lhs ⊕ rhs`` where the operands were checked against ``Bool@l1`` and
    ``Bool@l2``."""

    op: str
    lhs: Ev
    rhs: Ev
    l1: str
    l2: str
    type: Type
    span: Optional[Span] = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class IApp:
    fun: Ev
    arg: Ev
    index: Fun
    type: Type
    span: Optional[Span] = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class IIf:
    cond: Ev
    then: Ev
    else_: Ev
    cond_label: str
    type: Type
    span: Optional[Span] = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class IAsc:
    term: Ev
    type: Type
    span: Optional[Span] = field(default=None, compare=False, repr=False)


ITerm = Union[IVar, ILit, ILam, IOp, IApp, IIf, IAsc]
SimpleValue = Union[ILit, ILam]


def is_simple_value(t: ITerm) -> bool:
    return isinstance(t, (ILit, ILam))


def is_ascribed_value(t: ITerm) -> bool:
    return isinstance(t, IAsc) and is_simple_value(t.term.term)


def is_value(t: ITerm) -> bool:
    return is_simple_value(t) or is_ascribed_value(t)


# -- type rules ----------------------------------------------------------------


def _check_label(lat: SecurityLattice, label: str, rule: str, span: Optional[Span]) -> str:
    if label != UNKNOWN and label not in lat:
        raise TypeCheckError(rule, f"label {label!r} is not in lattice {lat.name!r}", span)
    return label


def _check_type(lat: SecurityLattice, t: Type, rule: str, span: Optional[Span]) -> Type:
    for lab in type_labels(t):
        _check_label(lat, lab, rule, span)
    return t


def _judge(lat: SecurityLattice, s: Type, target: Type, rule: str, what: str, span) -> Evidence:
    ev = interior_type(lat, s, target)
    if ev is None:
        raise TypeCheckError(
            rule, f"{what} type {format_type(s)} is not consistent with {format_type(target)}", span
        )
    return ev


def grule_op(lat: SecurityLattice, op: str, s1: Type, s2: Type, span=None) -> Type:
    for side, s in (("left", s1), ("right", s2)):
        if not isinstance(s, Bool):
            raise TypeCheckError("(S̃⊕)", f"{side} operand of {op} has type {format_type(s)}", span)
    return Bool(glabel_join(lat, s1.label, s2.label))


def grule_app(lat: SecurityLattice, s1: Type, s2: Type, span=None) -> Type:
    if not isinstance(s1, Fun):
        raise TypeCheckError("(S̃app)", f"applying a non-function of type {format_type(s1)}", span)
    if not csubtype(lat, s2, s1.dom):
        raise TypeCheckError(
            "(S̃app)",
            f"argument type {format_type(s2)} is not consistent with {format_type(s1.dom)}",
            span,
        )
    return gstamp(lat, s1.cod, s1.label)


def grule_if(lat: SecurityLattice, sc: Type, s1: Type, s2: Type, span=None) -> Type:
    if not isinstance(sc, Bool):
        raise TypeCheckError("(S̃if)", f"condition has type {format_type(sc)}", span)
    joined = csub_join(lat, s1, s2)
    if joined is None:
        raise TypeCheckError(
            "(S̃if)", f"branch types {format_type(s1)} and {format_type(s2)} have no join", span
        )
    return gstamp(lat, joined, sc.label)


def grule_asc(lat: SecurityLattice, s: Type, target: Type, span=None) -> Type:
    _check_type(lat, target, "(S̃::)", span)
    if not csubtype(lat, s, target):
        raise TypeCheckError(
            "(S̃::)", f"{format_type(s)} is not consistent with {format_type(target)}", span
        )
    return target


# -- elaboration -------------------------------------------------------------


def elaborate(lat: SecurityLattice, env: GEnv, t: Term) -> ITerm:
    """Check ``t`` against the gradual rules and build its intrinsic form."""
    if isinstance(t, Var):
        if t.name not in env:
            raise TypeCheckError("(S̃x)", f"unbound variable {t.name!r}", t.span)
        return IVar(t.name, env[t.name], t.span)
    if isinstance(t, BoolLit):
        return ILit(t.value, _check_label(lat, t.label, "(S̃b)", t.span), t.span)
    if isinstance(t, Lam):
        annot = _check_type(lat, t.annot, "(S̃λ)", t.span)
        label = _check_label(lat, t.label, "(S̃λ)", t.span)
        body = elaborate(lat, {**env, t.param: annot}, t.body)
        return ILam(t.param, annot, body, label, t.span)
    if isinstance(t, BinOp):
        a = elaborate(lat, env, t.lhs)
        b = elaborate(lat, env, t.rhs)
        ty = grule_op(lat, t.op, a.type, b.type, t.span)
        return IOp(
            t.op,
            Ev(interior_type(lat, a.type, a.type), a, t.lhs.span),
            Ev(interior_type(lat, b.type, b.type), b, t.rhs.span),
            a.type.label,
            b.type.label,
            ty,
            t.span,
        )
    if isinstance(t, App):
        f = elaborate(lat, env, t.fun)
        a = elaborate(lat, env, t.arg)
        ty = grule_app(lat, f.type, a.type, t.span)
        index = f.type
        return IApp(
            Ev(interior_type(lat, index, index), f, t.fun.span),
            Ev(_judge(lat, a.type, index.dom, "(S̃app)", "argument", t.span), a, t.arg.span),
            index,
            ty,
            t.span,
        )
    if isinstance(t, If):
        c = elaborate(lat, env, t.cond)
        a = elaborate(lat, env, t.then)
        b = elaborate(lat, env, t.else_)
        ty = grule_if(lat, c.type, a.type, b.type, t.span)
        return IIf(
            Ev(interior_type(lat, c.type, c.type), c, t.cond.span),
            Ev(_judge(lat, a.type, ty, "(S̃if)", "branch", t.span), a, t.then.span),
            Ev(_judge(lat, b.type, ty, "(S̃if)", "branch", t.span), b, t.else_.span),
            c.type.label,
            ty,
            t.span,
        )
    if isinstance(t, Ascribe):
        a = elaborate(lat, env, t.term)
        ty = grule_asc(lat, a.type, t.type, t.span)
        return IAsc(Ev(_judge(lat, a.type, ty, "(S̃::)", "ascribed", t.span), a, t.term.span), ty, t.span)
    raise TypeError(f"not a term: {t!r}")


def typecheck_gradual(lat: SecurityLattice, env: GEnv, t: Term) -> Type:
    return elaborate(lat, env, t).type


def term_precision(t1: Term, t2: Term) -> bool:
    """``t1 ⊑ t2``: same shape, every label and annotation of ``t1`` at least
    as precise as the corresponding one in ``t2``."""
    if type(t1) is not type(t2):
        return False
    if isinstance(t1, Var):
        return t1.name == t2.name
    if isinstance(t1, BoolLit):
        return t1.value == t2.value and precision_label(t1.label, t2.label)
    if isinstance(t1, Lam):
        return (
            t1.param == t2.param
            and precision_label(t1.label, t2.label)
            and precision_type(t1.annot, t2.annot)
            and term_precision(t1.body, t2.body)
        )
    if isinstance(t1, BinOp):
        return t1.op == t2.op and term_precision(t1.lhs, t2.lhs) and term_precision(t1.rhs, t2.rhs)
    if isinstance(t1, App):
        return term_precision(t1.fun, t2.fun) and term_precision(t1.arg, t2.arg)
    if isinstance(t1, If):
        return all(term_precision(a, b) for a, b in ((t1.cond, t2.cond), (t1.then, t2.then), (t1.else_, t2.else_)))
    if isinstance(t1, Ascribe):
        return precision_type(t1.type, t2.type) and term_precision(t1.term, t2.term)
    raise TypeError(f"not a term: {t1!r}")


# -- well-formedness ---------------------------------------------------------


class IllFormed(Exception):
    """An intrinsic term violates a formation rule."""


def _ev_ok(lat: SecurityLattice, e: Ev, target: Type) -> None:
    src = recompute_type(lat, e.term)
    best = interior_type(lat, src, target)
    if best is None or not precision_evidence(e.ev, best):
        raise IllFormed(f"evidence {e.ev} does not justify {format_type(src)} ≲ {format_type(target)}")


def recompute_type(lat: SecurityLattice, t: ITerm) -> Type:
    """Re-derive the type of ``t`` bottom-up, checking every stored type and
    every evidence along the way."""
    if isinstance(t, (IVar, ILit)):
        return t.type
    if isinstance(t, ILam):
        return Fun(t.annot, recompute_type(lat, t.body), t.label)
    if isinstance(t, IOp):
        _ev_ok(lat, t.lhs, Bool(t.l1))
        _ev_ok(lat, t.rhs, Bool(t.l2))
        expected = Bool(glabel_join(lat, t.l1, t.l2))
    elif isinstance(t, IApp):
        _ev_ok(lat, t.fun, t.index)
        _ev_ok(lat, t.arg, t.index.dom)
        expected = gstamp(lat, t.index.cod, t.index.label)
    elif isinstance(t, IIf):
        _ev_ok(lat, t.cond, Bool(t.cond_label))
        s2 = recompute_type(lat, t.then.term)
        s3 = recompute_type(lat, t.else_.term)
        joined = csub_join(lat, s2, s3)
        if joined is None:
            raise IllFormed("branch types have no join")
        expected = gstamp(lat, joined, t.cond_label)
        _ev_ok(lat, t.then, expected)
        _ev_ok(lat, t.else_, expected)
    elif isinstance(t, IAsc):
        _ev_ok(lat, t.term, t.type)
        expected = t.type
    else:
        raise TypeError(f"not an intrinsic term: {t!r}")
    if expected != t.type:
        raise IllFormed(f"stored type {format_type(t.type)} but formation gives {format_type(expected)}")
    return expected


# -- printing ----------------------------------------------------------------


def show(t: ITerm) -> str:
    """Concrete rendering: evidence as ``<T1, T2>`` prefixes, ascription as ``:: T``."""
    if isinstance(t, ILit):
        return f"{'true' if t.value else 'false'}@{t.label}"
    if isinstance(t, IVar):
        return t.name
    if isinstance(t, ILam):
        return f"(\\{t.param}:{format_type(t.annot)}. {show(t.body)})@{t.label}"
    if isinstance(t, IOp):
        return f"{show_ev(t.lhs)} {t.op} {show_ev(t.rhs)}"
    if isinstance(t, IApp):
        return f"{show_ev(t.fun)} {show_ev(t.arg)}"
    if isinstance(t, IIf):
        return f"if {show_ev(t.cond)} then {show_ev(t.then)} else {show_ev(t.else_)}"
    if isinstance(t, IAsc):
        return f"{show_ev(t.term, bare=True)} :: {format_type(t.type)}"
    raise TypeError(f"not an intrinsic term: {t!r}")


def show_ev(e: Ev, bare: bool = False) -> str:
    inner = show(e.term)
    if not isinstance(e.term, (ILit, IVar, ILam)):
        inner = f"({inner})"
    s = f"{e.ev}{inner}"
    return s if bare else f"({s})"
