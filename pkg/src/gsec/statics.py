"""Static security types: subtyping, subtyping join/meet, stamping and the
syntax-directed checker for the fully static language."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Optional

from .lattice import UNKNOWN, SecurityLattice
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

TypeEnv = Mapping[str, Type]


@dataclass(frozen=True)
class Stamp:
    """Term stamping ``t ⋎ ℓ``; produced only by small-step reduction."""

    term: object
    label: str


class TypeCheckError(Exception):
    """A typing rule could not be applied.  ``rule`` names the failing rule."""

    def __init__(self, rule: str, message: str, span: Optional[Span] = None):
        where = f"{span}: " if span is not None else ""
        super().__init__(f"{where}{rule}: {message}")
        self.rule = rule
        self.message = message
        self.span = span


def subtype(lat: SecurityLattice, s1: Type, s2: Type) -> bool:
    if isinstance(s1, Bool) and isinstance(s2, Bool):
        return lat.leq(s1.label, s2.label)
    if isinstance(s1, Fun) and isinstance(s2, Fun):
        return (
            lat.leq(s1.label, s2.label)
            and subtype(lat, s2.dom, s1.dom)
            and subtype(lat, s1.cod, s2.cod)
        )
    return False


def sub_join(lat: SecurityLattice, s1: Type, s2: Type) -> Optional[Type]:
    """Least upper bound w.r.t. subtyping; ``None`` when the shapes differ."""
    if isinstance(s1, Bool) and isinstance(s2, Bool):
        return Bool(lat.join(s1.label, s2.label))
    if isinstance(s1, Fun) and isinstance(s2, Fun):
        dom = sub_meet(lat, s1.dom, s2.dom)
        cod = sub_join(lat, s1.cod, s2.cod)
        if dom is None or cod is None:
            return None
        return Fun(dom, cod, lat.join(s1.label, s2.label))
    return None


def sub_meet(lat: SecurityLattice, s1: Type, s2: Type) -> Optional[Type]:
    if isinstance(s1, Bool) and isinstance(s2, Bool):
        return Bool(lat.meet(s1.label, s2.label))
    if isinstance(s1, Fun) and isinstance(s2, Fun):
        dom = sub_join(lat, s1.dom, s2.dom)
        cod = sub_meet(lat, s1.cod, s2.cod)
        if dom is None or cod is None:
            return None
        return Fun(dom, cod, lat.meet(s1.label, s2.label))
    return None


def stamp(lat: SecurityLattice, s: Type, label: str) -> Type:
    """Raise the top-level label of ``s`` by joining it with ``label``."""
    if isinstance(s, Bool):
        return Bool(lat.join(s.label, label))
    return Fun(s.dom, s.cod, lat.join(s.label, label))


def _static_label(lat: SecurityLattice, label: str, rule: str, span: Optional[Span]) -> str:
    if label == UNKNOWN:
        raise TypeCheckError(rule, "unknown label '?' is not allowed in a static program", span)
    if label not in lat:
        raise TypeCheckError(rule, f"label {label!r} is not in lattice {lat.name!r}", span)
    return label


def _static_type(lat: SecurityLattice, t: Type, rule: str, span: Optional[Span]) -> Type:
    for lab in type_labels(t):
        _static_label(lat, lab, rule, span)
    return t


def rule_op(lat: SecurityLattice, op: str, s1: Type, s2: Type, span: Optional[Span] = None) -> Type:
    for side, s in (("left", s1), ("right", s2)):
        if not isinstance(s, Bool):
            raise TypeCheckError("(S⊕)", f"{side} operand of {op} has type {format_type(s)}", span)
    return Bool(lat.join(s1.label, s2.label))


def rule_app(lat: SecurityLattice, s1: Type, s2: Type, span: Optional[Span] = None) -> Type:
    if not isinstance(s1, Fun):
        raise TypeCheckError("(Sapp)", f"applying a non-function of type {format_type(s1)}", span)
    if not subtype(lat, s2, s1.dom):
        raise TypeCheckError(
            "(Sapp)", f"argument type {format_type(s2)} is not a subtype of {format_type(s1.dom)}", span
        )
    return stamp(lat, s1.cod, s1.label)


def rule_if(lat: SecurityLattice, sc: Type, s1: Type, s2: Type, span: Optional[Span] = None) -> Type:
    if not isinstance(sc, Bool):
        raise TypeCheckError("(Sif)", f"condition has type {format_type(sc)}", span)
    joined = sub_join(lat, s1, s2)
    if joined is None:
        raise TypeCheckError(
            "(Sif)", f"branch types {format_type(s1)} and {format_type(s2)} have no join", span
        )
    return stamp(lat, joined, sc.label)


def rule_asc(lat: SecurityLattice, s: Type, target: Type, span: Optional[Span] = None) -> Type:
    _static_type(lat, target, "(S::)", span)
    if not subtype(lat, s, target):
        raise TypeCheckError("(S::)", f"{format_type(s)} is not a subtype of {format_type(target)}", span)
    return target


def typecheck_static(lat: SecurityLattice, env: TypeEnv, t: Term) -> Type:
    """Type of ``t`` under ``env``; raises :class:`TypeCheckError`."""
    if isinstance(t, Var):
        if t.name not in env:
            raise TypeCheckError("(Sx)", f"unbound variable {t.name!r}", t.span)
        return env[t.name]
    if isinstance(t, BoolLit):
        return Bool(_static_label(lat, t.label, "(Sb)", t.span))
    if isinstance(t, Lam):
        annot = _static_type(lat, t.annot, "(Sλ)", t.span)
        label = _static_label(lat, t.label, "(Sλ)", t.span)
        body = typecheck_static(lat, {**env, t.param: annot}, t.body)
        return Fun(annot, body, label)
    if isinstance(t, BinOp):
        return rule_op(lat, t.op, typecheck_static(lat, env, t.lhs), typecheck_static(lat, env, t.rhs), t.span)
    if isinstance(t, App):
        return rule_app(lat, typecheck_static(lat, env, t.fun), typecheck_static(lat, env, t.arg), t.span)
    if isinstance(t, If):
        sc = typecheck_static(lat, env, t.cond)
        s1 = typecheck_static(lat, env, t.then)
        s2 = typecheck_static(lat, env, t.else_)
        return rule_if(lat, sc, s1, s2, t.span)
    if isinstance(t, Stamp):
        return stamp(lat, typecheck_static(lat, env, t.term), _static_label(lat, t.label, "(S⋎)", None))
    if isinstance(t, Ascribe):
        return rule_asc(lat, typecheck_static(lat, env, t.term), t.type, t.span)
    raise TypeError(f"not a term: {t!r}")
