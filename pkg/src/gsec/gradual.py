"""Gradual labels and types, their meaning as sets of static ones, and the
evidence operations used by the runtime.

A gradual label is a lattice element name or ``"?"``.  Gradual types reuse
:class:`~gsec.syntax.Bool` and :class:`~gsec.syntax.Fun`.  Every partial
operation returns ``None`` when undefined; callers decide whether that is a
type error or a runtime error.

Alongside each closed-form operation there is a brute-force version that goes
through concretization and abstraction directly.  Those are slow and only
meant as oracles for tests and the property harness.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from itertools import product
from typing import Iterable, Optional

from .lattice import UNKNOWN, SecurityLattice
from .statics import subtype
from .syntax import Bool, Fun, Type, format_type, type_depth

LabelEvidence = tuple[str, str]


@dataclass(frozen=True)
class Evidence:
    """A pair of gradual types justifying ``left ≲ right``."""

    left: Type
    right: Type

    def __str__(self) -> str:
        return f"<{format_type(self.left)}, {format_type(self.right)}>"


# -- concretization / abstraction --------------------------------------------


def gamma_label(lat: SecurityLattice, gl: str) -> frozenset[str]:
    if gl == UNKNOWN:
        return frozenset(lat.elements)
    lat.check(gl)
    return frozenset((gl,))


def alpha_label(lat: SecurityLattice, labels: Iterable[str]) -> Optional[str]:
    ls = set(labels)
    if not ls:
        return None
    lat.check(*ls)
    if len(ls) == 1:
        return next(iter(ls))
    return UNKNOWN


def gamma_type(lat: SecurityLattice, gt: Type) -> frozenset[Type]:
    if isinstance(gt, Bool):
        return frozenset(Bool(lab) for lab in gamma_label(lat, gt.label))
    return frozenset(
        Fun(d, c, lab)
        for d, c, lab in product(
            gamma_type(lat, gt.dom), gamma_type(lat, gt.cod), gamma_label(lat, gt.label)
        )
    )


def alpha_type(lat: SecurityLattice, types: Iterable[Type]) -> Optional[Type]:
    """Most precise gradual type covering ``types``; ``None`` for an empty or
    invalid set (one mixing type constructors at some position)."""
    ts = list(types)
    if not ts:
        return None
    if all(isinstance(t, Bool) for t in ts):
        return Bool(alpha_label(lat, (t.label for t in ts)))
    if all(isinstance(t, Fun) for t in ts):
        dom = alpha_type(lat, [t.dom for t in ts])
        cod = alpha_type(lat, [t.cod for t in ts])
        if dom is None or cod is None:
            return None
        return Fun(dom, cod, alpha_label(lat, (t.label for t in ts)))
    return None


# -- precision ---------------------------------------------------------------


def precision_label(gl1: str, gl2: str) -> bool:
    """``gl1 ⊑ gl2``: ``gl1`` is at least as precise as ``gl2``."""
    return gl2 == UNKNOWN or gl1 == gl2


def precision_type(gt1: Type, gt2: Type) -> bool:
    if isinstance(gt1, Bool) and isinstance(gt2, Bool):
        return precision_label(gt1.label, gt2.label)
    if isinstance(gt1, Fun) and isinstance(gt2, Fun):
        return (
            precision_label(gt1.label, gt2.label)
            and precision_type(gt1.dom, gt2.dom)
            and precision_type(gt1.cod, gt2.cod)
        )
    return False


def precision_evidence(e1: Evidence, e2: Evidence) -> bool:
    return precision_type(e1.left, e2.left) and precision_type(e1.right, e2.right)


# -- consistent predicates and gradual join/meet -----------------------------


def clabel_leq(lat: SecurityLattice, gl1: str, gl2: str) -> bool:
    if gl1 == UNKNOWN or gl2 == UNKNOWN:
        return True
    return lat.leq(gl1, gl2)


def glabel_join(lat: SecurityLattice, gl1: str, gl2: str) -> str:
    if gl1 == UNKNOWN and gl2 == UNKNOWN:
        return UNKNOWN
    if gl1 == UNKNOWN or gl2 == UNKNOWN:
        known = gl2 if gl1 == UNKNOWN else gl1
        lat.check(known)
        return lat.top if known == lat.top else UNKNOWN
    return lat.join(gl1, gl2)


def glabel_meet(lat: SecurityLattice, gl1: str, gl2: str) -> str:
    if gl1 == UNKNOWN and gl2 == UNKNOWN:
        return UNKNOWN
    if gl1 == UNKNOWN or gl2 == UNKNOWN:
        known = gl2 if gl1 == UNKNOWN else gl1
        lat.check(known)
        return lat.bottom if known == lat.bottom else UNKNOWN
    return lat.meet(gl1, gl2)


def gstamp(lat: SecurityLattice, gt: Type, gl: str) -> Type:
    if isinstance(gt, Bool):
        return Bool(glabel_join(lat, gt.label, gl))
    return Fun(gt.dom, gt.cod, glabel_join(lat, gt.label, gl))


def csubtype(lat: SecurityLattice, gt1: Type, gt2: Type) -> bool:
    if isinstance(gt1, Bool) and isinstance(gt2, Bool):
        return clabel_leq(lat, gt1.label, gt2.label)
    if isinstance(gt1, Fun) and isinstance(gt2, Fun):
        return (
            clabel_leq(lat, gt1.label, gt2.label)
            and csubtype(lat, gt2.dom, gt1.dom)
            and csubtype(lat, gt1.cod, gt2.cod)
        )
    return False


def csub_join(lat: SecurityLattice, gt1: Type, gt2: Type) -> Optional[Type]:
    if isinstance(gt1, Bool) and isinstance(gt2, Bool):
        return Bool(glabel_join(lat, gt1.label, gt2.label))
    if isinstance(gt1, Fun) and isinstance(gt2, Fun):
        dom = csub_meet(lat, gt1.dom, gt2.dom)
        cod = csub_join(lat, gt1.cod, gt2.cod)
        if dom is None or cod is None:
            return None
        return Fun(dom, cod, glabel_join(lat, gt1.label, gt2.label))
    return None


def csub_meet(lat: SecurityLattice, gt1: Type, gt2: Type) -> Optional[Type]:
    if isinstance(gt1, Bool) and isinstance(gt2, Bool):
        return Bool(glabel_meet(lat, gt1.label, gt2.label))
    if isinstance(gt1, Fun) and isinstance(gt2, Fun):
        dom = csub_join(lat, gt1.dom, gt2.dom)
        cod = csub_meet(lat, gt1.cod, gt2.cod)
        if dom is None or cod is None:
            return None
        return Fun(dom, cod, glabel_meet(lat, gt1.label, gt2.label))
    return None


# -- precision meet ----------------------------------------------------------


def gmeet_label(gl1: str, gl2: str) -> Optional[str]:
    if gl1 == UNKNOWN:
        return gl2
    if gl2 == UNKNOWN or gl1 == gl2:
        return gl1
    return None


def gmeet_type(gt1: Type, gt2: Type) -> Optional[Type]:
    if isinstance(gt1, Bool) and isinstance(gt2, Bool):
        lab = gmeet_label(gt1.label, gt2.label)
        return None if lab is None else Bool(lab)
    if isinstance(gt1, Fun) and isinstance(gt2, Fun):
        lab = gmeet_label(gt1.label, gt2.label)
        dom = gmeet_type(gt1.dom, gt2.dom)
        cod = gmeet_type(gt1.cod, gt2.cod)
        if lab is None or dom is None or cod is None:
            return None
        return Fun(dom, cod, lab)
    return None


# -- interior ----------------------------------------------------------------


def interior_label(lat: SecurityLattice, gl1: str, gl2: str) -> Optional[LabelEvidence]:
    if gl1 == gl2:
        if gl1 != UNKNOWN:
            lat.check(gl1)
        return (gl1, gl2)
    if gl2 == UNKNOWN:
        lat.check(gl1)
        return (lat.top, lat.top) if gl1 == lat.top else (gl1, UNKNOWN)
    if gl1 == UNKNOWN:
        lat.check(gl2)
        return (lat.bottom, lat.bottom) if gl2 == lat.bottom else (UNKNOWN, gl2)
    # Two distinct static labels: the pair itself if ordered.
    return (gl1, gl2) if lat.leq(gl1, gl2) else None


@lru_cache(maxsize=1 << 16)
def interior_type(lat: SecurityLattice, gt1: Type, gt2: Type) -> Optional[Evidence]:
    if isinstance(gt1, Bool) and isinstance(gt2, Bool):
        lab = interior_label(lat, gt1.label, gt2.label)
        return None if lab is None else Evidence(Bool(lab[0]), Bool(lab[1]))
    if isinstance(gt1, Fun) and isinstance(gt2, Fun):
        dom = interior_type(lat, gt2.dom, gt1.dom)
        cod = interior_type(lat, gt1.cod, gt2.cod)
        lab = interior_label(lat, gt1.label, gt2.label)
        if dom is None or cod is None or lab is None:
            return None
        return Evidence(Fun(dom.right, cod.left, lab[0]), Fun(dom.left, cod.right, lab[1]))
    return None


def interior_label_oracle(lat: SecurityLattice, gl1: str, gl2: str) -> Optional[LabelEvidence]:
    pairs = [
        (a, b) for a in gamma_label(lat, gl1) for b in gamma_label(lat, gl2) if lat.leq(a, b)
    ]
    if not pairs:
        return None
    return (alpha_label(lat, (a for a, _ in pairs)), alpha_label(lat, (b for _, b in pairs)))


def interior_type_oracle(lat: SecurityLattice, gt1: Type, gt2: Type) -> Optional[Evidence]:
    pairs = [
        (s1, s2)
        for s1 in gamma_type(lat, gt1)
        for s2 in gamma_type(lat, gt2)
        if subtype(lat, s1, s2)
    ]
    if not pairs:
        return None
    left = alpha_type(lat, (s for s, _ in pairs))
    right = alpha_type(lat, (s for _, s in pairs))
    return Evidence(left, right)


# -- merge and consistent transitivity ---------------------------------------


def merge_label(lat: SecurityLattice, gl1: str, gl2: str, gl3: str) -> Optional[LabelEvidence]:
    """Combine the outer labels of two label evidences through the middle
    label ``gl2`` (already the precision meet of the inner labels)."""
    if gl2 == lat.top:
        return (gl1, lat.top) if clabel_leq(lat, lat.top, gl3) else None
    if gl2 == lat.bottom:
        return (lat.bottom, gl3) if clabel_leq(lat, gl1, lat.bottom) else None
    if (
        clabel_leq(lat, gl1, gl2)
        and clabel_leq(lat, gl2, gl3)
        # Without this premise a ``?`` middle would relate any two endpoints,
        # e.g. M1 and M2 in the diamond, and produce evidence for a false
        # judgment.
        and clabel_leq(lat, gl1, gl3)
    ):
        return (gl1, gl3)
    return None


def merge_type(lat: SecurityLattice, gt1: Type, gt2: Type, gt3: Type) -> Optional[Evidence]:
    if isinstance(gt1, Bool) and isinstance(gt2, Bool) and isinstance(gt3, Bool):
        lab = merge_label(lat, gt1.label, gt2.label, gt3.label)
        return None if lab is None else Evidence(Bool(lab[0]), Bool(lab[1]))
    if isinstance(gt1, Fun) and isinstance(gt2, Fun) and isinstance(gt3, Fun):
        dom = merge_type(lat, gt3.dom, gt2.dom, gt1.dom)
        cod = merge_type(lat, gt1.cod, gt2.cod, gt3.cod)
        lab = merge_label(lat, gt1.label, gt2.label, gt3.label)
        if dom is None or cod is None or lab is None:
            return None
        return Evidence(Fun(dom.right, cod.left, lab[0]), Fun(dom.left, cod.right, lab[1]))
    return None


@lru_cache(maxsize=1 << 16)
def consistent_transitivity(lat: SecurityLattice, e1: Evidence, e2: Evidence) -> Optional[Evidence]:
    """``e1 ∘ e2``: evidence for ``A ≲ C`` from evidences for ``A ≲ B`` and ``B ≲ C``."""
    middle = gmeet_type(e1.right, e2.left)
    if middle is None:
        return None
    return merge_type(lat, e1.left, middle, e2.right)


def merge_label_oracle(lat: SecurityLattice, gl1: str, gl2: str, gl3: str) -> Optional[LabelEvidence]:
    """Definitional combination: abstract every ``ℓ1 ≼ ℓ2 ≼ ℓ3`` chain."""
    chains = [
        (a, c)
        for a in gamma_label(lat, gl1)
        for b in gamma_label(lat, gl2)
        for c in gamma_label(lat, gl3)
        if lat.leq(a, b) and lat.leq(b, c)
    ]
    if not chains:
        return None
    return (alpha_label(lat, (a for a, _ in chains)), alpha_label(lat, (c for _, c in chains)))


# -- evidence inversion ------------------------------------------------------


def idom(e: Evidence) -> Optional[Evidence]:
    if not (isinstance(e.left, Fun) and isinstance(e.right, Fun)):
        return None
    return Evidence(e.right.dom, e.left.dom)


def icod(lat: SecurityLattice, e: Evidence) -> Optional[Evidence]:
    """Evidence for ``cod(left) ≲ cod(right) ⋎ label(right)``.

    Only the right codomain is stamped: the left side stands for the function
    body, whose own type carries no stamp yet.
    """
    if not (isinstance(e.left, Fun) and isinstance(e.right, Fun)):
        return None
    return Evidence(e.left.cod, gstamp(lat, e.right.cod, e.right.label))


# -- enumeration helpers -----------------------------------------------------


def gradual_labels(lat: SecurityLattice) -> tuple[str, ...]:
    return lat.elements + (UNKNOWN,)


def all_types(labels: Iterable[str], max_depth: int) -> list[Type]:
    """Every type over ``labels`` whose depth is at most ``max_depth``."""
    labels = tuple(labels)
    levels: list[list[Type]] = [[Bool(lab) for lab in labels]]
    for _ in range(1, max_depth):
        smaller = [t for lvl in levels for t in lvl]
        newest = [
            Fun(d, c, lab)
            for d in smaller
            for c in smaller
            for lab in labels
            if max(type_depth(d), type_depth(c)) == len(levels)
        ]
        levels.append(newest)
    return [t for lvl in levels for t in lvl]

