"""Exhaustive property checks over enumerated terms, types and labels.

Term corpora
------------
A corpus holds every term up to a depth bound (a leaf has depth 1).  Binders
are named by nesting level, so every alpha-equivalence class appears once.
Depth-3 corpora are large: about 2·10^7 static closed terms and 1.6·10^9
gradual ones on the two-point lattice.  The checks therefore split a corpus
of depth ``d`` into three disjoint parts:

* leaves, checked directly;
* lambdas whose body has depth ``≤ d-1``, checked directly;
* composite terms (application, operator, conditional, ascription) whose
  children have depth ``≤ d-1``.

Every child is checked and summarised directly.  The checkers and evaluators
are compositional: a composite's verdict depends only on its children's
summaries (their type, plus their final value where evaluation is involved).
So each combination of child summaries is checked once on a real
representative term and weighted by how many terms share it.  Counts in the
reports are numbers of terms, not numbers of combinations.  Each composite
check also re-runs a seeded random sample of composite terms end to end and
compares them with the prediction made from the summaries.
"""

from __future__ import annotations

import random
import time
from collections import Counter, defaultdict
from dataclasses import dataclass, field
from functools import lru_cache
from itertools import chain, combinations, product
from typing import Callable, Iterable, Iterator, Optional, Sequence

from .elaborate import IllFormed, ILit, IAsc, Ev, elaborate, grule_app, grule_asc, grule_if, grule_op
from .elaborate import recompute_type, show as show_intrinsic
from .gradual import (
    Evidence,
    all_types,
    alpha_label,
    alpha_type,
    clabel_leq,
    consistent_transitivity,
    csubtype,
    gamma_label,
    gstamp,
    gamma_type,
    gradual_labels,
    interior_label,
    interior_label_oracle,
    interior_type,
    interior_type_oracle,
    merge_label,
    merge_label_oracle,
    precision_label,
    precision_type,
)
from .lattice import TWO_POINT, UNKNOWN, SecurityLattice
from .runtime import FuelExhausted, Run, Stuck, Value, bare_value, evaluate, subst
from .static_eval import StuckError, eval_big, eval_small, trace_small
from .static_eval import show as show_runtime
from .statics import TypeCheckError, rule_app, rule_asc, rule_if, rule_op, stamp, sub_join, sub_meet, subtype
from .statics import typecheck_static
from .syntax import (
    OPS,
    App,
    Ascribe,
    BinOp,
    Bool,
    BoolLit,
    Fun,
    If,
    Lam,
    Term,
    Type,
    Var,
    parse,
    pretty,
    type_labels,
)

BINDERS = ("x", "y", "z", "w", "v")


# -- corpora -------------------------------------------------------------------


@dataclass(frozen=True)
class CorpusParams:
    lattice: SecurityLattice = TWO_POINT
    max_depth: int = 3
    type_depth: int = 2
    gradual: bool = False
    free: tuple[tuple[str, Type], ...] = ()

    @property
    def labels(self) -> tuple[str, ...]:
        return gradual_labels(self.lattice) if self.gradual else self.lattice.elements

    @property
    def types(self) -> tuple[Type, ...]:
        return _types(self.labels, self.type_depth)

    @property
    def env(self) -> dict[str, Type]:
        return dict(self.free)


@lru_cache(maxsize=None)
def _types(labels: tuple[str, ...], depth: int) -> tuple[Type, ...]:
    return tuple(all_types(labels, depth))


def leaves(params: CorpusParams, scope: tuple[str, ...]) -> list[Term]:
    lits = [BoolLit(b, lab) for b in (True, False) for lab in params.labels]
    return lits + [Var(n) for n in scope]


def _binder(scope: tuple[str, ...]) -> str:
    n = len(scope)
    return BINDERS[n] if n < len(BINDERS) else f"v{n}"


def lambdas(params: CorpusParams, depth: int, scope: tuple[str, ...]) -> Iterator[Term]:
    """Lambdas of depth ``≤ depth``."""
    if depth < 2:
        return
    name = _binder(scope)
    for annot in params.types:
        for body in iter_terms(params, depth - 1, scope + (name,)):
            for lab in params.labels:
                yield Lam(name, annot, body, lab)


def composites(params: CorpusParams, children: Sequence[Term]) -> Iterator[Term]:
    for f, a in product(children, repeat=2):
        yield App(f, a)
    for op in OPS:
        for a, b in product(children, repeat=2):
            yield BinOp(op, a, b)
    for c, a, b in product(children, repeat=3):
        yield If(c, a, b)
    for a in children:
        for ty in params.types:
            yield Ascribe(a, ty)


@lru_cache(maxsize=64)
def terms_upto(params: CorpusParams, depth: int, scope: tuple[str, ...]) -> tuple[Term, ...]:
    """Materialised list of every term of depth ``≤ depth`` over ``scope``."""
    return tuple(iter_terms(params, depth, scope))


def iter_terms(params: CorpusParams, depth: int, scope: tuple[str, ...]) -> Iterator[Term]:
    if depth < 1:
        return
    yield from leaves(params, scope)
    if depth == 1:
        return
    yield from lambdas(params, depth, scope)
    children = terms_upto(params, depth - 1, scope)
    yield from composites(params, children)


def scope_of(params: CorpusParams) -> tuple[str, ...]:
    return tuple(n for n, _ in params.free)


def enumerate_terms(params: CorpusParams) -> Iterator[Term]:
    """All terms up to ``params.max_depth`` whose free variables are among
    ``params.free``, in a fixed order."""
    if params.max_depth < 1 or params.type_depth < 1:
        raise ValueError("depth bounds must be at least 1")
    return iter_terms(params, params.max_depth, scope_of(params))


def count_terms(params: CorpusParams) -> int:
    """Size of the corpus from the counting recurrence of the grammar."""
    n_lab = len(params.labels)
    n_ty = len(params.types)

    @lru_cache(maxsize=None)
    def upto(d: int, k: int) -> int:
        if d < 1:
            return 0
        base = 2 * n_lab + k
        if d == 1:
            return base
        sub = upto(d - 1, k)
        lam = n_ty * upto(d - 1, k + 1) * n_lab
        return base + lam + sub * sub + len(OPS) * sub * sub + sub**3 + sub * n_ty

    return upto(params.max_depth, len(params.free))


def _composite_count(n_children: int, n_types: int) -> int:
    return n_children**2 * (1 + len(OPS)) + n_children**3 + n_children * n_types


def relaxations(t: Term) -> Iterator[Term]:
    """Every term obtained by replacing exactly one known label by ``?``."""
    if isinstance(t, BoolLit):
        if t.label != UNKNOWN:
            yield BoolLit(t.value, UNKNOWN)
    elif isinstance(t, Var):
        return
    elif isinstance(t, Lam):
        for ty in type_relaxations(t.annot):
            yield Lam(t.param, ty, t.body, t.label)
        for b in relaxations(t.body):
            yield Lam(t.param, t.annot, b, t.label)
        if t.label != UNKNOWN:
            yield Lam(t.param, t.annot, t.body, UNKNOWN)
    elif isinstance(t, App):
        yield from (App(f, t.arg) for f in relaxations(t.fun))
        yield from (App(t.fun, a) for a in relaxations(t.arg))
    elif isinstance(t, BinOp):
        yield from (BinOp(t.op, a, t.rhs) for a in relaxations(t.lhs))
        yield from (BinOp(t.op, t.lhs, b) for b in relaxations(t.rhs))
    elif isinstance(t, If):
        yield from (If(c, t.then, t.else_) for c in relaxations(t.cond))
        yield from (If(t.cond, a, t.else_) for a in relaxations(t.then))
        yield from (If(t.cond, t.then, b) for b in relaxations(t.else_))
    elif isinstance(t, Ascribe):
        yield from (Ascribe(a, t.type) for a in relaxations(t.term))
        yield from (Ascribe(t.term, ty) for ty in type_relaxations(t.type))


def type_relaxations(t: Type) -> Iterator[Type]:
    if t.label != UNKNOWN:
        yield Bool(UNKNOWN) if isinstance(t, Bool) else Fun(t.dom, t.cod, UNKNOWN)
    if isinstance(t, Fun):
        yield from (Fun(d, t.cod, t.label) for d in type_relaxations(t.dom))
        yield from (Fun(t.dom, c, t.label) for c in type_relaxations(t.cod))


# -- reports -------------------------------------------------------------------


@dataclass
class PropertyReport:
    name: str
    count: int = 0
    counterexamples: list[str] = field(default_factory=list)
    notes: list[str] = field(default_factory=list)
    elapsed: float = 0.0

    MAX_KEPT = 20

    @property
    def passed(self) -> bool:
        return not self.counterexamples and self._cex_total == 0

    _cex_total: int = 0

    def fail(self, message: str, weight: int = 1) -> None:
        self._cex_total += weight
        if len(self.counterexamples) < self.MAX_KEPT:
            self.counterexamples.append(message)

    @property
    def cex_count(self) -> int:
        return self._cex_total

    def line(self) -> str:
        return f"PROP {self.name} {'PASS' if self.passed else 'FAIL'} n={self.count} cex={self.cex_count}"

    def summary(self) -> str:
        out = [self.line() + f"  ({self.elapsed:.1f}s)"]
        out += [f"  note: {n}" for n in self.notes]
        out += [f"  counterexample: {c}" for c in self.counterexamples]
        return "\n".join(out)


def _timed(fn: Callable[..., PropertyReport]) -> Callable[..., PropertyReport]:
    def wrapper(*args, **kwargs) -> PropertyReport:
        start = time.perf_counter()
        rep = fn(*args, **kwargs)
        rep.elapsed = time.perf_counter() - start
        return rep

    wrapper.__name__ = fn.__name__
    wrapper.__doc__ = fn.__doc__
    return wrapper


# -- shared composite machinery --------------------------------------------------


def _apply(rule: Callable, *args) -> Optional[Type]:
    """Run a typing rule on child types; ``None`` if a child or the rule fails."""
    if any(a is None for a in args):
        return None
    try:
        return rule(*args)
    except TypeCheckError:
        return None


def _static_type(lat: SecurityLattice, t: Term, env=None) -> Optional[Type]:
    try:
        return typecheck_static(lat, env or {}, t)
    except TypeCheckError:
        return None


def _gradual_type(lat: SecurityLattice, t: Term, env=None) -> Optional[Type]:
    try:
        return elaborate(lat, env or {}, t).type
    except TypeCheckError:
        return None


def _static_composite_type(lat, kind, tys, extra=None) -> Optional[Type]:
    if kind == "app":
        return _apply(lambda a, b: rule_app(lat, a, b), *tys)
    if kind == "op":
        return _apply(lambda a, b: rule_op(lat, extra, a, b), *tys)
    if kind == "if":
        return _apply(lambda c, a, b: rule_if(lat, c, a, b), *tys)
    return _apply(lambda a: rule_asc(lat, a, extra), *tys)


def _gradual_composite_type(lat, kind, tys, extra=None) -> Optional[Type]:
    if kind == "app":
        return _apply(lambda a, b: grule_app(lat, a, b), *tys)
    if kind == "op":
        return _apply(lambda a, b: grule_op(lat, extra, a, b), *tys)
    if kind == "if":
        return _apply(lambda c, a, b: grule_if(lat, c, a, b), *tys)
    return _apply(lambda a: grule_asc(lat, a, extra), *tys)


def _build(kind: str, children: Sequence[Term], extra=None) -> Term:
    if kind == "app":
        return App(*children)
    if kind == "op":
        return BinOp(extra, *children)
    if kind == "if":
        return If(*children)
    return Ascribe(children[0], extra)


def _shapes(params: CorpusParams) -> Iterator[tuple[str, int, object]]:
    yield "app", 2, None
    for op in OPS:
        yield "op", 2, op
    yield "if", 3, None
    for ty in params.types:
        yield "asc", 1, ty


def _random_composite(rng: random.Random, params: CorpusParams, children: Sequence[Term]) -> Term:
    kind, arity, extra = rng.choice(list(_shapes(params)))
    return _build(kind, [rng.choice(children) for _ in range(arity)], extra)


def _decompose(t: Term) -> tuple[str, list[Term], object]:
    if isinstance(t, App):
        return "app", [t.fun, t.arg], None
    if isinstance(t, BinOp):
        return "op", [t.lhs, t.rhs], t.op
    if isinstance(t, If):
        return "if", [t.cond, t.then, t.else_], None
    if isinstance(t, Ascribe):
        return "asc", [t.term], t.type
    raise ValueError("not a composite")


# -- Prop: conservative extension ------------------------------------------------


@_timed
def check_conservative_extension(params: CorpusParams, samples: int = 300, seed: int = 0) -> PropertyReport:
    """Static and gradual checkers agree on every ``?``-free term."""
    rep = PropertyReport("conservative-extension")
    lat, env, scope = params.lattice, params.env, scope_of(params)
    if params.gradual:
        raise ValueError("conservative extension needs a ?-free corpus")

    def direct(t: Term) -> None:
        s, g = _static_type(lat, t, env), _gradual_type(lat, t, env)
        rep.count += 1
        if s != g:
            rep.fail(f"{pretty(t)}: static {s} vs gradual {g}")

    if params.max_depth == 1:
        for t in leaves(params, scope):
            direct(t)
        return rep
    for t in chain(leaves(params, scope), lambdas(params, params.max_depth, scope)):
        direct(t)

    children = terms_upto(params, params.max_depth - 1, scope)
    classes: Counter = Counter()
    reps: dict = {}
    for c in children:
        key = (_static_type(lat, c, env), _gradual_type(lat, c, env))
        classes[key] += 1
        reps.setdefault(key, c)
    keys = list(classes)
    for kind, arity, extra in _shapes(params):
        for combo in product(keys, repeat=arity):
            weight = 1
            for k in combo:
                weight *= classes[k]
            s = _static_composite_type(lat, kind, [k[0] for k in combo], extra)
            g = _gradual_composite_type(lat, kind, [k[1] for k in combo], extra)
            rep.count += weight
            if s != g:
                t = _build(kind, [reps[k] for k in combo], extra)
                rep.fail(f"{pretty(t)}: static {s} vs gradual {g}", weight)

    rng = random.Random(seed)
    for _ in range(samples):
        t = _random_composite(rng, params, children)
        kind, kids, extra = _decompose(t)
        s = _static_composite_type(lat, kind, [_static_type(lat, k, env) for k in kids], extra)
        if s != _static_type(lat, t, env) or _gradual_type(lat, t, env) != _gradual_composite_type(
            lat, kind, [_gradual_type(lat, k, env) for k in kids], extra
        ):
            rep.fail(f"{pretty(t)}: checker is not compositional")
    rep.notes.append(f"{samples} sampled composites re-checked end to end")
    return rep


# -- Prop: static gradual guarantee ----------------------------------------------


@_timed
def check_static_guarantee(params: CorpusParams, samples: int = 300, seed: int = 0) -> PropertyReport:
    """Replacing one known label by ``?`` keeps a term typed, at a less precise type."""
    rep = PropertyReport("static-gradual-guarantee")
    lat, env, scope = params.lattice, params.env, scope_of(params)

    def direct(t: Term) -> None:
        ty = _gradual_type(lat, t, env)
        if ty is None:
            return
        for r in relaxations(t):
            rep.count += 1
            ty2 = _gradual_type(lat, r, env)
            if ty2 is None or not precision_type(ty, ty2):
                rep.fail(f"{pretty(t)} : {ty}  relaxed {pretty(r)} : {ty2}")

    for t in chain(leaves(params, scope), lambdas(params, params.max_depth, scope)):
        direct(t)
    if params.max_depth == 1:
        return rep

    children = terms_upto(params, params.max_depth - 1, scope)
    count: Counter = Counter()
    relaxed: dict[object, Counter] = defaultdict(Counter)
    reps: dict = {}
    for c in children:
        ty = _gradual_type(lat, c, env)
        count[ty] += 1
        reps.setdefault(ty, c)
        for r in relaxations(c):
            relaxed[ty][_gradual_type(lat, r, env)] += 1
    keys = list(count)

    for kind, arity, extra in _shapes(params):
        for combo in product(keys, repeat=arity):
            orig = _gradual_composite_type(lat, kind, combo, extra)
            if orig is None:
                continue
            base = 1
            for k in combo:
                base *= count[k]
            for pos in range(arity):
                others = base // count[combo[pos]]
                for ty2, n in relaxed[combo[pos]].items():
                    changed = list(combo)
                    changed[pos] = ty2
                    new = _gradual_composite_type(lat, kind, changed, extra)
                    rep.count += n * others
                    if new is None or not precision_type(orig, new):
                        t = _build(kind, [reps[k] for k in combo], extra)
                        rep.fail(f"{pretty(t)} : {orig}; relaxing child {pos} to type {ty2} gives {new}", n * others)
            if kind == "asc":
                for ty2 in type_relaxations(extra):
                    new = _gradual_composite_type(lat, kind, combo, ty2)
                    rep.count += base
                    if new is None or not precision_type(orig, new):
                        t = _build(kind, [reps[combo[0]]], extra)
                        rep.fail(f"{pretty(t)} : {orig}; relaxing ascription to {ty2} gives {new}", base)

    rng = random.Random(seed)
    for _ in range(samples):
        t = _random_composite(rng, params, children)
        direct(t)
    rep.notes.append(f"{samples} sampled composites re-checked end to end (their relaxations are counted too)")
    return rep


# -- Prop: big-step / small-step agreement ---------------------------------------


@_timed
def check_bigstep_smallstep(params: CorpusParams, samples: int = 300, seed: int = 0) -> PropertyReport:
    """Natural semantics and small-step reduction give the same labelled
    value; every intermediate small-step term keeps a subtype of the start."""
    rep = PropertyReport("bigstep-smallstep")
    lat = params.lattice
    if params.free:
        raise ValueError("evaluation needs closed terms")

    def direct(t: Term, weight: int = 1) -> Optional[object]:
        if _static_type(lat, t) is None:
            return None
        rep.count += weight
        try:
            path = trace_small(lat, t)
            big = eval_big(lat, t)
        except (StuckError, RuntimeError) as exc:
            rep.fail(f"{pretty(t)}: {exc}", weight)
            return None
        small = path[-1]
        ty = _static_type(lat, t)
        for mid in path[1:]:
            ty2 = _static_type(lat, mid)
            if ty2 is None or not subtype(lat, ty2, ty):
                rep.fail(f"{pretty(t)}: step to {show_runtime(mid)} has type {ty2}, not below {ty}", weight)
                break
        if small != big:
            rep.fail(f"{pretty(t)}: small-step {pretty(small)} vs big-step {pretty(big)}", weight)
        return small

    for t in chain(leaves(params, ()), lambdas(params, params.max_depth, ())):
        direct(t)
    if params.max_depth == 1:
        return rep

    children = terms_upto(params, params.max_depth - 1, ())
    classes: Counter = Counter()
    reps: dict = {}
    for c in children:
        ty = _static_type(lat, c)
        if ty is None:
            continue
        key = (ty, eval_small(lat, c))
        classes[key] += 1
        reps.setdefault(key, c)
    keys = list(classes)
    for kind, arity, extra in _shapes(params):
        for combo in product(keys, repeat=arity):
            if _static_composite_type(lat, kind, [k[0] for k in combo], extra) is None:
                continue
            weight = 1
            for k in combo:
                weight *= classes[k]
            direct(_build(kind, [reps[k] for k in combo], extra), weight)

    rng = random.Random(seed)
    extra_runs = 0
    for _ in range(samples * 100):
        if extra_runs >= samples:
            break
        t = _random_composite(rng, params, children)
        if _static_type(lat, t) is None:
            continue
        extra_runs += 1
        kind, kids, extra = _decompose(t)
        stand_in = _build(kind, [reps[(_static_type(lat, k), eval_small(lat, k))] for k in kids], extra)
        if eval_small(lat, t) != eval_small(lat, stand_in) or eval_big(lat, t) != eval_small(lat, t):
            rep.fail(f"{pretty(t)}: differs from its class representative {pretty(stand_in)}")
    rep.notes.append(f"{extra_runs} sampled well-typed composites compared with their representatives")
    return rep


# -- Props: Galois connection ----------------------------------------------------


def _subsets(xs: Sequence) -> Iterator[tuple]:
    return chain.from_iterable(combinations(xs, r) for r in range(len(xs) + 1))


def _valid_type_sets(types: Sequence[Type], limit: Optional[int]) -> Iterator[frozenset[Type]]:
    """Nonempty sets of static types sharing one shape.  With ``limit`` the
    sets are capped at that size."""
    by_shape: dict[object, list[Type]] = defaultdict(list)
    for t in types:
        by_shape[_shape(t)].append(t)
    for group in by_shape.values():
        top = len(group) if limit is None else min(limit, len(group))
        for r in range(1, top + 1):
            for s in combinations(group, r):
                yield frozenset(s)


def _shape(t: Type) -> object:
    return "B" if isinstance(t, Bool) else (_shape(t.dom), _shape(t.cod))


@_timed
def check_galois(lat: SecurityLattice, type_depth: int = 2, max_set: Optional[int] = None) -> PropertyReport:
    """Soundness and optimality of abstraction for labels and types, and
    ``α(γ(x)) = x`` for every gradual label and type."""
    rep = PropertyReport(f"galois[{lat.name}]")
    glabels = gradual_labels(lat)
    for subset in _subsets(lat.elements):
        if not subset:
            rep.count += 1
            if alpha_label(lat, subset) is not None:
                rep.fail("alpha of the empty label set is defined")
            continue
        a = alpha_label(lat, subset)
        rep.count += 1
        if not set(subset) <= gamma_label(lat, a):
            rep.fail(f"unsound: alpha{set(subset)} = {a}")
        for g in glabels:
            if set(subset) <= gamma_label(lat, g) and not precision_label(a, g):
                rep.fail(f"not optimal: alpha{set(subset)} = {a} but {g} also covers it")
    for g in glabels:
        rep.count += 1
        if alpha_label(lat, gamma_label(lat, g)) != g:
            rep.fail(f"alpha(gamma({g})) != {g}")

    static_types = all_types(lat.elements, type_depth)
    gtypes = all_types(glabels, type_depth)
    gammas = {g: gamma_type(lat, g) for g in gtypes}
    for s in _valid_type_sets(static_types, max_set):
        a = alpha_type(lat, s)
        rep.count += 1
        if a is None or not s <= gammas.get(a, gamma_type(lat, a)):
            rep.fail(f"unsound: alpha of {sorted(map(str, s))} = {a}")
            continue
        for g, gs in gammas.items():
            if s <= gs and not precision_type(a, g):
                rep.fail(f"not optimal: alpha of {sorted(map(str, s))} = {a}, {g} also covers it")
    for g in gtypes:
        rep.count += 1
        if alpha_type(lat, gammas[g]) != g:
            rep.fail(f"alpha(gamma({g})) != {g}")
    rep.count += 1
    if alpha_type(lat, [Bool(lat.bottom), Fun(Bool(lat.bottom), Bool(lat.bottom), lat.bottom)]) is not None:
        rep.fail("alpha of a set mixing Bool and function types is defined")
    return rep


# -- consistent predicates vs. their definitions ---------------------------------


@_timed
def check_consistent_predicates(lat: SecurityLattice, type_depth: int = 2) -> PropertyReport:
    """Algorithmic ``≼̃`` and ``≲`` agree with their existential definitions."""
    rep = PropertyReport(f"consistent-predicates[{lat.name}]")
    glabels = gradual_labels(lat)
    for a, b in product(glabels, repeat=2):
        rep.count += 1
        want = any(lat.leq(x, y) for x in gamma_label(lat, a) for y in gamma_label(lat, b))
        if clabel_leq(lat, a, b) != want:
            rep.fail(f"{a} ≼̃ {b}: algorithmic {not want}, definition {want}")
    gtypes = all_types(glabels, type_depth)
    gammas = {g: gamma_type(lat, g) for g in gtypes}
    for a, b in product(gtypes, repeat=2):
        rep.count += 1
        want = any(subtype(lat, x, y) for x in gammas[a] for y in gammas[b])
        if csubtype(lat, a, b) != want:
            rep.fail(f"{a} ≲ {b}: algorithmic {not want}, definition {want}")
    return rep


# -- interior ------------------------------------------------------------------


@_timed
def check_interior_oracle(lat: SecurityLattice, type_depth: Optional[int] = 2) -> PropertyReport:
    """Closed-form interior equals the abstraction of all related static pairs."""
    rep = PropertyReport(f"interior-oracle[{lat.name}]")
    glabels = gradual_labels(lat)
    for a, b in product(glabels, repeat=2):
        rep.count += 1
        got, want = interior_label(lat, a, b), interior_label_oracle(lat, a, b)
        if got != want:
            rep.fail(f"I({a}, {b}) = {got}, oracle {want}")
    if type_depth:
        gtypes = all_types(glabels, type_depth)
        for a, b in product(gtypes, repeat=2):
            rep.count += 1
            got, want = interior_type(lat, a, b), interior_type_oracle(lat, a, b)
            if got != want:
                rep.fail(f"I({a}, {b}) = {got}, oracle {want}")
    rep.notes.append("distinct known labels use the added rule I(l1, l2) = <l1, l2> when l1 ≼ l2")
    return rep


# -- merge / consistent transitivity ---------------------------------------------


@_timed
def check_transitivity_properties(lat: SecurityLattice) -> PropertyReport:
    """Every pair of label evidences ``⟨a, b⟩ ∘ ⟨c, d⟩`` over the lattice."""
    rep = PropertyReport(f"transitivity[{lat.name}]")
    glabels = gradual_labels(lat)
    evs = [Evidence(Bool(a), Bool(b)) for a, b in product(glabels, repeat=2)]
    deltas = []
    for e1, e2 in product(evs, repeat=2):
        rep.count += 1
        got = consistent_transitivity(lat, e1, e2)
        tag = f"{e1} ∘ {e2}"
        if e1.right.label != UNKNOWN and e2.left.label != UNKNOWN and e1.right != e2.left:
            if got is not None:
                rep.fail(f"{tag} = {got} although the middle labels differ")
            continue
        middle = e2.left.label if e1.right.label == UNKNOWN else e1.right.label
        oracle = merge_label_oracle(lat, e1.left.label, middle, e2.right.label)
        if got is None:
            if oracle is not None:
                rep.fail(f"{tag} undefined but a chain exists (definitional result {oracle})")
            continue
        a, b = got.left.label, got.right.label
        if not (precision_label(a, e1.left.label) and precision_label(b, e2.right.label)):
            rep.fail(f"{tag} = {got} is less precise than its outer inputs")
        if not clabel_leq(lat, a, b):
            rep.fail(f"{tag} = {got} is not a consistent ordering")
        if oracle is None:
            rep.fail(f"{tag} = {got} but no chain exists")
        elif not (precision_label(oracle[0], a) and precision_label(oracle[1], b)):
            rep.fail(f"{tag} = {got} is more precise than the definitional {oracle}")
        elif (a, b) != oracle:
            deltas.append(f"{tag} = {got}; definitional combination gives <{oracle[0]}, {oracle[1]}>")
    top, bot = lat.top, lat.bottom
    if lat.top != lat.bottom:
        rep.count += 1
        if consistent_transitivity(lat, Evidence(Bool(top), Bool(top)), Evidence(Bool(bot), Bool(bot))):
            rep.fail("top evidence combined with bottom evidence is defined")
    rep.notes.append(f"{len(deltas)} results sound but less precise than the definitional combination")
    rep.notes.extend(deltas)
    return rep


# -- appendix lemmas -------------------------------------------------------------


@_timed
def check_appendix_lemmas(lat: SecurityLattice, type_depth: int = 2) -> PropertyReport:
    """Upper-bound, stamping, monotonicity and least-upper-bound lemmas for
    subtyping join/meet over every static type pair or triple."""
    rep = PropertyReport(f"appendix-lemmas[{lat.name}]")
    types = all_types(lat.elements, type_depth)
    labels = lat.elements
    joins = {}
    meets = {}
    for s1, s2 in product(types, repeat=2):
        j, m = sub_join(lat, s1, s2), sub_meet(lat, s1, s2)
        joins[s1, s2], meets[s1, s2] = j, m
        rep.count += 1
        if j is not None and not (subtype(lat, s1, j) and subtype(lat, s2, j)):
            rep.fail(f"upper bound: {s1} ⋎ {s2} = {j}")
        if m is not None and not (subtype(lat, m, s1) and subtype(lat, m, s2)):
            rep.fail(f"lower bound: {s1} ⋏ {s2} = {m}")
    for s, lab in product(types, labels):
        rep.count += 1
        if not subtype(lat, s, stamp(lat, s, lab)):
            rep.fail(f"stamping: {s} ⋎ {lab}")
    sub = {(a, b): subtype(lat, a, b) for a, b in product(types, repeat=2)}
    for (s1, s2), ok in sub.items():
        if not ok:
            continue
        for l1, l2 in product(labels, repeat=2):
            if not lat.leq(l1, l2):
                continue
            rep.count += 1
            if not subtype(lat, stamp(lat, s1, l1), stamp(lat, s2, l2)):
                rep.fail(f"monotonicity: {s1} <: {s2}, {l1} ≼ {l2}")
    uppers = defaultdict(list)
    lowers = defaultdict(list)
    for (a, b), ok in sub.items():
        if ok:
            uppers[a].append(b)
            lowers[b].append(a)
    for (s1, s2), j in joins.items():
        if j is not None:
            common = set(uppers[s1]) & set(uppers[s2])
            for s3 in common:
                rep.count += 1
                if not sub[j, s3]:
                    rep.fail(f"least upper bound: {s1} ⋎ {s2} = {j} not below {s3}")
        m = meets[s1, s2]
        if m is not None:
            common = set(lowers[s1]) & set(lowers[s2])
            for s3 in common:
                rep.count += 1
                if not sub[s3, m]:
                    rep.fail(f"greatest lower bound: {s1} ⋏ {s2} = {m} not above {s3}")
    return rep


# -- preservation and progress -----------------------------------------------------


def _checked_run(lat: SecurityLattice, it, fuel: int) -> tuple[Optional[Run], Optional[str]]:
    """Evaluate, re-deriving the type after every step."""
    try:
        run = evaluate(lat, it, fuel)
    except Stuck as exc:
        return None, f"stuck: {exc}"
    except FuelExhausted as exc:
        return None, str(exc)
    for st in run.trace:
        try:
            ty = recompute_type(lat, st.term)
        except IllFormed as exc:
            return run, f"ill-formed after a {st.kind} step: {exc}"
        if ty != it.type:
            return run, f"type changed from {it.type} to {ty}"
    return run, None


def _outcome_key(run: Run) -> object:
    return run.outcome.value if isinstance(run.outcome, Value) else "error"


@_timed
def check_preservation_progress(params: CorpusParams, fuel: int = 10_000) -> PropertyReport:
    """Every reduction step keeps the re-derived type; nothing gets stuck."""
    rep = PropertyReport("preservation-progress")
    lat = params.lattice
    if params.free:
        raise ValueError("evaluation needs closed terms")
    longest = 0

    def direct(t: Term, weight: int = 1, child_steps: int = 0) -> Optional[Run]:
        nonlocal longest
        try:
            it = elaborate(lat, {}, t)
        except TypeCheckError:
            return None
        rep.count += weight
        run, problem = _checked_run(lat, it, fuel)
        if problem:
            rep.fail(f"{pretty(t)}: {problem}", weight)
        if run is not None:
            longest = max(longest, run.steps + child_steps)
        return run

    for t in chain(leaves(params, ()), lambdas(params, params.max_depth, ())):
        direct(t)
    if params.max_depth > 1:
        children = terms_upto(params, params.max_depth - 1, ())
        classes: Counter = Counter()
        reps: dict = {}
        extra_steps: dict = {}
        by_type: dict[Type, Counter] = defaultdict(Counter)
        for c in children:
            try:
                it = elaborate(lat, {}, c)
            except TypeCheckError:
                continue
            run, problem = _checked_run(lat, it, fuel)
            if run is None:
                rep.fail(f"{pretty(c)}: {problem}")
                continue
            key = (it.type, _outcome_key(run))
            classes[key] += 1
            if key not in reps:
                reps[key] = c
                extra_steps[key] = 0
            # Members of a class differ only in how many steps they take.
            extra_steps[key] = max(extra_steps[key], run.steps - _steps_of(lat, reps[key]))
            by_type[it.type][key] += 1
        keys = list(classes)
        for kind, arity, extra in _shapes(params):
            if kind == "if":
                _preservation_if(lat, classes, reps, extra_steps, by_type, direct)
                continue
            for combo in product(keys, repeat=arity):
                if _gradual_composite_type(lat, kind, [k[0] for k in combo], extra) is None:
                    continue
                weight = 1
                for k in combo:
                    weight *= classes[k]
                direct(_build(kind, [reps[k] for k in combo], extra), weight, sum(extra_steps[k] for k in combo))
    rep.notes.append(f"longest run: at most {longest} steps (fuel {fuel})")
    if longest > fuel:
        rep.fail(f"a run may need {longest} steps, over the budget of {fuel}")
    return rep


@lru_cache(maxsize=None)
def _steps_of(lat: SecurityLattice, t: Term) -> int:
    return evaluate(lat, elaborate(lat, {}, t)).steps


def _preservation_if(lat, classes, reps, extra_steps, by_type, direct) -> None:
    """Conditionals: the branch that is not taken only matters through the
    join it forms with the taken one, so untaken branches are grouped by
    that join and represented once per group."""
    from .gradual import csub_join

    type_rep = {ty: next(iter(members)) for ty, members in by_type.items()}
    type_count = {ty: sum(members.values()) for ty, members in by_type.items()}
    # partners[ty][joined] = (weight, representative type of the other branch)
    partners: dict[Type, dict[Type, list]] = defaultdict(dict)
    for ta, tb in product(type_rep, repeat=2):
        joined = csub_join(lat, ta, tb)
        if joined is None:
            continue
        slot = partners[ta].setdefault(joined, [0, tb])
        slot[0] += type_count[tb]
    for ck in classes:
        if not isinstance(ck[0], Bool):
            continue
        if ck[1] == "error":
            taken_keys = [(type_rep[ty], type_count[ty]) for ty in type_rep]
        else:
            taken_keys = [(k, n) for k, n in classes.items()]
        for key, n in taken_keys:
            for weight, other_ty in partners[key[0]].values():
                other = type_rep[other_ty]
                then, else_ = (key, other) if ck[1] == "error" or bare_value(ck[1]) else (other, key)
                steps = extra_steps[ck] + max(extra_steps[then], extra_steps[else_])
                direct(If(reps[ck], reps[then], reps[else_]), classes[ck] * n * weight, steps)


# -- noninterference ---------------------------------------------------------------


def high_values(lat: SecurityLattice, high: str) -> list:
    """Every value of type ``Bool@high``: plain literals at ``high`` and
    literals at any gradual label ascribed to it through their interior."""
    out = [ILit(b, high) for b in (True, False)]
    for lab in gradual_labels(lat):
        ev = interior_type(lat, Bool(lab), Bool(high))
        if ev is None:
            continue
        for b in (True, False):
            out.append(IAsc(Ev(ev, ILit(b, lab)), Bool(high)))
    return out


def _ni_outcomes(lat: SecurityLattice, it, var: str, values: Sequence, fuel: int) -> tuple:
    outs = []
    for v in values:
        run = evaluate(lat, subst(it, var, v), fuel)
        outs.append(run.outcome.value if isinstance(run.outcome, Value) else "error")
    return tuple(outs)


def _show_outcome(o) -> str:
    return o if isinstance(o, str) else show_intrinsic(o)


def _ni_violation(outs: tuple) -> Optional[tuple]:
    seen = {}
    for i, o in enumerate(outs):
        if o == "error":
            continue
        b = bare_value(o)
        for j, b2 in seen.items():
            if b2 != b:
                return j, i
        seen[i] = b
    return None


@_timed
def check_noninterference_family(
    lat: SecurityLattice, body: Term, var: str = "x", var_type: Type = Bool("H"), fuel: int = 10_000
) -> PropertyReport:
    """One body ``t`` with free ``var``: every pair of inputs of ``var_type``
    that both terminate with a value gives the same bare value."""
    rep = PropertyReport("noninterference-family")
    it = elaborate(lat, {var: var_type}, body)
    if not isinstance(it.type, Bool) or clabel_leq(lat, var_type.label, it.type.label):
        rep.notes.append(f"output type {it.type} is observable from {var_type}; the theorem does not apply")
        return rep
    values = high_values(lat, var_type.label)
    outs = _ni_outcomes(lat, it, var, values, fuel)
    rep.count = len(values) * (len(values) - 1) // 2
    bad = _ni_violation(outs)
    if bad:
        i, j = bad
        rep.fail(f"{pretty(body)}: {_show_outcome(values[i])} and {_show_outcome(values[j])} "
                 f"give {_show_outcome(outs[i])} and {_show_outcome(outs[j])}")
    rep.notes.append(f"{sum(o == 'error' for o in outs)} of {len(values)} runs ended in error")
    return rep


@_timed
def check_noninterference(
    params: CorpusParams, high: str = "H", observer: Optional[str] = None, fuel: int = 10_000
) -> PropertyReport:
    """Sweep over every body with one free ``x : Bool@high`` whose type is
    ``Bool@ℓ`` with ``high ⋠̃ ℓ``; all inputs of type ``Bool@high`` are tried."""
    rep = PropertyReport("noninterference")
    lat = params.lattice
    var, var_type = "x", Bool(high)
    p = CorpusParams(lat, params.max_depth, params.type_depth, params.gradual, ((var, var_type),))
    env = p.env
    values = high_values(lat, high)
    pairs = len(values) * (len(values) - 1) // 2
    bodies = 0

    def relevant(ty: Optional[Type]) -> bool:
        if not isinstance(ty, Bool) or clabel_leq(lat, high, ty.label):
            return False
        return observer is None or ty.label == observer

    def direct(t: Term, weight: int = 1) -> None:
        nonlocal bodies
        try:
            it = elaborate(lat, env, t)
        except TypeCheckError:
            return
        if not relevant(it.type):
            return
        bodies += weight
        rep.count += weight * pairs
        bad = _ni_violation(_ni_outcomes(lat, it, var, values, fuel))
        if bad:
            i, j = bad
            rep.fail(f"{pretty(t)}: x = {_show_outcome(values[i])} and x = {_show_outcome(values[j])} "
                     f"are distinguishable", weight)

    scope = (var,)
    for t in leaves(p, scope):
        direct(t)
    # Lambdas have function types, which the theorem does not observe.
    if p.max_depth > 1:
        children = terms_upto(p, p.max_depth - 1, scope)
        classes: Counter = Counter()
        reps: dict = {}
        for c in children:
            try:
                it = elaborate(lat, env, c)
            except TypeCheckError:
                continue
            key = (it.type, _ni_outcomes(lat, it, var, values, fuel))
            classes[key] += 1
            reps.setdefault(key, c)
        keys = list(classes)
        # Joins and stamps only raise labels, so an observed operator or
        # conditional needs observed operands; an observed application needs
        # a function whose stamped result is observed.
        low = [k for k in keys if relevant(k[0])]
        funs = [k for k in keys if isinstance(k[0], Fun) and relevant(gstamp(lat, k[0].cod, k[0].label))]
        pools = {"app": (funs, keys), "op": (low, low), "if": (low, low, low)}
        for kind, arity, extra in _shapes(p):
            if kind == "asc" and not relevant(extra):
                continue
            for combo in product(*pools.get(kind, (keys,))):
                if not relevant(_gradual_composite_type(lat, kind, [k[0] for k in combo], extra)):
                    continue
                weight = 1
                for k in combo:
                    weight *= classes[k]
                direct(_build(kind, [reps[k] for k in combo], extra), weight)
    rep.notes.append(f"{bodies} bodies, {len(values)} inputs each")
    return rep


def random_term(rng: random.Random, params: CorpusParams, depth: int, scope: tuple[str, ...]) -> Term:
    """A random term of depth ``≤ depth``; variables in scope are favoured
    at the leaves so that open bodies actually use them."""
    if depth <= 1 or rng.random() < 0.2:
        if scope and rng.random() < 0.5:
            v = Var(rng.choice(scope))
            # Hiding a variable's label behind ? exercises the runtime checks.
            return Ascribe(v, Bool(UNKNOWN)) if UNKNOWN in params.labels and rng.random() < 0.3 else v
        return BoolLit(rng.random() < 0.5, rng.choice(params.labels))
    kind = rng.choice(("lam", "app", "op", "if", "asc", "asc"))
    sub = lambda: random_term(rng, params, depth - 1, scope)  # noqa: E731
    if kind == "lam":
        name = _binder(scope)
        body = random_term(rng, params, depth - 1, scope + (name,))
        return Lam(name, rng.choice(params.types), body, rng.choice(params.labels))
    if kind == "app":
        return App(sub(), sub())
    if kind == "op":
        return BinOp(rng.choice(OPS), sub(), sub())
    if kind == "if":
        return If(sub(), sub(), sub())
    return Ascribe(sub(), rng.choice(params.types))


@_timed
def check_noninterference_random(
    params: CorpusParams, samples: int = 20_000, seed: int = 0, high: str = "H", fuel: int = 10_000
) -> PropertyReport:
    """Seeded random bodies beyond the exhaustive depth; same property as
    :func:`check_noninterference`."""
    rep = PropertyReport("noninterference-random")
    lat = params.lattice
    rng = random.Random(seed)
    values = high_values(lat, high)
    env = {"x": Bool(high)}
    bodies = 0
    for _ in range(samples):
        t = random_term(rng, params, params.max_depth, ("x",))
        try:
            it = elaborate(lat, env, t)
        except TypeCheckError:
            continue
        if not isinstance(it.type, Bool):
            continue
        if clabel_leq(lat, high, it.type.label):
            # Unobservable as is; a gradual body may still be forced down to
            # the bottom label by an ascription.
            if it.type.label != UNKNOWN:
                continue
            t = Ascribe(t, Bool(lat.bottom))
            it = elaborate(lat, env, t)
        bodies += 1
        rep.count += len(values) * (len(values) - 1) // 2
        bad = _ni_violation(_ni_outcomes(lat, it, "x", values, fuel))
        if bad:
            rep.fail(f"{pretty(t)}: x = {_show_outcome(values[bad[0]])} and x = {_show_outcome(values[bad[1]])} "
                     f"are distinguishable")
    rep.notes.append(f"{bodies} well-typed observable bodies out of {samples} samples, depth ≤ {params.max_depth}, seed {seed}")
    return rep


# -- surface round trip ------------------------------------------------------------


@_timed
def check_roundtrip(params: CorpusParams, limit: int = 1000, seed: int = 0) -> PropertyReport:
    """``parse(pretty(t)) == t`` on enumerated and sampled deeper terms."""
    rep = PropertyReport("parse-print-roundtrip")
    rng = random.Random(seed)
    small = list(terms_upto(params, min(2, params.max_depth), scope_of(params)))
    pool = small[:limit] + [_random_composite(rng, params, small) for _ in range(limit)]
    for t in pool:
        rep.count += 1
        try:
            back = parse(pretty(t), params.lattice)
        except Exception as exc:  # noqa: BLE001 - any failure is a counterexample
            rep.fail(f"{pretty(t)}: {exc}")
            continue
        if back != t:
            rep.fail(f"{pretty(t)} reparsed as {pretty(back)}")
    return rep


# -- suites ------------------------------------------------------------------------


def _corpus(lat: SecurityLattice, depth: Optional[int], gradual: bool) -> CorpusParams:
    return CorpusParams(lat, depth if depth is not None else default_depth(lat), 2, gradual)


def default_depth(lat: SecurityLattice) -> int:
    """Depth 3 on the two-point lattice; larger lattices default to 2."""
    return 3 if len(lat.elements) <= 2 else 2


def _label_suites(lat: SecurityLattice) -> list[SecurityLattice]:
    from .lattice import DIAMOND

    return [lat] if lat is not TWO_POINT else [TWO_POINT, DIAMOND]


SUITES: dict[str, Callable[[SecurityLattice, Optional[int], int], list[PropertyReport]]] = {
    "conservative": lambda lat, d, s: [check_conservative_extension(_corpus(lat, d, False), seed=s)],
    "guarantee": lambda lat, d, s: [check_static_guarantee(_corpus(lat, d, False), seed=s)],
    "bigstep": lambda lat, d, s: [check_bigstep_smallstep(_corpus(lat, d, False), seed=s)],
    "galois": lambda lat, d, s: [
        check_galois(lat, 2) if len(lat.elements) <= 2 else check_galois(lat, 1)
    ],
    "consistency": lambda lat, d, s: [check_consistent_predicates(lat, 2 if len(lat.elements) <= 2 else 1)],
    "interior": lambda lat, d, s: [
        check_interior_oracle(lt, 2 if len(lt.elements) <= 2 else 1) for lt in _label_suites(lat)
    ],
    "transitivity": lambda lat, d, s: [check_transitivity_properties(lt) for lt in _label_suites(lat)],
    "preservation": lambda lat, d, s: [check_preservation_progress(_corpus(lat, d, True))],
    "noninterference": lambda lat, d, s: [check_noninterference(_corpus(lat, d, True), high=lat.top)],
    "random-ni": lambda lat, d, s: [
        check_noninterference_random(CorpusParams(lat, d or 6, 2, True), seed=s, high=lat.top)
    ],
    "lemmas": lambda lat, d, s: [check_appendix_lemmas(lt) for lt in _label_suites(lat)],
    "roundtrip": lambda lat, d, s: [check_roundtrip(_corpus(lat, min(d or 2, 2), True), seed=s)],
}


def run_suites(
    names: Iterable[str], lat: SecurityLattice = TWO_POINT, depth: Optional[int] = None, seed: int = 0
) -> list[PropertyReport]:
    reports: list[PropertyReport] = []
    for name in names:
        if name not in SUITES:
            raise KeyError(name)
        reports.extend(SUITES[name](lat, depth, seed))
    return reports
