from __future__ import annotations

import pytest

from conftest import FGV_SRC, p
import gsec.elaborate as elab_mod
import gsec.harness as H
import gsec.runtime as rt_mod
from gsec.elaborate import elaborate, term_precision
from gsec.harness import (
    CorpusParams,
    PropertyReport,
    check_bigstep_smallstep,
    check_conservative_extension,
    check_noninterference,
    check_noninterference_family,
    check_noninterference_random,
    check_preservation_progress,
    check_static_guarantee,
    check_transitivity_properties,
    count_terms,
    enumerate_terms,
    high_values,
    relaxations,
    run_suites,
)
from gsec.lattice import DIAMOND, TWO_POINT, build_lattice
from gsec.runtime import evaluate
from gsec.static_eval import eval_big, eval_small
from gsec.statics import TypeCheckError, typecheck_static
from gsec.syntax import Bool, BoolLit, Fun, parse, pretty

ONE = build_lattice(["X"], [], name="one-point")
XH = (("x", Bool("H")),)


def _typed(lat, t, env=None, gradual=False):
    try:
        return (elaborate(lat, env or {}, t).type if gradual else typecheck_static(lat, env or {}, t))
    except TypeCheckError:
        return None


# -- enumeration


def test_depth_one_corpus():
    got = set(enumerate_terms(CorpusParams(TWO_POINT, 1, 1, False)))
    assert got == {BoolLit(b, lab) for b in (True, False) for lab in ("L", "H")}
    gradual = set(enumerate_terms(CorpusParams(TWO_POINT, 1, 1, True)))
    assert got < gradual and BoolLit(True, "?") in gradual


@pytest.mark.parametrize("gradual", [False, True])
@pytest.mark.parametrize("free", [(), XH])
@pytest.mark.parametrize("lat", [TWO_POINT, DIAMOND, ONE], ids=lambda lat: lat.name)
def test_count_matches_enumeration(lat, gradual, free):
    params = CorpusParams(lat, 2, 2 if lat is not DIAMOND else 1, gradual, free if lat is TWO_POINT else ())
    terms = list(enumerate_terms(params))
    assert len(terms) == count_terms(params)
    assert len(set(terms)) == len(terms)


def test_count_matches_enumeration_at_depth_three():
    params = CorpusParams(ONE, 3, 1, False)
    assert sum(1 for _ in enumerate_terms(params)) == count_terms(params)


def test_depth_three_corpus_sizes():
    assert count_terms(CorpusParams(TWO_POINT, 3, 2, False)) == 20_430_308
    assert count_terms(CorpusParams(TWO_POINT, 3, 2, True)) == 1_632_079_806


def test_relaxations_touch_one_label():
    t = parse(r"(\x:Bool@L. x && true@H)@L")
    rs = list(relaxations(t))
    assert len(rs) == 3
    for r in rs:
        assert pretty(r).count("?") == 1 and term_precision(t, r)


# -- compositional sweeps agree with direct ones


def _direct_conservative(params):
    n = bad = 0
    for t in enumerate_terms(params):
        n += 1
        bad += _typed(params.lattice, t) != _typed(params.lattice, t, gradual=True)
    return n, bad


@pytest.mark.parametrize(
    "params", [CorpusParams(ONE, 3, 1, False), CorpusParams(TWO_POINT, 2, 2, False)], ids=["one-point-3", "two-point-2"]
)
def test_conservative_extension_matches_direct(params):
    rep = check_conservative_extension(params, samples=50)
    assert (rep.count, rep.cex_count) == _direct_conservative(params)


@pytest.mark.parametrize(
    "params", [CorpusParams(ONE, 3, 1, False), CorpusParams(TWO_POINT, 2, 2, False)], ids=["one-point-3", "two-point-2"]
)
def test_guarantee_and_agreement_counts_match_direct(params):
    lat = params.lattice
    typed = [t for t in enumerate_terms(params) if _typed(lat, t, gradual=True) is not None]
    rep = check_static_guarantee(params, samples=0)
    assert rep.count == sum(len(list(relaxations(t))) for t in typed) and rep.passed
    for t in typed:
        assert eval_small(lat, t) == eval_big(lat, t)
    rep = check_bigstep_smallstep(params, samples=50)
    assert rep.count == len(typed) and rep.passed


def test_gradual_sweeps_match_direct_at_depth_two():
    params = CorpusParams(TWO_POINT, 2, 2, True)
    typed = [t for t in enumerate_terms(params) if _typed(TWO_POINT, t, gradual=True) is not None]
    assert check_preservation_progress(params).count == len(typed) == 976
    open_params = CorpusParams(TWO_POINT, 2, 2, True, XH)
    observed = [
        t for t in enumerate_terms(open_params)
        if _typed(TWO_POINT, t, {"x": Bool("H")}, gradual=True) == Bool("L")
    ]
    rep = check_noninterference(params)
    assert rep.count == len(observed) * 28 and rep.passed


# -- noninterference building blocks


def test_high_values():
    vals = high_values(TWO_POINT, "H")
    assert len(vals) == 8
    assert all(v.type == Bool("H") for v in vals)
    assert all(evaluate(TWO_POINT, v).steps == 0 for v in vals)


def test_family_examples():
    body = parse(FGV_SRC.replace("false@H", "x"))
    rep = check_noninterference_family(TWO_POINT, body)
    assert rep.passed and "8 of 8 runs ended in error" in rep.notes[0]
    assert check_noninterference_family(TWO_POINT, parse("true@L")).passed


def test_family_outside_theorem_is_vacuous():
    rep = check_noninterference_family(TWO_POINT, parse("x :: Bool@?"))
    assert rep.passed and rep.count == 0


def test_transitivity_table_has_81_entries():
    rep = check_transitivity_properties(TWO_POINT)
    assert rep.count == 82  # 81 pairs plus the top/bottom check
    assert rep.passed


# -- mutations: the checks must be able to fail


def test_unstamped_guard_leaks_and_is_caught(monkeypatch):
    monkeypatch.setattr(rt_mod, "_stamp_right", lambda lat, e, label: e)
    leak = parse("(if x :: Bool@? then true@L else false@L) :: Bool@L")
    assert not check_noninterference_family(TWO_POINT, leak).passed
    assert not check_noninterference_random(CorpusParams(TWO_POINT, 6, 2, True)).passed


def test_unstamped_application_breaks_conservative_extension(monkeypatch):
    def bad_app(lat, s1, s2, span=None):
        if not isinstance(s1, Fun):
            raise TypeCheckError("(S̃app)", "not a function", span)
        return s1.cod

    monkeypatch.setattr(elab_mod, "grule_app", bad_app)
    monkeypatch.setattr(H, "grule_app", bad_app)
    rep = check_conservative_extension(CorpusParams(TWO_POINT, 3, 2, False), samples=0)
    assert not rep.passed and rep.cex_count > 0


def test_dropping_operator_evidence_breaks_preservation(monkeypatch):
    original = rt_mod.notion_step

    def bad(lat, t):
        out = original(lat, t)
        if isinstance(t, rt_mod.IOp) and not isinstance(out, rt_mod.Error):
            return rt_mod.IAsc(rt_mod.Ev(t.lhs.ev, out.term.term), out.type)
        return out

    monkeypatch.setattr(rt_mod, "notion_step", bad)
    rep = check_preservation_progress(CorpusParams(TWO_POINT, 2, 2, True))
    assert not rep.passed


# -- reports and suites


def test_report_line_format():
    rep = PropertyReport("demo", count=3)
    assert rep.line() == "PROP demo PASS n=3 cex=0"
    rep.fail("t", weight=2)
    assert rep.line() == "PROP demo FAIL n=3 cex=2"


def test_unknown_suite():
    with pytest.raises(KeyError):
        run_suites(["nope"])


@pytest.mark.parametrize("name", ["galois", "interior", "transitivity", "lemmas", "consistency", "roundtrip"])
def test_quick_suites_pass(name):
    assert all(r.passed for r in run_suites([name]))


def test_diamond_defaults_to_depth_two():
    assert H.default_depth(DIAMOND) == 2 and H.default_depth(TWO_POINT) == 3
