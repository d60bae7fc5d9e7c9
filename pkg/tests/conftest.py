from __future__ import annotations

import pytest
from hypothesis import strategies as st

from gsec.lattice import DIAMOND, TWO_POINT, UNKNOWN
from gsec.syntax import OPS, App, Ascribe, BinOp, Bool, BoolLit, Fun, If, Lam, Var, parse

F_SRC = r"(\x:Bool@L. x)@L"
G_SRC = r"(\x:Bool@?. x)@L"
FGV_SRC = rf"{F_SRC} ({G_SRC} false@H)"
FV_SRC = rf"{F_SRC} false@H"


@pytest.fixture(params=[TWO_POINT, DIAMOND], ids=lambda lat: lat.name)
def lattice(request):
    return request.param


def labels(lat, gradual=True):
    return st.sampled_from(lat.elements + ((UNKNOWN,) if gradual else ()))


def types(lat, gradual=True, max_leaves=6):
    return st.recursive(
        st.builds(Bool, labels(lat, gradual)),
        lambda inner: st.builds(Fun, inner, inner, labels(lat, gradual)),
        max_leaves=max_leaves,
    )


def terms(lat, gradual=True, scope=("x",)):
    """Arbitrary, mostly ill-typed terms over a fixed set of variable names."""
    leaf = st.one_of(st.builds(BoolLit, st.booleans(), labels(lat, gradual)), st.sampled_from([Var(n) for n in scope]))
    return st.recursive(
        leaf,
        lambda inner: st.one_of(
            st.builds(Lam, st.sampled_from(scope), types(lat, gradual, 3), inner, labels(lat, gradual)),
            st.builds(App, inner, inner),
            st.builds(BinOp, st.sampled_from(OPS), inner, inner),
            st.builds(If, inner, inner, inner),
            st.builds(Ascribe, inner, types(lat, gradual, 3)),
        ),
        max_leaves=8,
    )


def p(src, lat=TWO_POINT):
    return parse(src, lat)


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in RESULTS:
            terminalreporter.write_line(line)
