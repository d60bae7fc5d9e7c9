"""Gradual security-typed lambda calculus: checkers, evidence runtime and property harness."""

from .lattice import DIAMOND, TWO_POINT, SecurityLattice, load_lattice, resolve_lattice
from .runtime import evaluate
from .statics import typecheck_static
from .syntax import parse

__all__ = [
    "DIAMOND",
    "TWO_POINT",
    "SecurityLattice",
    "evaluate",
    "load_lattice",
    "parse",
    "resolve_lattice",
    "typecheck_static",
]
