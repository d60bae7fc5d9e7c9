"""``gsec`` command-line entry point."""

from __future__ import annotations

import argparse
import os
import sys
from dataclasses import dataclass
from typing import Optional, Sequence

from . import harness
from .elaborate import elaborate, show
from .lattice import TWO_POINT, LatticeError, SecurityLattice, resolve_lattice
from .runtime import Error, FuelExhausted, Stuck, evaluate, format_trace
from .static_eval import StuckError, format_static_trace, trace_small
from .static_eval import show as show_static
from .statics import TypeCheckError, typecheck_static
from .syntax import Bool, ParseError, format_type, parse

EXIT_OK = 0
EXIT_TYPE = 1
EXIT_RUNTIME = 2
EXIT_CONFIG = 3
EXIT_PROPS = 4

LATTICE_ENV = "GSEC_LATTICE"


class UsageError(Exception):
    pass


@dataclass(frozen=True)
class CliConfig:
    command: str
    path: Optional[str]
    lattice: str
    trace: bool = False
    static: bool = False
    depth: Optional[int] = None
    seed: int = 0
    suites: tuple[str, ...] = ()


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):  # argparse would exit 2, which means a runtime error here
        raise UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="gsec", description="Gradual security-typed lambda calculus.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(sp: argparse.ArgumentParser) -> None:
        sp.add_argument("--lattice", help=f"built-in name or JSON file (default: ${LATTICE_ENV} or two-point)")

    for name, text in (("check", "type-check a program"), ("elab", "print the evidence-annotated term")):
        sp = sub.add_parser(name, help=text)
        sp.add_argument("file")
        common(sp)
        if name == "check":
            sp.add_argument("--static", action="store_true", help="use the non-gradual checker")

    sp = sub.add_parser("run", help="evaluate a program")
    sp.add_argument("file")
    common(sp)
    sp.add_argument("--trace", action="store_true", help="print every reduction step")
    sp.add_argument("--static", action="store_true", help="use the non-gradual evaluator")

    sp = sub.add_parser("props", help="run property suites")
    sp.add_argument("file", nargs="?", help="optional body with free x; checks noninterference for it")
    common(sp)
    sp.add_argument("--suite", action="append", default=[], help="suite name (repeatable; default: all)")
    sp.add_argument("--depth", type=int, help="term depth bound")
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--list", action="store_true", help="list suite names")
    return p


def _lattice(cfg: CliConfig) -> SecurityLattice:
    return resolve_lattice(cfg.lattice)


def _read(path: str) -> str:
    try:
        with open(path, encoding="utf-8") as fh:
            return fh.read()
    except OSError as exc:
        raise UsageError(f"{path}: {exc.strerror}") from exc


def cmd_check(cfg: CliConfig, out) -> int:
    lat = _lattice(cfg)
    term = parse(_read(cfg.path), lat)
    ty = typecheck_static(lat, {}, term) if cfg.static else elaborate(lat, {}, term).type
    print(f": {format_type(ty)}", file=out)
    return EXIT_OK


def cmd_elab(cfg: CliConfig, out) -> int:
    lat = _lattice(cfg)
    it = elaborate(lat, {}, parse(_read(cfg.path), lat))
    print(show(it), file=out)
    return EXIT_OK


def cmd_run(cfg: CliConfig, out) -> int:
    lat = _lattice(cfg)
    term = parse(_read(cfg.path), lat)
    if cfg.static:
        typecheck_static(lat, {}, term)
        path = trace_small(lat, term)
        lines = format_static_trace(path) if cfg.trace else [show_static(path[-1])]
        print("\n".join(lines), file=out)
        return EXIT_OK
    it = elaborate(lat, {}, term)
    run = evaluate(lat, it)
    if cfg.trace:
        print("\n".join(format_trace(it, run)), file=out)
    elif isinstance(run.outcome, Error):
        print(f"ERROR: {run.outcome}", file=out)
    else:
        print(show(run.outcome.value), file=out)
    return EXIT_RUNTIME if isinstance(run.outcome, Error) else EXIT_OK


def cmd_props(cfg: CliConfig, out) -> int:
    lat = _lattice(cfg)
    if cfg.path is not None:
        body = parse(_read(cfg.path), lat)
        reports = [harness.check_noninterference_family(lat, body, "x", Bool(lat.top))]
    else:
        names = cfg.suites or tuple(harness.SUITES)
        unknown = [n for n in names if n not in harness.SUITES]
        if unknown:
            raise UsageError(f"unknown suite {unknown[0]!r}; choose from {', '.join(harness.SUITES)}")
        reports = []
        for name in names:
            for rep in harness.run_suites([name], lat, cfg.depth, cfg.seed):
                print(rep.summary(), file=out, flush=True)
                reports.append(rep)
    if cfg.path is not None:
        print(reports[0].summary(), file=out)
    print("", file=out)
    for rep in reports:
        print(rep.line(), file=out)
    return EXIT_OK if all(r.passed for r in reports) else EXIT_PROPS


COMMANDS = {"check": cmd_check, "elab": cmd_elab, "run": cmd_run, "props": cmd_props}


def main(argv: Optional[Sequence[str]] = None, out=None, err=None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    try:
        args = build_parser().parse_args(argv)
        if getattr(args, "list", False):
            print("\n".join(harness.SUITES), file=out)
            return EXIT_OK
        cfg = CliConfig(
            command=args.command,
            path=args.file,
            lattice=args.lattice or os.environ.get(LATTICE_ENV) or TWO_POINT.name,
            trace=getattr(args, "trace", False),
            static=getattr(args, "static", False),
            depth=getattr(args, "depth", None),
            seed=getattr(args, "seed", 0),
            suites=tuple(getattr(args, "suite", ())),
        )
        if cfg.depth is not None and cfg.depth < 1:
            raise UsageError("--depth must be at least 1")
        return COMMANDS[cfg.command](cfg, out)
    except UsageError as exc:
        print(f"gsec: {exc}", file=err)
        return EXIT_CONFIG
    except (ParseError, LatticeError) as exc:
        print(f"{_where(args)}{exc}", file=err)
        return EXIT_CONFIG
    except TypeCheckError as exc:
        print(f"{_where(args)}type error: {exc}", file=err)
        return EXIT_TYPE
    except (Stuck, StuckError, FuelExhausted) as exc:
        print(f"{_where(args)}runtime failure: {exc}", file=err)
        return EXIT_RUNTIME


def _where(args) -> str:
    path = getattr(args, "file", None)
    return f"{path}:" if path else ""


if __name__ == "__main__":
    sys.exit(main())
