from __future__ import annotations

import io
import json
import shutil
import subprocess
import sys

import pytest

from conftest import FGV_SRC, FV_SRC
from gsec.cli import EXIT_CONFIG, EXIT_OK, EXIT_PROPS, EXIT_RUNTIME, EXIT_TYPE, main
from gsec.lattice import DIAMOND


def gsec(*argv):
    out, err = io.StringIO(), io.StringIO()
    code = main(list(argv), out=out, err=err)
    return code, out.getvalue(), err.getvalue()


@pytest.fixture
def prog(tmp_path):
    def write(src, name="prog.gsec"):
        path = tmp_path / name
        path.write_text(src, encoding="utf-8")
        return str(path)

    return write


def test_check(prog):
    assert gsec("check", prog(FGV_SRC))[:2] == (EXIT_OK, ": Bool@L\n")
    code, _, err = gsec("check", prog(FV_SRC))
    assert code == EXIT_TYPE and "(S̃app)" in err and "1:1" in err


def test_check_static_flag(prog):
    assert gsec("check", "--static", prog(FGV_SRC))[0] == EXIT_TYPE
    assert gsec("check", "--static", prog("true@L || false@H"))[1] == ": Bool@H\n"


def test_empty_file_is_a_parse_error(prog):
    code, _, err = gsec("check", prog(""))
    assert code == EXIT_CONFIG and "empty program" in err


def test_elab(prog):
    _, out, _ = gsec("elab", prog("true@L"))
    assert out == "true@L\n"
    _, out, _ = gsec("elab", prog("true@H :: Bool@?"))
    assert out == "<Bool@H, Bool@H>true@H :: Bool@?\n"
    _, out, _ = gsec("elab", prog(FGV_SRC))
    assert out.startswith("(<(Bool@L -> Bool@L)@L, (Bool@L -> Bool@L)@L>")


def test_run(prog):
    code, out, _ = gsec("run", prog(FGV_SRC))
    assert code == EXIT_RUNTIME
    assert out == "ERROR: cannot combine <Bool@H, Bool@H> with <Bool@L, Bool@L> at 1:19\n"
    assert gsec("run", prog("true@L"))[:2] == (EXIT_OK, "true@L\n")


def test_run_trace(prog):
    code, out, _ = gsec("run", "--trace", prog(FGV_SRC))
    lines = out.splitlines()
    assert code == EXIT_RUNTIME
    assert [line.split()[1] for line in lines[1:4]] == ["↦", "−→c", "−→c"]
    assert lines[-1].startswith("ERROR: ")


def test_run_static_matches_gradual(prog):
    path = prog("if true@H then true@L else false@L")
    _, static_out, _ = gsec("run", "--static", path)
    _, gradual_out, _ = gsec("run", path)
    assert static_out == "true@H\n"
    assert gradual_out == "<Bool@L, Bool@H>true@L :: Bool@H\n"
    _, trace, _ = gsec("run", "--static", "--trace", path)
    assert trace.splitlines()[1:] == ["--> (true@L) \\/ H", "--> true@H"]


def test_lattice_selection(prog, tmp_path, monkeypatch):
    src = prog("true@M1 :: Bool@top")
    assert gsec("check", src)[0] == EXIT_TYPE
    assert gsec("check", "--lattice", "diamond", src)[1] == ": Bool@top\n"
    cfg = tmp_path / "lat.json"
    cfg.write_text(DIAMOND.to_json())
    assert gsec("check", "--lattice", str(cfg), src)[0] == EXIT_OK
    monkeypatch.setenv("GSEC_LATTICE", "diamond")
    assert gsec("check", src)[0] == EXIT_OK
    assert gsec("check", "--lattice", "two-point", src)[0] == EXIT_TYPE


def test_bad_lattice_is_a_config_error(prog, tmp_path):
    cfg = tmp_path / "bad.json"
    cfg.write_text(json.dumps({"elements": ["A", "B"], "order": []}))
    assert gsec("check", "--lattice", str(cfg), prog("true"))[0] == EXIT_CONFIG
    assert gsec("check", "--lattice", "nope", prog("true"))[0] == EXIT_CONFIG


def test_usage_errors():
    assert gsec()[0] == EXIT_CONFIG
    assert gsec("frobnicate")[0] == EXIT_CONFIG
    assert gsec("check", "/definitely/missing.gsec")[0] == EXIT_CONFIG
    code, _, err = gsec("props", "--suite", "nope")
    assert code == EXIT_CONFIG and "unknown suite" in err


def test_props_suite():
    code, out, _ = gsec("props", "--suite", "galois")
    assert code == EXIT_OK
    assert out.splitlines()[-1].startswith("PROP galois[two-point] PASS n=")


def test_props_family(prog):
    code, out, _ = gsec("props", prog("if x then true@L else false@L :: Bool@H"))
    assert code == EXIT_OK and "PROP noninterference-family PASS" in out


def test_props_counterexample_exit(prog, monkeypatch):
    import gsec.runtime as rt

    monkeypatch.setattr(rt, "_stamp_right", lambda lat, e, label: e)
    code, out, _ = gsec("props", prog("(if x :: Bool@? then true@L else false@L) :: Bool@L"))
    assert code == EXIT_PROPS and "FAIL" in out


def test_props_list():
    code, out, _ = gsec("props", "--list")
    assert code == EXIT_OK and "noninterference" in out.split()


@pytest.mark.skipif(shutil.which("gsec") is None, reason="console script not installed")
def test_console_script(prog):
    done = subprocess.run(["gsec", "check", prog(FGV_SRC)], capture_output=True, text=True)
    assert (done.returncode, done.stdout) == (0, ": Bool@L\n")


def test_module_entry(prog):
    done = subprocess.run([sys.executable, "-m", "gsec.cli", "run", prog(FGV_SRC)], capture_output=True, text=True)
    assert done.returncode == EXIT_RUNTIME
