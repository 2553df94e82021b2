import os
import sys
import textwrap

import pytest

from rslv import core_ir as C
from rslv import smt
from rslv.errors import LoweringError, SolverCrash
from rslv.pipeline import RunOptions, verify_source
from rslv.types import INT
from rslv.vcgen import exec_method

from conftest import needs_solver, read_corpus

def ob_from(*body, params=(("n", INT), ("k", INT))):
    m = C.CoreMethod("m", list(params), [], list(body))
    return exec_method(C.CoreProgram([], [m]), m)


n, k = C.Var("n", INT), C.Var("k", INT)


def geq(a, b):
    return C.Binop(">=", a, b)


def fake_solver(tmp_path, body):
    script = tmp_path / "solver.py"
    script.write_text(textwrap.dedent(body))
    return f"{sys.executable} {script}"


def test_lower_shape():
    (ob,) = ob_from(C.Assume(geq(n, C.IntConst(1))), C.Assert(geq(n, C.IntConst(0))))
    script = smt.lower(ob)
    lines = script.text.splitlines()
    assert lines[:2] == ["(set-option :produce-models true)", "(set-logic ALL)"]
    assert "(declare-fun n () Int)" in lines
    assert "(assert (>= n 1))" in lines
    assert lines[-2:] == ["(assert (not (>= n 0)))", "(check-sat)"]


def test_lower_is_deterministic():
    body = [C.Assume(geq(k, n)), C.Assert(geq(C.Binop("+", n, k), C.IntConst(0)))]
    assert smt.lower(ob_from(*body)[0]).text == smt.lower(ob_from(*body)[0]).text


def test_nonlinear_rejected():
    (ob,) = ob_from(C.Assert(geq(C.Binop("*", n, k), C.IntConst(0))))
    with pytest.raises(LoweringError):
        smt.lower(ob)


def test_division_by_variable_rejected():
    (ob,) = ob_from(C.Assert(geq(C.Binop("/", n, k), C.IntConst(0))))
    with pytest.raises(LoweringError):
        smt.lower(ob)


def test_unsupported_becomes_unknown_verdict():
    src = "fn f(a: Int, b: Int) { assert!(a * b == b * a); }\n"
    r = verify_source(src, "t.rsl").function("f")
    assert r.verdict == "unknown"
    assert r.diagnostics[0].kind == "unsupported"


def test_parse_model():
    text = """(
  (define-fun n () Int
    (- 3))
  (define-fun |a b| () Bool true)
  (define-fun f ((x!0 Int)) Int 0)
)"""
    assert smt.parse_model(text) == {"n": "(- 3)", "a b": "true"}


def test_parse_model_empty():
    assert smt.parse_model("") == {}


def test_dump_naming(tmp_path):
    path = smt.dump(smt.SmtScript("(check-sat)\n"), str(tmp_path / "out"), "Bank::deposit", 3)
    assert os.path.basename(path) == "Bank_deposit_3.smt2"
    assert open(path).read() == "(check-sat)\n"


def test_dump_smt_option_writes_files(tmp_path):
    src = "fn f(a: Int) { assert!(a == a + 0); }\n"
    verify_source(src, "t.rsl", RunOptions(dump_smt=str(tmp_path)))
    # obligations folded to true never reach the solver and are not dumped
    assert os.listdir(tmp_path) == []
    verify_source("fn f(a: Int, b: Int) { assert!(a + b == b + a); }\n", "t.rsl", RunOptions(dump_smt=str(tmp_path)))
    assert os.listdir(tmp_path) == ["f_0.smt2"]


SCRIPT = smt.SmtScript("(declare-fun n () Int)\n(assert (not (>= n 0)))\n(check-sat)\n", ["n"])


def test_fake_sat_gives_model(tmp_path):
    cmd = fake_solver(tmp_path, """
        import sys
        print("sat", flush=True)
        for line in sys.stdin:
            if "get-model" in line:
                print("((define-fun n () Int (- 1)))", flush=True)
            if "exit" in line:
                break
    """)
    res = smt.check(SCRIPT, cmd, timeout=10)
    assert isinstance(res, smt.Refuted)
    assert res.model == {"n": "(- 1)"}


def test_fake_unknown(tmp_path):
    cmd = fake_solver(tmp_path, 'print("unknown")\n')
    res = smt.check(SCRIPT, cmd, timeout=10)
    assert isinstance(res, smt.Unknown) and "unknown" in res.reason


def test_fake_timeout(tmp_path):
    cmd = fake_solver(tmp_path, "import time\ntime.sleep(30)\n")
    res = smt.check(SCRIPT, cmd, timeout=0.5)
    assert isinstance(res, smt.Unknown)
    assert res.reason == "timeout"
    assert res.time < 10


def test_fake_crash(tmp_path):
    cmd = fake_solver(tmp_path, 'import sys\nprint("(error oops)")\nsys.exit(3)\n')
    with pytest.raises(SolverCrash, match="exit 3"):
        smt.check(SCRIPT, cmd, timeout=10)


def test_missing_solver_binary():
    with pytest.raises(SolverCrash, match="cannot start"):
        smt.check(SCRIPT, "/nonexistent/solver-xyz", timeout=1)


def test_crash_becomes_unknown_verdict(tmp_path):
    cmd = fake_solver(tmp_path, "import sys\nsys.exit(1)\n")
    r = verify_source("fn f(a: Int, b: Int) { assert!(a + b == b + a); }\n", "t.rsl",
                      RunOptions(smt_cmd=cmd)).function("f")
    assert r.verdict == "unknown"
    assert r.diagnostics[0].kind == "solver-error"


def test_timeout_becomes_unknown_verdict(tmp_path):
    cmd = fake_solver(tmp_path, "import time\ntime.sleep(30)\n")
    r = verify_source("fn f(a: Int, b: Int) { assert!(a + b == b + a); }\n", "t.rsl",
                      RunOptions(smt_cmd=cmd, timeout=0.3)).function("f")
    assert r.verdict == "unknown"
    assert "timeout" in r.diagnostics[0].message


@needs_solver
def test_real_solver_proves_and_refutes():
    (good,) = ob_from(C.Assume(geq(n, C.IntConst(1))), C.Assert(geq(n, C.IntConst(0))))
    assert isinstance(smt.check(smt.lower(good)), smt.Proved)
    (bad,) = ob_from(C.Assert(geq(n, C.IntConst(0))))
    res = smt.check(smt.lower(bad))
    assert isinstance(res, smt.Refuted)
    assert int(res.model["n"].replace("(- ", "-").rstrip(")")) < 0


@needs_solver
def test_counterexample_model_reaches_report():
    r = verify_source(read_corpus("bad.rsl"), "bad.rsl").function("bad")
    (d,) = [d for d in r.diagnostics if d.severity == "error"]
    assert d.model and "amt" in d.model
