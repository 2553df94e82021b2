import pytest

from rslv import core_ir as C
from rslv.errors import DomainTooLarge
from rslv.oracle import (Agreement, ConcreteState, CounterExample, Disagreement, DomainConfig,
                         Elem, Incomplete, Pass, agree, enumerate_check, oracle_summary)
from rslv.pipeline import RunOptions, compile_source, verify_source
from rslv.report import FunctionResult, VerificationReport
from rslv.types import INT, MapType, SortType

from conftest import read_corpus

ONE_ID = DomainConfig(ids=1, amount_max=3)


def method(core, name):
    return next(m for m in core.methods if m.name == name)


def corpus_core(name):
    return compile_source(read_corpus(name), name)


def test_bad_counterexample_at_second_withdraw():
    core = corpus_core("bad.rsl")
    res = enumerate_check(method(core, "bad"), ONE_ID, core)
    assert isinstance(res, CounterExample)
    assert res.kind == "insufficient-resource"
    assert res.span.line == 39
    assert res.assignment["amt"] != "0"
    assert "holds 0, needs" in res.message


def test_bad_is_fine_with_zero_amount():
    # amt = 0 never runs short, so the first counterexample uses amt >= 1
    core = corpus_core("bad.rsl")
    res = enumerate_check(method(core, "bad"), DomainConfig(ids=1, amount_max=0), core)
    assert isinstance(res, Pass)


def test_withdraw_passes():
    core = corpus_core("bank_ok.rsl")
    res = enumerate_check(method(core, "Bank::withdraw"), DomainConfig(ids=2, amount_max=2), core)
    assert isinstance(res, Pass)
    assert res.assignments > 0


def test_assert_false_fails_on_first_assignment():
    m = C.CoreMethod("m", [("n", INT)], [], [C.Assert(C.FALSE)])
    res = enumerate_check(m)
    assert isinstance(res, CounterExample)
    assert res.assignment == {"n": "0"}
    assert res.kind == "assert-failure"


def test_domain_too_large():
    params = [(f"m{i}", MapType(SortType("Id"))) for i in range(4)]
    m = C.CoreMethod("big", params, [], [])
    with pytest.raises(DomainTooLarge):
        enumerate_check(m, DomainConfig(ids=3, amount_max=3), C.CoreProgram([], [m], sorts=["Id"]))


def test_bad_config_rejected():
    with pytest.raises(ValueError):
        DomainConfig(ids=0)
    with pytest.raises(ValueError):
        DomainConfig(amount_max=-1)


def test_forall_over_ints_is_incomplete():
    x = C.Var("x", INT)
    body = C.Forall((("x", INT),), C.Binop(">=", x, C.IntConst(0)))
    m = C.CoreMethod("m", [], [], [C.Assert(body)])
    assert isinstance(enumerate_check(m), Incomplete)


def test_division_by_zero_is_incomplete():
    n = C.Var("n", INT)
    m = C.CoreMethod("m", [("n", INT)], [], [C.Assert(C.Binop("==", C.Binop("/", n, n), C.IntConst(1)))])
    assert isinstance(enumerate_check(m), Incomplete)


def test_concrete_state_counts():
    st = ConcreteState({})
    a = (Elem("Id", 0),)
    st.inhale("R", a, 2)
    st.inhale("R", a, 1)
    assert st.amount("R", a) == 3
    st.exhale("R", a, 3)
    assert st.amount("R", a) == 0
    assert st.amount("R", (Elem("Id", 1),)) == 0


def test_uninterpreted_function_branches():
    text = """
type Id;
#[pure]
fn f(x: Id) -> bool;
fn g(x: Id) { assert!(f(x)); }
"""
    core = compile_source(text, "t.rsl")
    res = enumerate_check(method(core, "g"), ONE_ID, core)
    assert isinstance(res, CounterExample)
    assert res.choices == ["f(Id#0)=false"]


def test_havoc_choices_reported():
    text = """
struct P { v: u32 }
fn g(p: &mut P);
fn f(p: &mut P) { let before = p.v; g(p); assert!(p.v == before); }
"""
    core = compile_source(text, "t.rsl")
    res = enumerate_check(method(core, "f"), DomainConfig(amount_max=1), core)
    assert isinstance(res, CounterExample)
    assert any(c.startswith("p=") for c in res.choices)
    assert "choice p=" in "\n".join(res.lines())


def fake_report(name, verdict):
    return VerificationReport("x", [FunctionResult(name, verdict)])


def test_agree_rules():
    m = C.CoreMethod("m", [("n", INT)], [], [C.Assert(C.FALSE)])
    assert isinstance(agree(fake_report("m", "verified"), m), Disagreement)
    assert agree(fake_report("m", "failed"), m).note == "both-failed"
    ok = C.CoreMethod("m", [], [], [])
    assert agree(fake_report("m", "verified"), ok).note == "both-verified"
    assert agree(fake_report("m", "failed"), ok).note == "symbolic-incomplete"
    assert agree(fake_report("m", "verified"), m, oracle=Incomplete("x")).note == "oracle-incomplete"


def test_disagreement_message():
    m = C.CoreMethod("m", [("n", INT)], [], [C.Assert(C.FALSE)])
    text = str(agree(fake_report("m", "verified"), m))
    assert text.startswith("m: verified symbolically") and "n=0" in text


def test_summary_forms():
    assert oracle_summary(Pass(3, 4))["result"] == "pass"
    assert oracle_summary(Incomplete("why")) == {"result": "incomplete", "detail": "why", "assignment": None}
    cx = CounterExample("m", {"a": "1"}, "assert-failure", "boom", None, "assert false", ["p=1"])
    s = oracle_summary(cx)
    assert s["assignment"] == {"a": "1", "choice1": "p=1"}


def test_oracle_through_pipeline():
    r = verify_source(read_corpus("bad.rsl"), "bad.rsl", RunOptions(oracle=True, domain_size=1))
    assert r.function("bad").oracle["result"] == "counterexample"
