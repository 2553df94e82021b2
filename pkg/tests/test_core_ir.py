from hypothesis import given, settings, strategies as st

from rslv import core_ir as C
from rslv.types import INT, SortType

ACCT = SortType("AcctId")
a = C.Var("a", ACCT)
amt = C.Var("amt", INT)
MONEY = C.PredicateDecl("Money", (("arg1", ACCT),))


def prog(*body, params=(("a", ACCT), ("amt", INT)), preds=(MONEY,)):
    return C.CoreProgram(list(preds), [C.CoreMethod("m", list(params), [], list(body))], sorts=["AcctId"])


def messages(p):
    return [e.message for e in C.wellformed(p)]


def test_wellformed_ok():
    assert C.wellformed(prog(C.Exhale(C.Acc("Money", (a,), C.IntConst(1))))) == []


def test_unknown_label():
    p = prog(C.Assert(C.Binop("==", C.LabeledOld("pre", C.Perm("Money", (a,))), C.IntConst(0))))
    assert "unknown label pre" in messages(p)


def test_label_must_dominate():
    # label only in one branch of an If does not cover a use after it
    p = prog(C.If(C.BoolConst(True), (C.Label("l"),), ()),
             C.Assert(C.Binop("==", C.LabeledOld("l", amt), amt)))
    assert "unknown label l" in messages(p)


def test_resource_in_assert():
    assert "resource in assert" in messages(prog(C.Assert(C.Acc("Money", (a,), C.IntConst(1)))))


def test_resource_in_assume():
    assert "resource in assume" in messages(prog(C.Assume(C.Acc("Money", (a,), C.IntConst(1)))))


def test_arity_and_unknown_predicate():
    p = prog(C.Inhale(C.Acc("Money", (a, a), C.IntConst(1))), C.Inhale(C.Acc("Gold", (), C.IntConst(1))))
    msgs = messages(p)
    assert any("expects 1 argument" in m for m in msgs)
    assert "unknown predicate Gold" in msgs


def test_acc_under_negation():
    p = prog(C.Inhale(C.Unop("!", C.Acc("Money", (a,), C.IntConst(1)))))
    assert C.wellformed(p)


def test_duplicate_label_and_placeholder():
    p = prog(C.Label("x"), C.Label("x"), C.Assert(C.Binop("==", C.LabeledOld(C.PLACEHOLDER_LABEL, amt), amt)))
    msgs = messages(p)
    assert "duplicate label x" in msgs
    assert "placeholder label referenced" in msgs


def test_undeclared_variable():
    assert "undeclared variable z" in messages(prog(C.Havoc("z")))


def test_errors_carry_statement_index():
    (err,) = C.wellformed(prog(C.Label("pre"), C.Assert(C.Acc("Money", (a,), C.IntConst(1)))))
    assert (err.method, err.index) == ("m", 1)


def test_wellformed_is_idempotent():
    p = prog(C.Assert(C.Acc("Money", (a,), C.IntConst(1))), C.Havoc("q"))
    before = C.pretty_print(p)
    assert messages(p) == messages(p)
    assert C.pretty_print(p) == before


def test_print_inhale_acc():
    assert C.fmt_stmt(C.Inhale(C.Acc("Money", (a,), amt))) == ["inhale acc(Money(a), amt)"]


def test_print_label():
    assert C.fmt_stmt(C.Label("pre")) == ["label pre"]


def test_print_empty_method():
    assert C.fmt_method(C.CoreMethod("f", [], [], [])) == "method f() {}"


def test_print_nested_binops_parenthesized():
    e = C.Binop("-", C.Binop("-", C.IntConst(1), C.IntConst(2)), C.IntConst(3))
    assert C.fmt(e) == "(1 - 2) - 3"
    assert C.fmt(C.Binop("-", C.IntConst(1), C.Binop("-", C.IntConst(2), C.IntConst(3)))) == "1 - (2 - 3)"


def test_print_old_and_perm():
    assert C.fmt(C.LabeledOld("l1_pre", C.Perm("Money", (a,)))) == "old[l1_pre](perm(Money(a)))"


def test_print_if():
    s = C.If(C.Binop(">", amt, C.IntConst(0)), (C.Havoc("a"),), (C.Label("x"),))
    assert C.fmt_stmt(s) == ["if (amt > 0) {", "  havoc a", "} else {", "  label x", "}"]


def test_conj_and_conjuncts():
    parts = [C.BoolConst(True), amt, a]
    assert C.conjuncts(C.conj(parts)) == parts
    assert C.conj([]) == C.TRUE


# distinct expressions print differently
_leaf = st.one_of(st.integers(-3, 3).map(C.IntConst), st.sampled_from([a, amt]),
                  st.booleans().map(C.BoolConst))
_exprs = st.recursive(_leaf, lambda ch: st.one_of(
    st.builds(C.Binop, st.sampled_from(["+", "-", "==", "&&", "==>"]), ch, ch),
    st.builds(C.Unop, st.sampled_from(["!", "-"]), ch),
    st.builds(lambda x: C.Perm("Money", (x,)), ch),
    st.builds(lambda x, y: C.Acc("Money", (x,), y), ch, ch),
    st.builds(C.LabeledOld, st.sampled_from(["pre", "l1_post"]), ch),
    st.builds(C.Cond, ch, ch, ch),
), max_leaves=8)


@settings(max_examples=400, deadline=None)
@given(_exprs, _exprs)
def test_printing_is_injective(x, y):
    if x != y:
        assert C.fmt(x) != C.fmt(y)
