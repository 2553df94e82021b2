from rslv import core_ir as C
from rslv import smt
from rslv import terms as T
from rslv.pipeline import compile_source
from rslv.types import BOOL, INT, SortType
from rslv.vcgen import collect_vcs, exec_method

from conftest import needs_solver, read_corpus

ID = SortType("Id")
a, b = C.Var("a", ID), C.Var("b", ID)
n, c = C.Var("n", INT), C.Var("c", BOOL)
R = C.PredicateDecl("R", (("arg1", ID),))
PARAMS = [("a", ID), ("b", ID), ("n", INT), ("c", BOOL)]


def acc(x, amt):
    return C.Acc("R", (x,), amt if isinstance(amt, C.CExpr) else C.IntConst(amt))


def perm(x):
    return C.Perm("R", (x,))


def eq(x, y):
    return C.Binop("==", x, y if isinstance(y, C.CExpr) else C.IntConst(y))


def obligations(*body):
    m = C.CoreMethod("m", PARAMS, [], list(body))
    p = C.CoreProgram([R], [m], sorts=["Id"])
    assert C.wellformed(p) == []
    return exec_method(p, m)


def valid(ob):
    if ob.goal == T.TRUE:
        return True
    res = smt.check(smt.lower(ob))
    assert not isinstance(res, smt.Unknown), res
    return isinstance(res, smt.Proved)


def test_empty_method_no_obligations():
    assert obligations() == []


def test_trusted_only_program():
    core = compile_source("type Id;\nfn g(x: Id);\n#[pure]\nfn h(x: Id) -> bool;\n", "t.rsl")
    assert collect_vcs(core) == {}


def test_inhale_twice_aggregates():
    obs = obligations(C.Inhale(acc(a, 1)), C.Inhale(acc(a, 1)), C.Assert(eq(perm(a), 2)))
    assert [o.kind for o in obs] == ["negative-amount", "negative-amount", "assert-failure"]
    assert all(o.goal == T.TRUE for o in obs)


def test_inhale_true_changes_nothing():
    assert obligations(C.Inhale(C.TRUE), C.Assert(eq(perm(a), 0)))[0].goal == T.TRUE


def test_overdraw_is_unprovable():
    obs = obligations(C.Inhale(acc(a, 2)), C.Exhale(acc(a, 3)))
    assert obs[-1].kind == "insufficient-resource"
    assert obs[-1].goal == T.FALSE


def test_exhale_zero_is_fine():
    obs = obligations(C.Exhale(acc(a, 0)))
    assert [o.kind for o in obs] == ["negative-amount", "insufficient-resource"]
    assert all(o.goal == T.TRUE for o in obs)


def test_old_reads_snapshot():
    obs = obligations(C.Inhale(acc(a, 2)), C.Label("l"), C.Exhale(acc(a, 2)),
                      C.Assert(eq(C.LabeledOld("l", perm(a)), 2)), C.Assert(eq(perm(a), 0)))
    assert all(o.goal == T.TRUE for o in obs)


def test_obligation_order_is_statement_then_conjunct():
    obs = obligations(C.Inhale(acc(a, 5)), C.Exhale(C.conj([acc(a, 1), eq(n, n), acc(a, 2)])))
    assert [o.kind for o in obs] == ["negative-amount", "negative-amount", "insufficient-resource",
                                     "assert-failure", "negative-amount", "insufficient-resource"]
    assert [o.index for o in obs] == list(range(6))


def test_deterministic():
    body = [C.Inhale(acc(a, n)), C.If(c, (C.Exhale(acc(b, 1)),), ())]
    assert [T.smt(o.formula()) for o in obligations(*body)] == [T.smt(o.formula()) for o in obligations(*body)]


def test_negative_amount_obligation_mentions_amount():
    (ob,) = obligations(C.Inhale(acc(a, n)))
    assert ob.kind == "negative-amount"
    assert T.smt(ob.goal) == "(>= n 0)"


@needs_solver
def test_frame_by_default():
    obs = obligations(C.Assume(C.Unop("!", eq(a, b))), C.Inhale(acc(a, n)), C.Assert(eq(perm(b), 0)))
    assert obs[-1].goal != T.TRUE
    assert valid(obs[-1])


@needs_solver
def test_conditional_inhale():
    guarded = C.Cond(c, acc(a, n), C.TRUE)
    obs = obligations(C.Assume(C.Binop(">=", n, C.IntConst(0))), C.Inhale(guarded),
                      C.Assert(C.Binop("==>", c, eq(perm(a), n))),
                      C.Assert(C.Binop("==>", C.Unop("!", c), eq(perm(a), 0))),
                      C.Assert(eq(perm(a), n)))
    asserts = [o for o in obs if o.kind == "assert-failure"]
    assert [valid(o) for o in asserts] == [True, True, False]


@needs_solver
def test_branches_fork_state():
    obs = obligations(C.If(c, (C.Inhale(acc(a, 1)),), (C.Inhale(acc(a, 2)),)),
                      C.Assert(C.Binop(">=", perm(a), C.IntConst(1))))
    final = [o for o in obs if o.kind == "assert-failure"]
    assert len(final) == 2 and all(valid(o) for o in final)


def bank_vcs(name="bank_ok.rsl"):
    return collect_vcs(compile_source(read_corpus(name), name))


@needs_solver
def test_withdraw_obligations_discharged():
    obs = bank_vcs()["Bank::withdraw"]
    kinds = {o.kind for o in obs}
    assert {"negative-amount", "insufficient-resource"} <= kinds
    assert all(valid(o) for o in obs)


@needs_solver
def test_bad_fails_at_second_withdraw():
    obs = bank_vcs("bad.rsl")["bad"]
    failing = [o for o in obs if not valid(o)]
    assert failing
    assert failing[0].kind == "insufficient-resource"
    assert failing[0].span.line == 39


@needs_solver
def test_transfer_final_exhale_provable():
    obs = bank_vcs()["transfer"]
    assert all(valid(o) for o in obs)


def test_callee_bodies_not_consulted():
    text = read_corpus("bank_ok.rsl")
    changed = text
    # rewrite deposit's body so it no longer does anything; transfer's obligations must stay identical
    start = changed.index("fn deposit")
    body_open = changed.index("{", start)
    depth, i = 0, body_open
    while True:
        depth += {"{": 1, "}": -1}.get(changed[i], 0)
        if depth == 0:
            break
        i += 1
    hollow = changed[:body_open] + "{ }" + changed[i + 1:]
    before = [T.smt(o.formula()) for o in bank_vcs()["transfer"]]
    after = [T.smt(o.formula()) for o in collect_vcs(compile_source(hollow, "bank_ok.rsl"))["transfer"]]
    assert before == after
