"""Resource accounting laws on random straight-line inhale/exhale sequences.

Everything here runs on concrete values with the oracle executor and on the
symbolic executor's constant-folded obligations, so no solver is involved.
"""

import subprocess

import pytest
from hypothesis import given, settings, strategies as st

from rslv import core_ir as C
from rslv import terms as T
from rslv.oracle import ConcreteExecutor, ConcreteState, DomainConfig, Failure
from rslv.types import INT
from rslv.vcgen import exec_method

CASES = 2500  # per property; five properties
RUNS = {"cases": 0}

R = C.PredicateDecl("R", (("arg1", INT),))
S = C.PredicateDecl("S", (("arg1", INT), ("arg2", INT)))
KEYS = range(4)


@pytest.fixture(autouse=True)
def no_solver(monkeypatch):
    def refuse(*a, **k):
        raise AssertionError("property suite must not start a solver")
    monkeypatch.setattr(subprocess, "Popen", refuse)


_op = st.tuples(st.sampled_from(["inhale", "exhale"]), st.sampled_from(["R", "S"]),
                st.integers(0, 3), st.integers(-1, 4))
_ops = st.lists(_op, max_size=12)


def acc(pred, key, amount):
    args = (C.IntConst(key),) if pred == "R" else (C.IntConst(key), C.IntConst(key % 2))
    return C.Acc(pred, args, C.IntConst(amount))


def stmt(op):
    kind, pred, key, amount = op
    return (C.Inhale if kind == "inhale" else C.Exhale)(acc(pred, key, amount))


def program(body):
    m = C.CoreMethod("m", [], [], list(body))
    return C.CoreProgram([R, S], [m]), m


def concrete(ops):
    """Resource tables after each successful step, and the failure (if any)."""
    prog, m = program(stmt(o) for o in ops)
    ex = ConcreteExecutor(prog, m, DomainConfig())
    state = ConcreteState({})
    tables = [dict(state.res)]
    for s in m.body:
        try:
            (state,) = ex.step(s, state)
        except Failure as f:
            return tables, f
        tables.append(dict(state.res))
    return tables, None


def key_of(op):
    _, pred, key, _ = op
    return (pred, (key,) if pred == "R" else (key, key % 2))


@settings(max_examples=CASES, deadline=None)
@given(_ops)
def test_nonnegativity(ops):
    RUNS["cases"] += 1
    tables, _ = concrete(ops)
    for t in tables:
        assert all(v >= 0 for v in t.values())


@settings(max_examples=CASES, deadline=None)
@given(_ops)
def test_frame_by_default(ops):
    RUNS["cases"] += 1
    tables, _ = concrete(ops)
    for op, before, after in zip(ops, tables, tables[1:]):
        touched = key_of(op)
        for k in set(before) | set(after):
            if k != touched:
                assert before.get(k, 0) == after.get(k, 0)


@settings(max_examples=CASES, deadline=None)
@given(_ops, st.sampled_from(["R", "S"]), st.integers(0, 3), st.integers(0, 4))
def test_inverse(ops, pred, key, amount):
    RUNS["cases"] += 1
    tables, fail = concrete(ops)
    prefix = ops[:len(tables) - 1]
    extended, fail2 = concrete(prefix + [("inhale", pred, key, amount), ("exhale", pred, key, amount)])
    assert fail2 is None
    strip = lambda t: {k: v for k, v in t.items() if v}  # noqa: E731
    assert strip(extended[-1]) == strip(tables[-1])


@settings(max_examples=CASES, deadline=None)
@given(_ops, st.sampled_from(["R", "S"]), st.integers(0, 3), st.integers(0, 4), st.integers(0, 4))
def test_aggregation(ops, pred, key, a, b):
    RUNS["cases"] += 1
    tables, _ = concrete(ops)
    prefix = ops[:len(tables) - 1]
    extended, fail = concrete(prefix + [("inhale", pred, key, a), ("inhale", pred, key, b)])
    assert fail is None
    k = key_of(("inhale", pred, key, 0))
    assert extended[-1].get(k, 0) == tables[-1].get(k, 0) + a + b


@settings(max_examples=CASES, deadline=None)
@given(_ops)
def test_symbolic_matches_concrete(ops):
    RUNS["cases"] += 1
    tables, fail = concrete(ops)
    body = [stmt(o) for o in ops]
    if fail is None:
        # pin every final amount so the symbolic side has to agree on all of them
        final = tables[-1]
        for pred in ("R", "S"):
            for key in KEYS:
                k = key_of(("inhale", pred, key, 0))
                body.append(C.Assert(C.Binop("==", C.Perm(k[0], tuple(C.IntConst(x) for x in k[1])),
                                             C.IntConst(final.get(k, 0)))))
    prog, m = program(body)
    obs = exec_method(prog, m)
    assert all(o.goal in (T.TRUE, T.FALSE) for o in obs)
    failing = [o for o in obs if o.goal == T.FALSE]
    if fail is None:
        assert failing == []
    else:
        assert failing, f"concrete run failed with {fail.kind}, symbolic obligations all hold"
        assert failing[0].kind == fail.kind


def test_enough_cases():
    assert 5 * CASES >= 10 ** 4
