"""Forward symbolic execution of core IR methods.

The resource heap is kept as an append-only list of guarded deltas per
predicate; ``perm(R(k))`` is the sum of the deltas whose key equals ``k``.
A snapshot at a label is just the variable environment plus the list lengths
at that point, so snapshots can never observe later updates.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from rslv import core_ir as C
from rslv import terms as T
from rslv.errors import Span
from rslv.types import BoolType, IntType, MapType, SortType, StructType, TupleType, Type

KINDS = ("insufficient-resource", "assert-failure", "postcondition-failure",
         "precondition-at-call-failure", "coupling-invariant-failure", "negative-amount")


# ---------------------------------------------------------------- values

@dataclass(frozen=True)
class Rec:
    struct: str
    fields: tuple[tuple[str, object], ...]

    def get(self, name):
        for n, v in self.fields:
            if n == name:
                return v
        raise KeyError(name)

    def with_field(self, name, value) -> "Rec":
        return Rec(self.struct, tuple((n, value if n == name else v) for n, v in self.fields))


@dataclass(frozen=True)
class Tup:
    elems: tuple


def leaves(v) -> list[T.Term]:
    if isinstance(v, Rec):
        return [x for _, f in v.fields for x in leaves(f)]
    if isinstance(v, Tup):
        return [x for e in v.elems for x in leaves(e)]
    return [v]


def value_eq(a, b) -> T.Term:
    return T.and_(*[T.eq(x, y) for x, y in zip(leaves(a), leaves(b))])


def value_ite(c: T.Term, a, b):
    if isinstance(a, Rec):
        return Rec(a.struct, tuple((n, value_ite(c, v, b.get(n))) for n, v in a.fields))
    if isinstance(a, Tup):
        return Tup(tuple(value_ite(c, x, y) for x, y in zip(a.elems, b.elems)))
    return T.ite(c, a, b)


@dataclass
class Obligation:
    method: str
    index: int
    kind: str
    goal: T.Term
    pc: tuple[T.Term, ...]
    span: Span | None
    message: str

    def formula(self) -> T.Term:
        return T.implies(T.and_(*self.pc), self.goal)


@dataclass
class Entry:
    pred: str
    key: tuple[T.Term, ...]
    delta: T.Term
    guard: T.Term


@dataclass
class Snapshot:
    env: dict
    lengths: dict[str, int]


@dataclass
class SymState:
    pc: list[T.Term]
    env: dict
    heap: dict[str, list[Entry]]
    snapshots: dict[str, Snapshot] = field(default_factory=dict)

    def fork(self) -> "SymState":
        return SymState(list(self.pc), dict(self.env), {k: list(v) for k, v in self.heap.items()},
                        dict(self.snapshots))

    def lengths(self) -> dict[str, int]:
        return {k: len(v) for k, v in self.heap.items()}


@dataclass
class View:
    """Where variables and perm() read from: the current state or a snapshot."""
    env: dict
    lengths: dict[str, int] | None
    bound: dict


# ---------------------------------------------------------------- executor

class Executor:
    def __init__(self, prog: C.CoreProgram, method: C.CoreMethod):
        self.prog = prog
        self.m = method
        self.structs = prog.structs
        self.preds = {p.name: p for p in prog.predicates}
        self.var_types = dict(method.params) | dict(method.locals)
        self.obligations: list[Obligation] = []
        self.leak_checks: list[Obligation] = []
        self.counter = 0
        self.qcounter = 0

    # -- sorts and fresh values

    def leaf_sorts(self, t: Type) -> list[T.Sort]:
        if isinstance(t, IntType):
            return [T.INT_S]
        if isinstance(t, BoolType):
            return [T.BOOL_S]
        if isinstance(t, SortType):
            return [T.Sort(t.name)]
        if isinstance(t, MapType):
            s = T.INT_S
            for k in reversed(self.leaf_sorts(t.key)):
                s = T.array_sort(k, s)
            return [s]
        if isinstance(t, StructType):
            return [s for _, ft in self.structs[t.name] for s in self.leaf_sorts(ft)]
        if isinstance(t, TupleType):
            return [s for e in t.elems for s in self.leaf_sorts(e)]
        raise TypeError(f"no sort for {t}")

    def build(self, t: Type, make, name: str):
        """Build a value of type ``t`` whose leaves come from ``make(name, sort)``."""
        if isinstance(t, StructType):
            return Rec(t.name, tuple((fn, self.build(ft, make, f"{name}.{fn}"))
                                     for fn, ft in self.structs[t.name]))
        if isinstance(t, TupleType):
            return Tup(tuple(self.build(e, make, f"{name}.{i}") for i, e in enumerate(t.elems)))
        return make(name, self.leaf_sorts(t)[0])

    def fresh(self, t: Type, name: str):
        return self.build(t, T.Const, name)

    # -- heap

    def perm(self, st: SymState, pred: str, key: tuple, lengths=None) -> T.Term:
        entries = st.heap.get(pred, [])
        if lengths is not None:
            entries = entries[:lengths.get(pred, 0)]
        parts = []
        for en in entries:
            match = T.and_(en.guard, *[T.eq(a, b) for a, b in zip(key, en.key)])
            parts.append(T.ite(match, en.delta, T.ZERO))
        return T.sum_terms(parts)

    # -- evaluation

    def eval(self, e: C.CExpr, st: SymState, view: View):
        if isinstance(e, C.IntConst):
            return T.IntV(e.value)
        if isinstance(e, C.BoolConst):
            return T.BoolV(e.value)
        if isinstance(e, C.Var):
            if e.name in view.bound:
                return view.bound[e.name]
            return view.env[e.name]
        if isinstance(e, C.Field):
            obj = self.eval(e.obj, st, view)
            if isinstance(obj, Tup):
                return obj.elems[int(e.name)]
            return obj.get(e.name)
        if isinstance(e, C.StructCons):
            return Rec(e.struct, tuple((n, self.eval(v, st, view)) for n, v in e.fields))
        if isinstance(e, C.TupleCons):
            return Tup(tuple(self.eval(x, st, view) for x in e.elems))
        if isinstance(e, C.Unop):
            a = self.eval(e.arg, st, view)
            return T.not_(a) if e.op == "!" else T.neg(a)
        if isinstance(e, C.Binop):
            return self.binop(e, st, view)
        if isinstance(e, C.Cond):
            c = self.eval(e.cond, st, view)
            return value_ite(c, self.eval(e.then, st, view), self.eval(e.else_, st, view))
        if isinstance(e, C.Forall):
            bound = dict(view.bound)
            bvars = []
            for name, t in e.binders:
                self.qcounter += 1
                tag = self.qcounter

                def mk(n, s, tag=tag):
                    v = T.BVar(f"{n}!{tag}", s)
                    bvars.append(v)
                    return v
                bound[name] = self.build(t, mk, name)
            body = self.eval(e.body, st, View(view.env, view.lengths, bound))
            return T.forall(tuple(bvars), body)
        if isinstance(e, C.MapSelect):
            m = self.eval(e.map, st, view)
            for k in leaves(self.eval(e.key, st, view)):
                m = T.select(m, k)
            return m
        if isinstance(e, C.MapStore):
            m = self.eval(e.map, st, view)
            ks = leaves(self.eval(e.key, st, view))
            return self._store(m, ks, self.eval(e.value, st, view))
        if isinstance(e, C.FuncApp):
            args = tuple(x for a in e.args for x in leaves(self.eval(a, st, view)))
            sig = next(f for f in self.prog.functions if f.name == e.func)
            return self.build(sig.ret, lambda n, s: T.UF(n, args, s), e.func)
        if isinstance(e, C.Perm):
            key = tuple(x for a in e.args for x in leaves(self.eval(a, st, view)))
            return self.perm(st, e.pred, key, view.lengths)
        if isinstance(e, C.LabeledOld):
            snap = st.snapshots[e.label]
            return self.eval(e.expr, st, View(snap.env, snap.lengths, view.bound))
        raise TypeError(f"cannot evaluate {type(e).__name__} as a value")

    def _store(self, m, ks, v):
        if len(ks) == 1:
            return T.store(m, ks[0], v)
        inner = T.select(m, ks[0])
        return T.store(m, ks[0], self._store(inner, ks[1:], v))

    def binop(self, e: C.Binop, st, view):
        op = e.op
        a = self.eval(e.left, st, view)
        if op == "&&":
            return T.and_(a, self.eval(e.right, st, view))
        if op == "||":
            return T.or_(a, self.eval(e.right, st, view))
        if op == "==>":
            return T.implies(a, self.eval(e.right, st, view))
        b = self.eval(e.right, st, view)
        if op == "==":
            return value_eq(a, b)
        if op == "!=":
            return T.not_(value_eq(a, b))
        if op in ("<", "<=", ">", ">="):
            return T.cmp(op, a, b)
        return {"+": T.add, "-": T.sub, "*": T.mul, "/": T.div, "%": T.mod}[op](a, b)

    def cur(self, st: SymState) -> View:
        return View(st.env, None, {})

    # -- obligations

    def oblige(self, st: SymState, kind: str, goal: T.Term, span, message: str):
        ob = Obligation(self.m.name, len(self.obligations), kind, goal, tuple(st.pc), span, message)
        self.obligations.append(ob)
        # assume-after-check: later obligations are not blamed for this one
        st.pc.append(goal)

    def check_sufficient(self, st: SymState, guard, have, amount, span, message):
        self.oblige(st, "insufficient-resource", T.implies(guard, T.cmp(">=", have, amount)), span, message)

    def pure_kind(self, stmt: C.CStmt, origin) -> str:
        if origin is not None and origin[0] == "clause" and origin[1] == "invariant":
            return "coupling-invariant-failure"
        role = stmt.origin[0] if stmt.origin else None
        if role == "method-post":
            return "postcondition-failure"
        if role == "call-pre":
            return "precondition-at-call-failure"
        return "assert-failure"

    def message(self, kind: str, stmt: C.CStmt, origin, e: C.CExpr) -> str:
        if kind == "coupling-invariant-failure":
            where = origin[2] if len(origin) > 2 else "struct"
            return f"coupling invariant of {where} may not hold"
        if kind == "postcondition-failure":
            return f"postcondition of {self.m.name} may not hold: {C.fmt(e)}"
        if kind == "precondition-at-call-failure":
            return f"precondition of {stmt.origin[1]} may not hold at this call: {C.fmt(e)}"
        return f"assertion may not hold: {C.fmt(e)}"

    def span_for(self, stmt: C.CStmt, origin_span):
        role = stmt.origin[0] if stmt.origin else None
        if role == "method-post" and origin_span is not None:
            return origin_span
        return stmt.span if stmt.span is not None else origin_span

    # -- inhale / exhale

    def inhale(self, e: C.CExpr, st: SymState, stmt, guard=T.TRUE, origin=None, ospan=None):
        if e.origin is not None:
            origin, ospan = e.origin, e.span
        if isinstance(e, C.Binop) and e.op == "&&":
            self.inhale(e.left, st, stmt, guard, origin, ospan)
            self.inhale(e.right, st, stmt, guard, origin, ospan)
        elif isinstance(e, C.Binop) and e.op == "==>":
            c = self.eval(e.left, st, self.cur(st))
            self.inhale(e.right, st, stmt, T.and_(guard, c), origin, ospan)
        elif isinstance(e, C.Cond) and self._has_acc(e):
            c = self.eval(e.cond, st, self.cur(st))
            self.inhale(e.then, st, stmt, T.and_(guard, c), origin, ospan)
            self.inhale(e.else_, st, stmt, T.and_(guard, T.not_(c)), origin, ospan)
        elif isinstance(e, C.Acc):
            key, amount, label = self._acc(e, st)
            self.oblige(st, "negative-amount", T.implies(guard, T.cmp(">=", amount, T.ZERO)),
                        self.span_for(stmt, ospan), f"amount of {label} may be negative")
            st.heap.setdefault(e.pred, []).append(Entry(e.pred, key, amount, guard))
        else:
            st.pc.append(T.implies(guard, self.eval(e, st, self.cur(st))))

    def exhale(self, e: C.CExpr, st: SymState, stmt, guard=T.TRUE, origin=None, ospan=None):
        if e.origin is not None:
            origin, ospan = e.origin, e.span
        if isinstance(e, C.Binop) and e.op == "&&":
            self.exhale(e.left, st, stmt, guard, origin, ospan)
            self.exhale(e.right, st, stmt, guard, origin, ospan)
        elif isinstance(e, C.Binop) and e.op == "==>":
            c = self.eval(e.left, st, self.cur(st))
            self.exhale(e.right, st, stmt, T.and_(guard, c), origin, ospan)
        elif isinstance(e, C.Cond) and self._has_acc(e):
            c = self.eval(e.cond, st, self.cur(st))
            self.exhale(e.then, st, stmt, T.and_(guard, c), origin, ospan)
            self.exhale(e.else_, st, stmt, T.and_(guard, T.not_(c)), origin, ospan)
        elif isinstance(e, C.Acc):
            key, amount, label = self._acc(e, st)
            span = self.span_for(stmt, ospan)
            self.oblige(st, "negative-amount", T.implies(guard, T.cmp(">=", amount, T.ZERO)),
                        span, f"amount of {label} may be negative")
            have = self.perm(st, e.pred, key)
            self.check_sufficient(st, guard, have, amount, span,
                                  f"insufficient resource {label}: cannot give away {C.fmt(e.amount)}")
            st.heap.setdefault(e.pred, []).append(Entry(e.pred, key, T.neg(amount), guard))
        else:
            kind = self.pure_kind(stmt, origin)
            goal = T.implies(guard, self.eval(e, st, self.cur(st)))
            span = ospan if kind == "coupling-invariant-failure" and ospan else self.span_for(stmt, ospan)
            self.oblige(st, kind, goal, span, self.message(kind, stmt, origin, e))

    @staticmethod
    def _has_acc(e: C.CExpr) -> bool:
        return any(isinstance(x, C.Acc) for x in C.walk_expr(e))

    def _acc(self, e: C.Acc, st):
        view = self.cur(st)
        key = tuple(x for a in e.args for x in leaves(self.eval(a, st, view)))
        amount = self.eval(e.amount, st, view)
        label = f"{e.pred}({', '.join(C.fmt(a) for a in e.args)})"
        return key, amount, label

    # -- statements

    def initial(self) -> SymState:
        env = {}
        for n, t in self.m.params:
            env[n] = self.fresh(t, n)
        for n, t in self.m.locals:
            env[n] = self.fresh(t, f"{n}@0")
        return SymState([], env, {p: [] for p in self.preds})

    def step(self, s: C.CStmt, st: SymState) -> list[SymState]:
        if isinstance(s, C.Inhale):
            self.inhale(s.expr, st, s)
        elif isinstance(s, C.Exhale):
            self.exhale(s.expr, st, s)
        elif isinstance(s, C.Assert):
            goal = self.eval(s.expr, st, self.cur(st))
            self.oblige(st, "assert-failure", goal, s.span, f"assertion may not hold: {C.fmt(s.expr)}")
        elif isinstance(s, C.Assume):
            st.pc.append(self.eval(s.expr, st, self.cur(st)))
        elif isinstance(s, C.Label):
            st.snapshots[s.name] = Snapshot(dict(st.env), st.lengths())
        elif isinstance(s, C.Assign):
            v = self.eval(s.value, st, self.cur(st))
            st.env[s.var] = self._update(st.env[s.var], s.path, v)
        elif isinstance(s, C.Havoc):
            self.counter += 1
            st.env[s.var] = self.fresh(self.var_types[s.var], f"{s.var}@{self.counter}")
        elif isinstance(s, C.If):
            c = self.eval(s.cond, st, self.cur(st))
            a, b = st.fork(), st
            a.pc.append(c)
            b.pc.append(T.not_(c))
            return self.block(s.then, [a]) + self.block(s.else_, [b])
        else:
            raise TypeError(f"cannot execute {type(s).__name__}")
        return [st]

    def _update(self, v, path, new):
        if not path:
            return new
        if isinstance(v, Tup):
            i = int(path[0])
            elems = list(v.elems)
            elems[i] = self._update(elems[i], path[1:], new)
            return Tup(tuple(elems))
        return v.with_field(path[0], self._update(v.get(path[0]), path[1:], new))

    def block(self, stmts, states: list[SymState]) -> list[SymState]:
        for s in stmts:
            states = [out for st in states for out in self.step(s, st)]
        return states

    def run(self) -> list[Obligation]:
        finals = self.block(self.m.body, [self.initial()])
        for st in finals:
            self._leaks(st)
        return self.obligations

    def _leaks(self, st: SymState):
        for pred, entries in st.heap.items():
            seen = []
            for en in entries:
                if en.key in seen:
                    continue
                seen.append(en.key)
                have = self.perm(st, pred, en.key)
                label = f"{pred}({', '.join(T.smt(k) for k in en.key)})"
                self.leak_checks.append(Obligation(self.m.name, len(self.leak_checks), "leak",
                                                   T.cmp("<=", have, T.ZERO), tuple(st.pc),
                                                   self.m.span, f"resource {label} may be leaked"))


def exec_method(prog: C.CoreProgram, m: C.CoreMethod, executor=None) -> list[Obligation]:
    return (executor or Executor)(prog, m).run()


def collect_vcs(prog: C.CoreProgram, executor=None) -> dict[str, list[Obligation]]:
    return {m.name: exec_method(prog, m, executor) for m in prog.methods}
