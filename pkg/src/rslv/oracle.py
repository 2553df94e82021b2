"""Brute-force oracle: concrete execution of IR methods over small finite domains.

Every parameter assignment is tried.  Havocked variables branch over all values
of their type; uninterpreted functions get their tables filled in lazily, one
branch per possible result, which amounts to enumerating every function from
the finite domain.  Results never depend on the SMT backend or the VC generator.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

from rslv import core_ir as C
from rslv.errors import DomainTooLarge, Span
from rslv.types import BoolType, IntType, MapType, SortType, StructType, TupleType, Type


@dataclass
class DomainConfig:
    ids: int = 2  # elements of every uninterpreted sort
    amount_max: int = 3  # ints range over 0..amount_max
    cap: int = 10 ** 6
    # total number of explored states before giving up with Incomplete
    budget: int = 2 * 10 ** 5
    id_sizes: dict[str, int] = field(default_factory=dict)

    def __post_init__(self):
        if self.ids < 1 or any(n < 1 for n in self.id_sizes.values()):
            raise ValueError("every sort needs at least one element")
        if self.amount_max < 0:
            raise ValueError("integer range is empty")

    def sort_size(self, name: str) -> int:
        return self.id_sizes.get(name, self.ids)


# ---------------------------------------------------------------- concrete values

@dataclass(frozen=True)
class Elem:
    sort: str
    index: int

    def __str__(self):
        return f"{self.sort}#{self.index}"


@dataclass(frozen=True)
class CRec:
    struct: str
    fields: tuple

    def get(self, name):
        for n, v in self.fields:
            if n == name:
                return v
        raise KeyError(name)

    def with_field(self, name, value):
        return CRec(self.struct, tuple((n, value if n == name else v) for n, v in self.fields))

    def __str__(self):
        return self.struct + "{" + ", ".join(f"{n}: {show(v)}" for n, v in self.fields) + "}"


@dataclass(frozen=True)
class CMap:
    items: tuple  # sorted (key, int) pairs over the whole key domain

    def get(self, key):
        for k, v in self.items:
            if k == key:
                return v
        raise _Incomplete(f"map key {show(key)} outside the enumerated domain")

    def set(self, key, value):
        if not any(k == key for k, _ in self.items):
            raise _Incomplete(f"map key {show(key)} outside the enumerated domain")
        return CMap(tuple((k, value if k == key else v) for k, v in self.items))

    def __str__(self):
        return "{" + ", ".join(f"{show(k)}: {v}" for k, v in self.items) + "}"


def show(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, tuple):
        return "(" + ", ".join(show(x) for x in v) + ")"
    return str(v)


class _Incomplete(Exception):
    pass


class _Branch(Exception):
    """Raised mid-statement when an unknown function entry must be chosen."""

    def __init__(self, key, options):
        self.key = key
        self.options = options


class Failure(Exception):
    def __init__(self, kind: str, message: str, span: Span | None):
        super().__init__(message)
        self.kind = kind
        self.message = message
        self.span = span
        self.state = None


class Domains:
    def __init__(self, prog: C.CoreProgram, cfg: DomainConfig):
        self.structs = prog.structs
        self.cfg = cfg

    def size(self, t: Type) -> float:
        if isinstance(t, IntType):
            return self.cfg.amount_max + 1
        if isinstance(t, BoolType):
            return 2
        if isinstance(t, SortType):
            return self.cfg.sort_size(t.name)
        if isinstance(t, StructType):
            return math.prod(self.size(ft) for _, ft in self.structs[t.name])
        if isinstance(t, TupleType):
            return math.prod(self.size(e) for e in t.elems)
        if isinstance(t, MapType):
            n = self.size(t.key)
            return float("inf") if n > 64 else (self.cfg.amount_max + 1) ** n
        raise TypeError(f"no domain for {t}")

    def values(self, t: Type):
        if isinstance(t, IntType):
            return list(range(self.cfg.amount_max + 1))
        if isinstance(t, BoolType):
            return [False, True]
        if isinstance(t, SortType):
            return [Elem(t.name, i) for i in range(self.cfg.sort_size(t.name))]
        if isinstance(t, StructType):
            fields = self.structs[t.name]
            return [CRec(t.name, tuple(zip([n for n, _ in fields], combo)))
                    for combo in itertools.product(*[self.values(ft) for _, ft in fields])]
        if isinstance(t, TupleType):
            return list(itertools.product(*[self.values(e) for e in t.elems]))
        if isinstance(t, MapType):
            keys = self.values(t.key)
            ints = range(self.cfg.amount_max + 1)
            return [CMap(tuple(zip(keys, vs))) for vs in itertools.product(ints, repeat=len(keys))]
        raise TypeError(f"no domain for {t}")

    def finite(self, t: Type) -> bool:
        """Whether ranging over ``values(t)`` covers the whole type."""
        if isinstance(t, (IntType, MapType)):
            return False
        if isinstance(t, StructType):
            return all(self.finite(ft) for _, ft in self.structs[t.name])
        if isinstance(t, TupleType):
            return all(self.finite(e) for e in t.elems)
        return True


# ---------------------------------------------------------------- state

@dataclass
class ConcreteState:
    env: dict
    res: dict = field(default_factory=dict)  # (pred, args) -> amount, missing means 0
    snapshots: dict = field(default_factory=dict)
    ufs: dict = field(default_factory=dict)
    choices: list = field(default_factory=list)

    def copy(self) -> "ConcreteState":
        return ConcreteState(dict(self.env), dict(self.res), dict(self.snapshots),
                             dict(self.ufs), list(self.choices))

    def amount(self, pred: str, args: tuple) -> int:
        return self.res.get((pred, args), 0)

    def inhale(self, pred: str, args: tuple, amount: int):
        if amount < 0:
            raise Failure("negative-amount", f"amount of {pred}{show(args)} is negative ({amount})", None)
        self.res[(pred, args)] = self.amount(pred, args) + amount

    def exhale(self, pred: str, args: tuple, amount: int):
        if amount < 0:
            raise Failure("negative-amount", f"amount of {pred}{show(args)} is negative ({amount})", None)
        have = self.amount(pred, args)
        if have < amount:
            raise Failure("insufficient-resource",
                          f"insufficient resource {pred}{show(args)}: holds {have}, needs {amount}", None)
        self.res[(pred, args)] = have - amount


# ---------------------------------------------------------------- results

@dataclass
class Pass:
    assignments: int
    paths: int


@dataclass
class CounterExample:
    method: str
    assignment: dict[str, str]
    kind: str
    message: str
    span: Span | None
    statement: str
    choices: list[str] = field(default_factory=list)

    def lines(self) -> list[str]:
        out = [f"{k}={v}" for k, v in self.assignment.items()]
        out += [f"choice {c}" for c in self.choices]
        return out


@dataclass
class Incomplete:
    reason: str


OracleResult = Pass | CounterExample | Incomplete


# ---------------------------------------------------------------- executor

class ConcreteExecutor:
    def __init__(self, prog: C.CoreProgram, m: C.CoreMethod, cfg: DomainConfig):
        self.prog = prog
        self.m = m
        self.cfg = cfg
        self.dom = Domains(prog, cfg)
        self.var_types = dict(m.params) | dict(m.locals)
        self.func_ret = {f.name: f.ret for f in prog.functions}
        self.explored = 0

    # -- expressions

    def eval(self, e: C.CExpr, st: ConcreteState, env: dict, res: dict, bound: dict):
        ev = lambda x: self.eval(x, st, env, res, bound)  # noqa: E731
        if isinstance(e, (C.IntConst, C.BoolConst)):
            return e.value
        if isinstance(e, C.Var):
            return bound[e.name] if e.name in bound else env[e.name]
        if isinstance(e, C.Field):
            obj = ev(e.obj)
            return obj[int(e.name)] if isinstance(obj, tuple) else obj.get(e.name)
        if isinstance(e, C.StructCons):
            return CRec(e.struct, tuple((n, ev(v)) for n, v in e.fields))
        if isinstance(e, C.TupleCons):
            return tuple(ev(x) for x in e.elems)
        if isinstance(e, C.Unop):
            return (not ev(e.arg)) if e.op == "!" else -ev(e.arg)
        if isinstance(e, C.Binop):
            return self.binop(e.op, e.left, e.right, ev)
        if isinstance(e, C.Cond):
            return ev(e.then) if ev(e.cond) else ev(e.else_)
        if isinstance(e, C.Forall):
            return self.forall(e, st, env, res, bound)
        if isinstance(e, C.MapSelect):
            return ev(e.map).get(ev(e.key))
        if isinstance(e, C.MapStore):
            return ev(e.map).set(ev(e.key), ev(e.value))
        if isinstance(e, C.FuncApp):
            key = (e.func, tuple(ev(a) for a in e.args))
            if key not in st.ufs:
                # any table is a valid interpretation, so a restricted range only loses
                # counterexamples, it never invents them
                raise _Branch(key, self.dom.values(self.func_ret[e.func]))
            return st.ufs[key]
        if isinstance(e, C.Perm):
            return res.get((e.pred, tuple(ev(a) for a in e.args)), 0)
        if isinstance(e, C.LabeledOld):
            snap_env, snap_res = st.snapshots[e.label]
            return self.eval(e.expr, st, snap_env, snap_res, bound)
        raise TypeError(f"cannot evaluate {type(e).__name__}")

    @staticmethod
    def binop(op, left, right, ev):
        a = ev(left)
        if op == "&&":
            return a and ev(right)
        if op == "||":
            return a or ev(right)
        if op == "==>":
            return (not a) or ev(right)
        b = ev(right)
        if op in ("/", "%"):
            if b == 0:
                raise _Incomplete("division by zero")
            q = a // b
            if a - b * q < 0:
                q += 1
            return q if op == "/" else a - b * q
        return {
            "+": lambda: a + b, "-": lambda: a - b, "*": lambda: a * b,
            "==": lambda: a == b, "!=": lambda: a != b,
            "<": lambda: a < b, "<=": lambda: a <= b, ">": lambda: a > b, ">=": lambda: a >= b,
        }[op]()

    def forall(self, e: C.Forall, st, env, res, bound):
        for _, t in e.binders:
            if not self.dom.finite(t):
                raise _Incomplete(f"quantifier over {t} cannot be enumerated")
        names = [n for n, _ in e.binders]
        for combo in itertools.product(*[self.dom.values(t) for _, t in e.binders]):
            inner = dict(bound)
            inner.update(zip(names, combo))
            if not self.eval(e.body, st, env, res, inner):
                return False
        return True

    def cur(self, e, st):
        return self.eval(e, st, st.env, st.res, {})

    # -- inhale / exhale

    def inhale(self, e: C.CExpr, st: ConcreteState) -> bool:
        """Add resources and assume facts; False means the path is infeasible."""
        if isinstance(e, C.Binop) and e.op == "&&":
            return self.inhale(e.left, st) and self.inhale(e.right, st)
        if isinstance(e, C.Binop) and e.op == "==>":
            return self.inhale(e.right, st) if self.cur(e.left, st) else True
        if isinstance(e, C.Cond) and _has_acc(e):
            return self.inhale(e.then if self.cur(e.cond, st) else e.else_, st)
        if isinstance(e, C.Acc):
            st.inhale(e.pred, tuple(self.cur(a, st) for a in e.args), self.cur(e.amount, st))
            return True
        return bool(self.cur(e, st))

    def exhale(self, e: C.CExpr, st: ConcreteState, stmt: C.CStmt, origin=None, ospan=None):
        if e.origin is not None:
            origin, ospan = e.origin, e.span
        if isinstance(e, C.Binop) and e.op == "&&":
            self.exhale(e.left, st, stmt, origin, ospan)
            self.exhale(e.right, st, stmt, origin, ospan)
        elif isinstance(e, C.Binop) and e.op == "==>":
            if self.cur(e.left, st):
                self.exhale(e.right, st, stmt, origin, ospan)
        elif isinstance(e, C.Cond) and _has_acc(e):
            self.exhale(e.then if self.cur(e.cond, st) else e.else_, st, stmt, origin, ospan)
        elif isinstance(e, C.Acc):
            args = tuple(self.cur(a, st) for a in e.args)
            try:
                st.exhale(e.pred, args, self.cur(e.amount, st))
            except Failure as f:
                f.span = _span(stmt, ospan)
                raise
        elif not self.cur(e, st):
            kind = _pure_kind(stmt, origin)
            span = ospan if kind == "coupling-invariant-failure" and ospan else _span(stmt, ospan)
            raise Failure(kind, f"{kind.replace('-', ' ')}: {C.fmt(e)}", span)

    # -- statements

    def step(self, s: C.CStmt, st: ConcreteState) -> list[ConcreteState]:
        if isinstance(s, C.If):
            branch = s.then if self.cur(s.cond, st) else s.else_
            return self.block(branch, [st])
        if isinstance(s, C.Havoc):
            out = []
            for v in self.dom.values(self.var_types[s.var]):
                nxt = st.copy()
                nxt.env[s.var] = v
                nxt.choices.append(f"{s.var}={show(v)}")
                out.append(nxt)
            return out
        if isinstance(s, C.Label):
            st.snapshots[s.name] = (dict(st.env), dict(st.res))
            return [st]
        if isinstance(s, C.Assign):
            v = self.cur(s.value, st)
            st.env[s.var] = _update(st.env[s.var], s.path, v)
            return [st]
        if isinstance(s, (C.Inhale, C.Assume)):
            return [st] if self.inhale(s.expr, st) else []
        if isinstance(s, C.Exhale):
            self.exhale(s.expr, st, s)
            return [st]
        if isinstance(s, C.Assert):
            if not self.cur(s.expr, st):
                raise Failure("assert-failure", f"assertion failed: {C.fmt(s.expr)}", s.span)
            return [st]
        raise TypeError(f"cannot execute {type(s).__name__}")

    def step_branching(self, s: C.CStmt, st: ConcreteState) -> list[ConcreteState]:
        """Run ``s``, restarting it once per candidate value of any unknown function entry."""
        pending = [st]
        out = []
        while pending:
            cur = pending.pop()
            self.explored += 1
            if self.explored > self.cfg.budget:
                raise _Incomplete(f"more than {self.cfg.budget} states explored")
            attempt = cur.copy() if not isinstance(s, C.If) else cur
            try:
                out += self.step(s, attempt)
            except Failure as f:
                # keep the innermost attempt: its choices explain the failure
                if f.state is None:
                    f.state = attempt
                raise
            except _Branch as b:
                for v in b.options:
                    nxt = cur.copy()
                    nxt.ufs[b.key] = v
                    nxt.choices.append(f"{b.key[0]}{show(b.key[1])}={show(v)}")
                    pending.append(nxt)
        return out

    def block(self, stmts, states: list[ConcreteState]) -> list[ConcreteState]:
        for s in stmts:
            nxt = []
            for st in states:
                self.current = (s, st)
                nxt += self.step_branching(s, st)
            states = nxt
        return states


def _has_acc(e: C.CExpr) -> bool:
    return any(isinstance(x, C.Acc) for x in C.walk_expr(e))


def _span(stmt: C.CStmt, ospan):
    role = stmt.origin[0] if stmt.origin else None
    if role == "method-post" and ospan is not None:
        return ospan
    return stmt.span if stmt.span is not None else ospan


def _pure_kind(stmt: C.CStmt, origin) -> str:
    if origin is not None and origin[:2] == ("clause", "invariant"):
        return "coupling-invariant-failure"
    role = stmt.origin[0] if stmt.origin else None
    return {"method-post": "postcondition-failure",
            "call-pre": "precondition-at-call-failure"}.get(role, "assert-failure")


def _update(v, path, new):
    if not path:
        return new
    if isinstance(v, tuple):
        i = int(path[0])
        return v[:i] + (_update(v[i], path[1:], new),) + v[i + 1:]
    return v.with_field(path[0], _update(v.get(path[0]), path[1:], new))


# ---------------------------------------------------------------- entry points

def enumerate_check(m: C.CoreMethod, cfg: DomainConfig | None = None,
                    program: C.CoreProgram | None = None) -> OracleResult:
    """Run ``m`` on every parameter assignment; the first failing one is returned."""
    cfg = cfg or DomainConfig()
    program = program or C.CoreProgram([], [m])
    ex = ConcreteExecutor(program, m, cfg)
    dom = ex.dom
    total = math.prod(dom.size(t) for _, t in m.params)
    if total > cfg.cap:
        raise DomainTooLarge(f"{m.name}: {total:.3g} parameter assignments exceed the cap of {cfg.cap}")
    used = {x.func for s in C.walk_stmts(m.body) for e in C.stmt_exprs(s)
            for x in C.walk_expr(e) if isinstance(x, C.FuncApp)}
    tables = 1.0
    for f in program.functions:
        if f.name in used:
            points = math.prod(dom.size(t) for t in f.params)
            tables *= float(dom.size(f.ret)) ** points if points < 1000 else float("inf")
    if total * tables > cfg.cap:
        return Incomplete(f"enumerating the tables of {', '.join(sorted(used))} "
                          f"is infeasible ({total * tables:.3g} candidates)")
    names = [n for n, _ in m.params]
    paths = 0
    count = 0
    try:
        for combo in itertools.product(*[dom.values(t) for _, t in m.params]):
            count += 1
            env = dict(zip(names, combo))
            for n, t in m.locals:
                env[n] = dom.values(t)[0]
            st = ConcreteState(env)
            try:
                paths += len(ex.block(m.body, [st]))
            except Failure as f:
                s, failing = ex.current
                failing = f.state or failing
                return CounterExample(m.name, {n: show(v) for n, v in zip(names, combo)}, f.kind,
                                      f.message, f.span, C.fmt_stmt(s)[0], failing.choices)
    except _Incomplete as exc:
        return Incomplete(str(exc))
    return Pass(count, paths)


@dataclass
class Agreement:
    method: str
    note: str  # both-verified / both-failed / symbolic-incomplete / oracle-incomplete / ...


@dataclass
class Disagreement:
    method: str
    counterexample: CounterExample

    def __str__(self):
        return (f"{self.method}: verified symbolically but the oracle found "
                f"{self.counterexample.kind} ({'; '.join(self.counterexample.lines())})")


def agree(symbolic, m: C.CoreMethod, cfg: DomainConfig | None = None,
          program: C.CoreProgram | None = None, oracle: OracleResult | None = None):
    """Compare a symbolic verdict with the oracle; only a proof refuted by the oracle disagrees."""
    verdict = symbolic.function(m.name).verdict
    if oracle is None:
        try:
            oracle = enumerate_check(m, cfg, program)
        except DomainTooLarge as exc:
            oracle = Incomplete(str(exc))
    if isinstance(oracle, Incomplete):
        return Agreement(m.name, "oracle-incomplete")
    if isinstance(oracle, CounterExample):
        if verdict == "verified":
            return Disagreement(m.name, oracle)
        return Agreement(m.name, "both-failed")
    if verdict == "verified":
        return Agreement(m.name, "both-verified")
    return Agreement(m.name, "symbolic-incomplete")


def oracle_summary(result: OracleResult) -> dict:
    if isinstance(result, Pass):
        return {"result": "pass", "detail": f"{result.assignments} assignments, {result.paths} paths",
                "assignment": None}
    if isinstance(result, CounterExample):
        assignment = dict(result.assignment)
        for i, c in enumerate(result.choices):
            assignment[f"choice{i + 1}"] = c
        return {"result": "counterexample",
                "detail": f"{result.kind} at {result.span}: {result.message}",
                "assignment": assignment}
    return {"result": "incomplete", "detail": result.reason, "assignment": None}
