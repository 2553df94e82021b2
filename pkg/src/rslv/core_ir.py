"""Intermediate representation produced by the encoder.

Expressions and statements are frozen dataclasses.  Besides their structural
fields they carry two pieces of metadata that never take part in equality or
printing: ``span`` (source location) and ``origin`` (why the node exists, used
to pick the diagnostic kind when an obligation fails).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any

from rslv.errors import IRError, Span
from rslv.types import Type

PLACEHOLDER_LABEL = "l_eps"


def _meta():
    return field(default=None, compare=False, repr=False, kw_only=True)


# ---------------------------------------------------------------- expressions

@dataclass(frozen=True)
class CExpr:
    span: Span | None = _meta()
    origin: Any = _meta()


@dataclass(frozen=True)
class IntConst(CExpr):
    value: int


@dataclass(frozen=True)
class BoolConst(CExpr):
    value: bool


@dataclass(frozen=True)
class Var(CExpr):
    name: str
    type: Type


@dataclass(frozen=True)
class Field(CExpr):
    """Read of a struct field, or a tuple component when ``name`` is a digit."""
    obj: CExpr
    name: str


@dataclass(frozen=True)
class StructCons(CExpr):
    struct: str
    fields: tuple[tuple[str, CExpr], ...]


@dataclass(frozen=True)
class TupleCons(CExpr):
    elems: tuple[CExpr, ...]


@dataclass(frozen=True)
class Unop(CExpr):
    op: str  # "!" or "-"
    arg: CExpr


@dataclass(frozen=True)
class Binop(CExpr):
    op: str  # + - * / % == != < <= > >= && || ==>
    left: CExpr
    right: CExpr


@dataclass(frozen=True)
class Cond(CExpr):
    cond: CExpr
    then: CExpr
    else_: CExpr


@dataclass(frozen=True)
class Forall(CExpr):
    binders: tuple[tuple[str, Type], ...]
    body: CExpr


@dataclass(frozen=True)
class MapSelect(CExpr):
    map: CExpr
    key: CExpr


@dataclass(frozen=True)
class MapStore(CExpr):
    map: CExpr
    key: CExpr
    value: CExpr


@dataclass(frozen=True)
class FuncApp(CExpr):
    """Application of an uninterpreted (bodyless pure) function."""
    func: str
    args: tuple[CExpr, ...]


@dataclass(frozen=True)
class Acc(CExpr):
    pred: str
    args: tuple[CExpr, ...]
    amount: CExpr


@dataclass(frozen=True)
class Perm(CExpr):
    pred: str
    args: tuple[CExpr, ...]


@dataclass(frozen=True)
class LabeledOld(CExpr):
    label: str
    expr: CExpr


TRUE = BoolConst(True)
FALSE = BoolConst(False)


def conj(parts: list[CExpr]) -> CExpr:
    """Left-to-right conjunction; the empty conjunction is ``true``."""
    if not parts:
        return TRUE
    out = parts[0]
    for p in parts[1:]:
        out = Binop("&&", out, p)
    return out


def conjuncts(e: CExpr) -> list[CExpr]:
    if isinstance(e, Binop) and e.op == "&&":
        return conjuncts(e.left) + conjuncts(e.right)
    return [e]


# ---------------------------------------------------------------- statements

@dataclass(frozen=True)
class CStmt:
    span: Span | None = _meta()
    origin: Any = _meta()


@dataclass(frozen=True)
class Inhale(CStmt):
    expr: CExpr


@dataclass(frozen=True)
class Exhale(CStmt):
    expr: CExpr


@dataclass(frozen=True)
class Assert(CStmt):
    expr: CExpr


@dataclass(frozen=True)
class Assume(CStmt):
    expr: CExpr


@dataclass(frozen=True)
class Label(CStmt):
    name: str


@dataclass(frozen=True)
class Assign(CStmt):
    """``var.path := value``; a non-empty path is a functional record update."""
    var: str
    path: tuple[str, ...]
    value: CExpr


@dataclass(frozen=True)
class Havoc(CStmt):
    var: str


@dataclass(frozen=True)
class If(CStmt):
    cond: CExpr
    then: tuple[CStmt, ...]
    else_: tuple[CStmt, ...] = ()


# ---------------------------------------------------------------- declarations

@dataclass(frozen=True)
class PredicateDecl:
    name: str
    params: tuple[tuple[str, Type], ...]


@dataclass(frozen=True)
class FunctionSig:
    name: str
    params: tuple[Type, ...]
    ret: Type


@dataclass
class CoreMethod:
    name: str
    params: list[tuple[str, Type]]
    locals: list[tuple[str, Type]]
    body: list[CStmt]
    span: Span | None = field(default=None, compare=False, repr=False)


@dataclass
class CoreProgram:
    predicates: list[PredicateDecl]
    methods: list[CoreMethod]
    sorts: list[str] = field(default_factory=list)
    structs: dict[str, list[tuple[str, Type]]] = field(default_factory=dict)
    functions: list[FunctionSig] = field(default_factory=list)

    def method(self, name: str) -> CoreMethod:
        for m in self.methods:
            if m.name == name:
                return m
        raise KeyError(name)

    def predicate(self, name: str) -> PredicateDecl | None:
        for p in self.predicates:
            if p.name == name:
                return p
        return None


# ---------------------------------------------------------------- traversal

def subexprs(e: CExpr):
    if isinstance(e, Field):
        yield e.obj
    elif isinstance(e, StructCons):
        for _, v in e.fields:
            yield v
    elif isinstance(e, TupleCons):
        yield from e.elems
    elif isinstance(e, Unop):
        yield e.arg
    elif isinstance(e, Binop):
        yield e.left
        yield e.right
    elif isinstance(e, Cond):
        yield e.cond
        yield e.then
        yield e.else_
    elif isinstance(e, Forall):
        yield e.body
    elif isinstance(e, MapSelect):
        yield e.map
        yield e.key
    elif isinstance(e, MapStore):
        yield e.map
        yield e.key
        yield e.value
    elif isinstance(e, (FuncApp, Perm)):
        yield from e.args
    elif isinstance(e, Acc):
        yield from e.args
        yield e.amount
    elif isinstance(e, LabeledOld):
        yield e.expr


def walk_expr(e: CExpr):
    yield e
    for c in subexprs(e):
        yield from walk_expr(c)


def stmt_exprs(s: CStmt):
    if isinstance(s, (Inhale, Exhale, Assert, Assume)):
        yield s.expr
    elif isinstance(s, Assign):
        yield s.value
    elif isinstance(s, If):
        yield s.cond


def walk_stmts(stmts):
    for s in stmts:
        yield s
        if isinstance(s, If):
            yield from walk_stmts(s.then)
            yield from walk_stmts(s.else_)


# ---------------------------------------------------------------- printing

_ATOMIC = (IntConst, BoolConst, Var, Field, FuncApp, Acc, Perm, LabeledOld, MapSelect,
           MapStore, StructCons, TupleCons, Cond, Forall)


def fmt(e: CExpr) -> str:
    if isinstance(e, IntConst):
        return str(e.value) if e.value >= 0 else f"({e.value})"
    if isinstance(e, BoolConst):
        return "true" if e.value else "false"
    if isinstance(e, Var):
        return e.name
    if isinstance(e, Field):
        return f"{_operand(e.obj)}.{e.name}"
    if isinstance(e, StructCons):
        return f"{e.struct}{{" + ", ".join(f"{n}: {fmt(v)}" for n, v in e.fields) + "}"
    if isinstance(e, TupleCons):
        inner = ", ".join(fmt(x) for x in e.elems)
        return f"({inner},)" if len(e.elems) == 1 else f"({inner})"
    if isinstance(e, Unop):
        return f"{e.op}{_operand(e.arg)}"
    if isinstance(e, Binop):
        return f"{_operand(e.left)} {e.op} {_operand(e.right)}"
    if isinstance(e, Cond):
        return f"({fmt(e.cond)} ? {fmt(e.then)} : {fmt(e.else_)})"
    if isinstance(e, Forall):
        bs = ", ".join(f"{n}: {t}" for n, t in e.binders)
        return f"(forall {bs} :: {fmt(e.body)})"
    if isinstance(e, MapSelect):
        return f"{_operand(e.map)}[{fmt(e.key)}]"
    if isinstance(e, MapStore):
        return f"{_operand(e.map)}[{fmt(e.key)} := {fmt(e.value)}]"
    if isinstance(e, FuncApp):
        return f"{e.func}({', '.join(fmt(a) for a in e.args)})"
    if isinstance(e, Acc):
        return f"acc({e.pred}({', '.join(fmt(a) for a in e.args)}), {fmt(e.amount)})"
    if isinstance(e, Perm):
        return f"perm({e.pred}({', '.join(fmt(a) for a in e.args)}))"
    if isinstance(e, LabeledOld):
        return f"old[{e.label}]({fmt(e.expr)})"
    raise TypeError(f"not an IR expression: {e!r}")


def _operand(e: CExpr) -> str:
    s = fmt(e)
    return s if isinstance(e, _ATOMIC) else f"({s})"


def fmt_stmt(s: CStmt, indent: int = 0) -> list[str]:
    pad = "  " * indent
    if isinstance(s, Inhale):
        return [f"{pad}inhale {fmt(s.expr)}"]
    if isinstance(s, Exhale):
        return [f"{pad}exhale {fmt(s.expr)}"]
    if isinstance(s, Assert):
        return [f"{pad}assert {fmt(s.expr)}"]
    if isinstance(s, Assume):
        return [f"{pad}assume {fmt(s.expr)}"]
    if isinstance(s, Label):
        return [f"{pad}label {s.name}"]
    if isinstance(s, Assign):
        target = ".".join((s.var,) + s.path)
        return [f"{pad}{target} := {fmt(s.value)}"]
    if isinstance(s, Havoc):
        return [f"{pad}havoc {s.var}"]
    if isinstance(s, If):
        out = [f"{pad}if ({fmt(s.cond)}) {{"]
        for t in s.then:
            out += fmt_stmt(t, indent + 1)
        if s.else_:
            out.append(f"{pad}}} else {{")
            for t in s.else_:
                out += fmt_stmt(t, indent + 1)
        out.append(f"{pad}}}")
        return out
    raise TypeError(f"not an IR statement: {s!r}")


def fmt_method(m: CoreMethod) -> str:
    params = ", ".join(f"{n}: {t}" for n, t in m.params)
    head = f"method {m.name}({params})"
    lines = [f"  var {n}: {t}" for n, t in m.locals]
    for s in m.body:
        lines += fmt_stmt(s, 1)
    if not lines:
        return head + " {}"
    return head + " {\n" + "\n".join(lines) + "\n}"


def pretty_print(p: CoreProgram) -> str:
    chunks = []
    for s in p.sorts:
        chunks.append(f"domain {s} {{}}")
    for name, fields in p.structs.items():
        fs = ", ".join(f"{n}: {t}" for n, t in fields)
        chunks.append(f"record {name}({fs})")
    for f in p.functions:
        ps = ", ".join(str(t) for t in f.params)
        chunks.append(f"function {f.name}({ps}): {f.ret}")
    for pr in p.predicates:
        ps = ", ".join(f"{n}: {t}" for n, t in pr.params)
        chunks.append(f"predicate {pr.name}({ps})")
    for m in p.methods:
        chunks.append(fmt_method(m))
    return "\n\n".join(chunks) + "\n"


# ---------------------------------------------------------------- well-formedness

def _positive_acc_ok(e: CExpr) -> list[str]:
    """Acc atoms may appear only under &&, in Cond branches, or right of ==>."""
    problems = []
    if isinstance(e, Acc):
        for a in list(e.args) + [e.amount]:
            problems += _no_acc(a, "inside acc arguments")
        return problems
    if isinstance(e, Binop) and e.op == "&&":
        return _positive_acc_ok(e.left) + _positive_acc_ok(e.right)
    if isinstance(e, Binop) and e.op == "==>":
        return _no_acc(e.left, "left of ==>") + _positive_acc_ok(e.right)
    if isinstance(e, Cond):
        return _no_acc(e.cond, "in a condition") + _positive_acc_ok(e.then) + _positive_acc_ok(e.else_)
    return _no_acc(e, "in a non-positive position")


def _no_acc(e: CExpr, where: str) -> list[str]:
    if any(isinstance(x, Acc) for x in walk_expr(e)):
        return [f"acc {where}"]
    return []


def wellformed(p: CoreProgram) -> list[IRError]:
    """Return every violation found in ``p`` (empty list means ok)."""
    errs: list[IRError] = []
    arity: dict[str, int] = {}
    for pr in p.predicates:
        if pr.name in arity:
            errs.append(IRError(f"duplicate predicate {pr.name}"))
        arity[pr.name] = len(pr.params)
    names = set()
    for m in p.methods:
        if m.name in names:
            errs.append(IRError("duplicate method name", m.name))
        names.add(m.name)
        errs += _check_method(m, arity)
    return errs


def _check_method(m: CoreMethod, arity: dict[str, int]) -> list[IRError]:
    errs: list[IRError] = []
    declared = {n for n, _ in m.params} | {n for n, _ in m.locals}
    if len(declared) != len(m.params) + len(m.locals):
        errs.append(IRError("duplicate variable declaration", m.name))
    seen_labels: set[str] = set()

    def expr_errors(e: CExpr, idx: int, visible: frozenset[str]):
        bound: set[str] = set()

        def go(x: CExpr, bound: frozenset[str]):
            if isinstance(x, (Acc, Perm)):
                if x.pred not in arity:
                    errs.append(IRError(f"unknown predicate {x.pred}", m.name, idx))
                elif arity[x.pred] != len(x.args):
                    errs.append(IRError(f"predicate {x.pred} expects {arity[x.pred]} argument(s), "
                                        f"got {len(x.args)}", m.name, idx))
            if isinstance(x, LabeledOld):
                if x.label == PLACEHOLDER_LABEL:
                    errs.append(IRError("placeholder label referenced", m.name, idx))
                elif x.label not in visible:
                    errs.append(IRError(f"unknown label {x.label}", m.name, idx))
            if isinstance(x, Var) and x.name not in declared and x.name not in bound:
                errs.append(IRError(f"undeclared variable {x.name}", m.name, idx))
            if isinstance(x, Forall):
                bound = bound | {n for n, _ in x.binders}
            for c in subexprs(x):
                go(c, bound)

        go(e, frozenset(bound))

    counter = [0]

    def block(stmts, visible: frozenset[str]) -> frozenset[str]:
        for s in stmts:
            idx = counter[0]
            counter[0] += 1
            for e in stmt_exprs(s):
                expr_errors(e, idx, visible)
            if isinstance(s, (Inhale, Exhale)):
                for msg in _positive_acc_ok(s.expr):
                    errs.append(IRError(msg, m.name, idx))
            elif isinstance(s, Assert):
                if _no_acc(s.expr, ""):
                    errs.append(IRError("resource in assert", m.name, idx))
            elif isinstance(s, Assume):
                if _no_acc(s.expr, ""):
                    errs.append(IRError("resource in assume", m.name, idx))
            elif isinstance(s, (Assign, If)):
                e = s.value if isinstance(s, Assign) else s.cond
                if _no_acc(e, ""):
                    errs.append(IRError("resource in program expression", m.name, idx))
            if isinstance(s, (Assign, Havoc)) and s.var not in declared:
                errs.append(IRError(f"undeclared variable {s.var}", m.name, idx))
            if isinstance(s, Label):
                if s.name in seen_labels:
                    errs.append(IRError(f"duplicate label {s.name}", m.name, idx))
                if s.name == PLACEHOLDER_LABEL:
                    errs.append(IRError("placeholder label emitted", m.name, idx))
                seen_labels.add(s.name)
                visible = visible | {s.name}
            elif isinstance(s, If):
                a = block(s.then, visible)
                b = block(s.else_, visible)
                visible = a & b
        return visible

    block(m.body, frozenset())
    return errs
