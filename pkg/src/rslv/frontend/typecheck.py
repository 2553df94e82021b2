"""Name resolution, typing and the well-formedness rules for specifications.

The checker annotates every expression with ``ty`` and resolves names and
calls into ``ref``.  Resource assertions get the dedicated type
``ASSERTION``: they may be combined with ``&&``, placed in either branch of a
conditional or on the right of ``==>``, and nowhere else.  That single typing
rule is what rejects resources under negation, disjunction, comparison and
quantifiers.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from rslv.errors import TypeCheckError, TypeCheckFailed
from rslv.frontend import ast as A
from rslv.types import (
    ASSERTION, BOOL, INT, UNIT, AssertionType, BoolType, IntType, MapType, ResType, SortType,
    StructType, TupleType, Type, is_boolish, is_int, same,
)

SPEC_PLACES = ("requires", "ensures", "invariant", "assert", "produce")
RESOURCE_PLACES = ("requires", "ensures", "produce")


@dataclass
class Binding:
    type: Type
    kind: str          # "param", "local", "bound", "result"
    mode: str = "value"  # for params: value/shared/mut; for locals: value/mut


@dataclass
class Ctx:
    place: str                      # requires/ensures/invariant/assert/produce/program/pure
    in_old: bool = False
    in_forall: bool = False
    result: Type | None = None


@dataclass
class Scope:
    frames: list[dict[str, Binding]] = field(default_factory=lambda: [{}])

    def lookup(self, name: str) -> Binding | None:
        for f in reversed(self.frames):
            if name in f:
                return f[name]
        return None

    def bind(self, name: str, b: Binding):
        self.frames[-1][name] = b

    def push(self):
        self.frames.append({})

    def pop(self):
        self.frames.pop()


def typecheck(prog: A.SourceProgram) -> A.SourceProgram:
    """Annotate ``prog`` in place and return it; raise :class:`TypeCheckFailed` on any error."""
    errors = check(prog)
    if errors:
        raise TypeCheckFailed(errors)
    return prog


def check(prog: A.SourceProgram) -> list[TypeCheckError]:
    return Checker(prog).run()


class Checker:
    def __init__(self, prog: A.SourceProgram):
        self.prog = prog
        self.errors: list[TypeCheckError] = []
        self.sorts: dict[str, A.TypeDecl] = {}
        self.structs: dict[str, A.StructDecl] = {}
        self.kinds: dict[str, A.ResourceKindDecl] = {}
        self.fns: dict[str, A.FunctionDecl] = {}
        self.current_fn: A.FunctionDecl | None = None
        self.locals_seen: set[str] = set()

    def err(self, msg: str, node: A.Node | None):
        self.errors.append(TypeCheckError(msg, node.span if node is not None else None))

    # ------------------------------------------------------------ declarations

    def run(self) -> list[TypeCheckError]:
        types_ns: dict[str, A.Node] = {}
        for d in self.prog.items:
            if isinstance(d, (A.TypeDecl, A.StructDecl, A.ResourceKindDecl)):
                if d.name in types_ns or d.name in ("Int", "u32", "bool", "Map"):
                    self.err(f"duplicate type name {d.name!r}", d)
                    continue
                types_ns[d.name] = d
                {A.TypeDecl: self.sorts, A.StructDecl: self.structs,
                 A.ResourceKindDecl: self.kinds}[type(d)][d.name] = d
        for d in self.prog.items:
            if isinstance(d, A.ImplBlock) and d.name not in self.structs:
                self.err(f"impl for unknown struct {d.name!r}", d)
        for f in self.prog.functions:
            q = f.qualname
            if q in self.fns or (f.owner is None and f.name in self.kinds):
                self.err(f"duplicate function name {q!r}", f)
                continue
            self.fns[q] = f
        seen_macros = set()
        for m in self.prog.macros:
            if m.name in seen_macros:
                self.err(f"duplicate macro name {m.name!r}", m)
            seen_macros.add(m.name)

        for s in self.structs.values():
            names = set()
            resolved = []
            for fname, ft in s.fields:
                if fname in names:
                    self.err(f"duplicate field {fname!r} in struct {s.name}", s)
                names.add(fname)
                resolved.append((fname, self.resolve_type(ft, s)))
            s.fields = resolved
        self._check_struct_cycles()
        for k in self.kinds.values():
            k.param_types = [self.resolve_type(t, k) for t in k.param_types]
            for t in k.param_types:
                if not self.is_plain_value(t):
                    self.err(f"resource kind {k.name} parameter type {t} is not a plain value type", k)
        for f in self.fns.values():
            self.signature(f)
        for s in self.structs.values():
            for inv in s.coupling_invariants:
                scope = Scope()
                scope.bind("self", Binding(StructType(s.name), "param", "mut"))
                t = self.expr(inv, scope, Ctx("invariant"))
                self.expect_bool(t, inv, "coupling invariant", allow_assertion=False)
        self._check_pure_dag()
        for f in self.fns.values():
            self.function(f)
        return self.errors

    def resolve_type(self, t: Type, node: A.Node) -> Type:
        if isinstance(t, SortType):
            if t.name in self.structs:
                return StructType(t.name)
            if t.name in self.sorts:
                return t
            if t.name in self.kinds:
                self.err(f"resource kind {t.name} cannot be used as a value type", node)
                return t
            self.err(f"unknown type {t.name!r}", node)
            return t
        if isinstance(t, TupleType):
            return TupleType(tuple(self.resolve_type(e, node) for e in t.elems))
        if isinstance(t, MapType):
            key = self.resolve_type(t.key, node)
            if not self.is_plain_value(key):
                self.err(f"map key type {key} is not a plain value type", node)
            return MapType(key)
        return t

    def is_plain_value(self, t: Type, seen=()) -> bool:
        """Integers, booleans, sorts, and tuples/structs of those (no maps)."""
        if isinstance(t, (IntType, BoolType, SortType)):
            return True
        if isinstance(t, TupleType):
            return all(self.is_plain_value(e, seen) for e in t.elems)
        if isinstance(t, StructType):
            s = self.structs.get(t.name)
            if s is None or t.name in seen:
                return False
            return all(self.is_plain_value(ft, seen + (t.name,)) for _, ft in s.fields)
        return False

    def _check_struct_cycles(self):
        def deps(t):
            if isinstance(t, StructType):
                yield t.name
            elif isinstance(t, TupleType):
                for e in t.elems:
                    yield from deps(e)
            elif isinstance(t, MapType):
                yield from deps(t.key)

        state: dict[str, int] = {}

        def visit(name):
            if state.get(name) == 1:
                self.err(f"struct {name} contains itself", self.structs[name])
                return
            if state.get(name) == 2 or name not in self.structs:
                return
            state[name] = 1
            for _, ft in self.structs[name].fields:
                for d in deps(ft):
                    visit(d)
            state[name] = 2

        for n in list(self.structs):
            visit(n)

    def signature(self, f: A.FunctionDecl):
        seen = set()
        for p in f.params:
            if p.name in seen:
                self.err(f"duplicate parameter {p.name!r}", p)
            seen.add(p.name)
            p.type = self.resolve_type(p.type, p)
            if p.mode != "value" and not isinstance(p.type, StructType):
                self.err(f"reference parameter {p.name} must point to a struct, not {p.type}", p)
        if f.ret is not None:
            from rslv.types import RefType
            if isinstance(f.ret, RefType):
                self.err(f"function {f.qualname} returns a reference; reborrowing is not supported", f)
                f.ret = f.ret.inner
            f.ret = self.resolve_type(f.ret, f)
        if f.pure:
            if f.ret is None:
                self.err(f"pure function {f.qualname} must return a value", f)
            if f.requires or f.ensures:
                self.err(f"pure function {f.qualname} cannot have requires/ensures", f)
            for p in f.params:
                if p.mode == "mut":
                    self.err(f"pure function {f.qualname} cannot take a mutable reference", p)
            if f.body is not None and (len(f.body.stmts) != 1 or not isinstance(f.body.stmts[0], A.TailExpr)):
                self.err(f"pure function {f.qualname} body must be a single expression", f)

    def _check_pure_dag(self):
        graph: dict[str, set[str]] = {}
        for f in self.fns.values():
            if f.pure and f.body is not None:
                callees = set()
                for n in A.walk(f.body):
                    if isinstance(n, A.Call) and n.func in self.fns:
                        callees.add(n.func)
                    elif isinstance(n, A.MethodCall):
                        callees.add(n.method)  # coarse: resolved precisely later
                graph[f.qualname] = callees
        # methods are looked up by bare name here; map names to qualified candidates
        by_bare: dict[str, list[str]] = {}
        for q in graph:
            by_bare.setdefault(q.split("::")[-1], []).append(q)
        state: dict[str, int] = {}

        def visit(q, stack):
            if state.get(q) == 1:
                self.err(f"pure function {q} is recursive", self.fns[q])
                return
            if state.get(q) == 2:
                return
            state[q] = 1
            for c in graph.get(q, ()):
                for cq in ([c] if c in graph else by_bare.get(c, [])):
                    visit(cq, stack + [q])
            state[q] = 2

        for q in graph:
            visit(q, [])

    # ------------------------------------------------------------ functions

    def function(self, f: A.FunctionDecl):
        self.current_fn = f
        self.locals_seen = {p.name for p in f.params}
        scope = Scope()
        for p in f.params:
            scope.bind(p.name, Binding(p.type, "param", p.mode))
        if f.pure:
            if f.body is not None:
                tail = f.body.stmts[0] if f.body.stmts else None
                if isinstance(tail, A.TailExpr):
                    t = self.expr(tail.expr, scope, Ctx("pure"))
                    if f.ret is not None and not same(t, f.ret):
                        self.err(f"pure function {f.qualname} returns {t}, declared {f.ret}", tail)
            return
        for r in f.requires:
            t = self.expr(r, scope, Ctx("requires"))
            self.expect_bool(t, r, "precondition")
        for e in f.ensures:
            t = self.expr(e, scope, Ctx("ensures", result=f.ret))
            self.expect_bool(t, e, "postcondition")
        if f.body is not None:
            stmts = f.body.stmts
            for i, s in enumerate(stmts):
                if isinstance(s, A.TailExpr) and i != len(stmts) - 1:
                    self.err("trailing expression must be last", s)
            self.block(f.body, scope, top=True)
            has_tail = bool(stmts) and isinstance(stmts[-1], A.TailExpr)
            if f.ret is not None and not has_tail:
                self.err(f"function {f.qualname} must end with a result expression", f)
        self.current_fn = None

    def expect_bool(self, t: Type, node: A.Node, what: str, allow_assertion: bool = True):
        if isinstance(t, AssertionType) and not allow_assertion:
            self.err(f"resource assertions are not allowed in a {what}", node)
        elif not is_boolish(t):
            self.err(f"{what} must be boolean, found {t}", node)

    # ------------------------------------------------------------ statements

    def block(self, b: A.Block, scope: Scope, top: bool = False):
        scope.push()
        for s in b.stmts:
            self.stmt(s, scope, top)
        scope.pop()

    def stmt(self, s: A.Stmt, scope: Scope, top: bool):
        prog = Ctx("program")
        if isinstance(s, A.Let):
            if s.name in self.locals_seen or s.name in ("self", "result"):
                self.err(f"variable {s.name!r} is already declared in this function", s)
            self.locals_seen.add(s.name)
            if self.is_call(s.init, scope):
                t = self.call(s.init, scope)
                if t == UNIT:
                    self.err("called function does not return a value", s.init)
            else:
                t = self.expr(s.init, scope, prog)
            if s.type is not None:
                s.type = self.resolve_type(s.type, s)
                if not same(s.type, t):
                    self.err(f"let {s.name}: declared {s.type}, initialiser has type {t}", s)
                t = s.type
            scope.bind(s.name, Binding(t, "local", "mut" if s.mutable else "value"))
        elif isinstance(s, A.Assign):
            tt = self.place(s.target, scope, prog, "assign to")
            vt = self.expr(s.value, scope, prog)
            if tt is not None and not same(tt, vt):
                self.err(f"cannot assign {vt} to {tt}", s)
        elif isinstance(s, A.ExprStmt):
            e = s.expr
            if isinstance(e, A.MethodCall) and e.method == "set":
                rt = self.place(e.recv, scope, prog, "update")
                if not isinstance(rt, MapType):
                    if rt is not None:
                        self.err(f".set(..) needs a map, found {rt}", e)
                    return
                if len(e.args) != 2:
                    self.err("map .set takes 2 arguments", e)
                    return
                kt = self.expr(e.args[0], scope, prog)
                vt = self.expr(e.args[1], scope, prog)
                if not same(kt, rt.key):
                    self.err(f"map key must be {rt.key}, found {kt}", e.args[0])
                if not is_int(vt):
                    self.err(f"map values are integers, found {vt}", e.args[1])
                e.ref = ("map_set",)
                e.ty = UNIT
            elif self.is_call(e, scope):
                self.call(e, scope)
            else:
                self.expr(e, scope, prog)
                self.err("expression statement has no effect", s)
        elif isinstance(s, (A.Produce, A.Consume)):
            t = self.expr(s.expr, scope, Ctx("produce"))
            self.expect_bool(t, s.expr, "produce!/consume! argument")
        elif isinstance(s, A.AssertStmt):
            t = self.expr(s.expr, scope, Ctx("assert"))
            self.expect_bool(t, s.expr, "assertion", allow_assertion=False)
        elif isinstance(s, A.IfStmt):
            ct = self.expr(s.cond, scope, prog)
            if not isinstance(ct, BoolType):
                self.err(f"if condition must be bool, found {ct}", s.cond)
            self.block(s.then, scope)
            if s.else_ is not None:
                self.block(s.else_, scope)
        elif isinstance(s, A.Block):
            self.block(s, scope)
        elif isinstance(s, A.TailExpr):
            f = self.current_fn
            t = self.expr(s.expr, scope, prog)
            if not top or f is None or f.ret is None:
                self.err("unexpected trailing expression (missing ';'?)", s)
            elif not same(t, f.ret):
                self.err(f"function returns {f.ret}, found {t}", s)

    def place(self, e: A.Expr, scope: Scope, ctx: Ctx, verb: str) -> Type | None:
        root = e
        while isinstance(root, A.FieldAccess):
            root = root.obj
        if not isinstance(root, A.Name):
            self.err(f"cannot {verb} this expression", e)
            return None
        b = scope.lookup(root.id)
        t = self.expr(e, scope, ctx)
        if b is None:
            return None
        if b.mode != "mut":
            what = {"shared": "through a shared reference", "value": "an immutable variable"}.get(b.mode, "")
            self.err(f"cannot {verb} {root.id}: {what}".rstrip(": "), e)
        return t

    def is_call(self, e: A.Expr, scope: Scope) -> bool:
        if isinstance(e, A.Call):
            f = self.fns.get(e.func)
            return f is not None and not f.pure
        if isinstance(e, A.MethodCall):
            rt = self._peek_type(e.recv, scope)
            if isinstance(rt, StructType):
                f = self.fns.get(f"{rt.name}::{e.method}")
                return f is not None and not f.pure
        return False

    def _peek_type(self, e: A.Expr, scope: Scope) -> Type | None:
        # type of a receiver without reporting errors twice
        saved = list(self.errors)
        t = self.expr(e, scope, Ctx("program"))
        self.errors = saved
        return t

    def call(self, e: A.Expr, scope: Scope) -> Type:
        prog = Ctx("program")
        if isinstance(e, A.Call):
            f = self.fns[e.func]
            args = list(e.args)
        else:
            rt = self.expr(e.recv, scope, prog)
            f = self.fns[f"{rt.name}::{e.method}"]
            args = [e.recv] + list(e.args)
            if not f.is_method:
                self.err(f"{f.qualname} has no self parameter", e)
                args = list(e.args)
        e.ref = ("fn", f)
        if len(args) != len(f.params):
            self.err(f"{f.qualname} expects {len(f.params)} argument(s), got {len(args)}", e)
        mut_roots = []
        for p, a in zip(f.params, args):
            at = a.ty if a is getattr(e, "recv", None) else self.expr(a, scope, prog)
            if at is not None and not same(at, p.type):
                self.err(f"argument {p.name} of {f.qualname}: expected {p.type}, found {at}", a)
            if p.mode == "mut":
                if not isinstance(a, A.Name):
                    self.err(f"argument {p.name} of {f.qualname} must be a variable (mutable borrow)", a)
                    continue
                b = scope.lookup(a.id)
                if b is not None and b.mode != "mut":
                    self.err(f"cannot pass {a.id} as a mutable reference: it is not mutable", a)
                if a.id in mut_roots:
                    self.err(f"{a.id} is mutably borrowed twice in one call", a)
                mut_roots.append(a.id)
        for p, a in zip(f.params, args):
            if p.mode != "mut" and mut_roots:
                for n in A.walk(a):
                    if isinstance(n, A.Name) and n.id in mut_roots:
                        self.err(f"{n.id} is borrowed mutably and used by another argument", a)
                        break
        e.ty = f.ret if f.ret is not None else UNIT
        return e.ty

    # ------------------------------------------------------------ expressions

    def expr(self, e: A.Expr, scope: Scope, ctx: Ctx) -> Type:
        t = self._expr(e, scope, ctx)
        e.ty = t
        return t

    def _expr(self, e: A.Expr, scope: Scope, ctx: Ctx) -> Type:
        spec = ctx.place in SPEC_PLACES
        if isinstance(e, A.IntLit):
            return INT
        if isinstance(e, A.BoolLit):
            return BOOL
        if isinstance(e, A.Name):
            if e.id == "result":
                if ctx.place != "ensures" or ctx.result is None:
                    self.err("'result' is only available in postconditions of functions returning a value", e)
                    return INT
                if ctx.in_old:
                    self.err("'result' cannot appear under old(..)", e)
                e.ref = "result"
                return ctx.result
            b = scope.lookup(e.id)
            if b is None:
                self.err(f"unknown identifier {e.id!r}", e)
                return INT
            if ctx.in_old and b.kind == "local":
                self.err(f"local variable {e.id!r} has no value in the old state", e)
            e.ref = b.kind
            return b.type
        if isinstance(e, A.FieldAccess):
            ot = self.expr(e.obj, scope, ctx)
            if isinstance(ot, StructType) and ot.name in self.structs:
                for fname, ft in self.structs[ot.name].fields:
                    if fname == e.field:
                        return ft
                self.err(f"struct {ot.name} has no field {e.field!r}", e)
                return INT
            if isinstance(ot, TupleType) and e.field.isdigit():
                i = int(e.field)
                if i < len(ot.elems):
                    return ot.elems[i]
                self.err(f"tuple index {i} out of range", e)
                return INT
            self.err(f"{ot} has no field {e.field!r}", e)
            return INT
        if isinstance(e, A.Call):
            if e.func in self.kinds:
                self.err(f"resource type {e.func}(..) can only appear inside holds(..) or resource(..)", e)
                self.rtype(e, scope, ctx)
                return INT
            f = self.fns.get(e.func)
            if f is None:
                self.err(f"unknown function {e.func!r}", e)
                for a in e.args:
                    self.expr(a, scope, ctx)
                return INT
            if not f.pure:
                self.err(f"call to non-pure function {f.qualname} is only allowed as a statement", e)
                return f.ret or UNIT
            self.args(f, e.args, e, scope, ctx)
            e.ref = ("pure", f)
            return f.ret
        if isinstance(e, A.MethodCall):
            rt = self.expr(e.recv, scope, ctx)
            if isinstance(rt, MapType):
                if e.method == "get" and len(e.args) == 1:
                    kt = self.expr(e.args[0], scope, ctx)
                    if not same(kt, rt.key):
                        self.err(f"map key must be {rt.key}, found {kt}", e.args[0])
                    e.ref = ("map_get",)
                    return INT
                self.err(f"maps support .get(k) in expressions and .set(k, v) as a statement", e)
                return INT
            if isinstance(rt, StructType):
                f = self.fns.get(f"{rt.name}::{e.method}")
                if f is None:
                    self.err(f"struct {rt.name} has no method {e.method!r}", e)
                    return INT
                if not f.pure:
                    self.err(f"call to non-pure function {f.qualname} is only allowed as a statement", e)
                    return f.ret or UNIT
                if not f.is_method:
                    self.err(f"{f.qualname} has no self parameter", e)
                    return f.ret
                self.args(f, e.args, e, scope, ctx, skip_self=True)
                e.ref = ("pure", f)
                return f.ret
            self.err(f"{rt} has no method {e.method!r}", e)
            return INT
        if isinstance(e, A.Unary):
            t = self.expr(e.operand, scope, ctx)
            if e.op == "!":
                if isinstance(t, AssertionType):
                    self.err("resource assertion under negation", e)
                elif not isinstance(t, BoolType):
                    self.err(f"'!' needs bool, found {t}", e)
                return BOOL
            if not is_int(t):
                self.err(f"unary '-' needs an integer, found {t}", e)
            return INT
        if isinstance(e, A.Binary):
            return self.binary(e, scope, ctx)
        if isinstance(e, A.IfExpr):
            ct = self.expr(e.cond, scope, ctx)
            if isinstance(ct, AssertionType):
                self.err("resource assertion in a condition", e.cond)
            elif not isinstance(ct, BoolType):
                self.err(f"condition must be bool, found {ct}", e.cond)
            a = self.expr(e.then, scope, ctx)
            b = self.expr(e.else_, scope, ctx)
            if is_boolish(a) and is_boolish(b):
                return ASSERTION if ASSERTION in (a, b) else BOOL
            if not same(a, b):
                self.err(f"branches have different types {a} and {b}", e)
            return a
        if isinstance(e, A.Forall):
            if not spec:
                self.err("quantifiers are only allowed in specifications", e)
            scope.push()
            for bnd in e.binders:
                bnd.type = self.resolve_type(bnd.type, bnd)
                if not self.is_plain_value(bnd.type):
                    self.err(f"cannot quantify over {bnd.type}", bnd)
                if scope.lookup(bnd.name) is not None:
                    self.err(f"quantified variable {bnd.name!r} shadows another variable", bnd)
                scope.bind(bnd.name, Binding(bnd.type, "bound"))
            inner = Ctx(ctx.place, ctx.in_old, True, ctx.result)
            t = self.expr(e.body, scope, inner)
            scope.pop()
            if isinstance(t, AssertionType):
                self.err("resource under quantifier", e)
            elif not isinstance(t, BoolType):
                self.err(f"quantifier body must be bool, found {t}", e)
            return BOOL
        if isinstance(e, A.Old):
            if ctx.place == "requires":
                self.err("old not allowed in precondition", e)
            elif not spec:
                self.err("old(..) is only allowed in specifications", e)
            if ctx.in_old:
                self.err("nested old(..) is not allowed", e)
            inner = Ctx(ctx.place, True, ctx.in_forall, ctx.result)
            t = self.expr(e.expr, scope, inner)
            if isinstance(t, AssertionType):
                self.err("resource assertion inside old(..)", e)
            return t
        if isinstance(e, A.Holds):
            if not spec:
                where = "pure function bodies" if ctx.place == "pure" else "program expressions"
                self.err(f"holds(..) is not allowed in {where}", e)
            self.rtype(e.rtype, scope, ctx)
            return INT
        if isinstance(e, A.Resource):
            if ctx.place not in RESOURCE_PLACES:
                where = {"pure": "pure function bodies", "invariant": "coupling invariants",
                         "assert": "assertions"}.get(ctx.place, "program expressions")
                self.err(f"resource(..) is not allowed in {where}", e)
            self.rtype(e.rtype, scope, ctx)
            at = self.expr(e.amount, scope, ctx)
            if not is_int(at):
                self.err(f"resource amount must be an integer, found {at}", e.amount)
            return ASSERTION
        if isinstance(e, A.StructLit):
            s = self.structs.get(e.name)
            if s is None:
                self.err(f"unknown struct {e.name!r}", e)
                return INT
            given = {}
            for fname, fe in e.fields:
                if fname in given:
                    self.err(f"field {fname!r} given twice", fe)
                given[fname] = self.expr(fe, scope, ctx)
            for fname, ft in s.fields:
                if fname not in given:
                    self.err(f"missing field {fname!r} in {e.name} literal", e)
                elif not same(given[fname], ft):
                    self.err(f"field {fname}: expected {ft}, found {given[fname]}", e)
            for fname in given:
                if fname not in dict(s.fields):
                    self.err(f"struct {e.name} has no field {fname!r}", e)
            return StructType(e.name)
        if isinstance(e, A.TupleLit):
            return TupleType(tuple(self.expr(x, scope, ctx) for x in e.elems))
        self.err(f"unexpected {type(e).__name__}", e)
        return INT

    def binary(self, e: A.Binary, scope: Scope, ctx: Ctx) -> Type:
        a = self.expr(e.left, scope, ctx)
        b = self.expr(e.right, scope, ctx)
        op = e.op
        if op == "&&":
            for t, n in ((a, e.left), (b, e.right)):
                if not is_boolish(t):
                    self.err(f"'&&' needs bool operands, found {t}", n)
            return ASSERTION if ASSERTION in (a, b) else BOOL
        if op == "||":
            for t, n in ((a, e.left), (b, e.right)):
                if isinstance(t, AssertionType):
                    self.err("resource assertion in a disjunction", n)
                elif not isinstance(t, BoolType):
                    self.err(f"'||' needs bool operands, found {t}", n)
            return BOOL
        if op == "==>":
            if isinstance(a, AssertionType):
                self.err("resource assertion on the left of '==>'", e.left)
            elif not isinstance(a, BoolType):
                self.err(f"'==>' needs bool operands, found {a}", e.left)
            if not is_boolish(b):
                self.err(f"'==>' needs bool operands, found {b}", e.right)
            return ASSERTION if isinstance(b, AssertionType) else BOOL
        if op in ("==", "!="):
            for t, n in ((a, e.left), (b, e.right)):
                if isinstance(t, AssertionType):
                    self.err("resource assertion in a comparison", n)
            if not same(a, b):
                self.err(f"cannot compare {a} with {b}", e)
            return BOOL
        if op in ("<", "<=", ">", ">="):
            if not (is_int(a) and is_int(b)):
                self.err(f"'{op}' needs integers, found {a} and {b}", e)
            return BOOL
        if op in ("+", "-", "*", "/", "%"):
            if not (is_int(a) and is_int(b)):
                self.err(f"'{op}' needs integers, found {a} and {b}", e)
            return INT
        self.err(f"unknown operator {op}", e)
        return INT

    def rtype(self, e: A.Expr, scope: Scope, ctx: Ctx):
        if not (isinstance(e, A.Call) and e.func in self.kinds):
            self.err("expected a resource type such as Money(a)", e)
            self.expr(e, scope, ctx)
            return
        k = self.kinds[e.func]
        if len(e.args) != len(k.param_types):
            self.err(f"resource kind {k.name} expects {len(k.param_types)} argument(s), got {len(e.args)}", e)
        for a, pt in zip(e.args, k.param_types):
            at = self.expr(a, scope, ctx)
            if isinstance(at, AssertionType) or not same(at, pt):
                self.err(f"argument of {k.name}: expected {pt}, found {at}", a)
        for a in e.args[len(k.param_types):]:
            self.expr(a, scope, ctx)
        e.ref = ("kind", k)
        e.ty = ResType(k.name)

    def args(self, f: A.FunctionDecl, args, node, scope, ctx, skip_self: bool = False):
        params = f.params[1:] if skip_self else f.params
        if len(args) != len(params):
            self.err(f"{f.qualname} expects {len(params)} argument(s), got {len(args)}", node)
        for a, p in zip(args, params):
            at = self.expr(a, scope, ctx)
            if not same(at, p.type):
                self.err(f"argument {p.name} of {f.qualname}: expected {p.type}, found {at}", a)
        for a in args[len(params):]:
            self.expr(a, scope, ctx)
