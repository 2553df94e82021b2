"""Translate a typed SourceProgram into the core IR.

Expressions are encoded under an :class:`EncodingContext` ``(current, old)``.
``current`` is ``NoLabel`` inside bodies, ``Minus(l)`` while resources are
being given away (method postcondition, callee precondition) and ``Plus(l)``
while they are being received (callee postcondition).  ``old`` names the state
that plain program expressions read from.  Only ``old(..)`` and ``holds(..)``
look at the context; everything else is translated homomorphically.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass

from rslv import core_ir as C
from rslv.frontend import ast as A
from rslv.types import IntType, StructType, TupleType, Type

PLACEHOLDER = C.PLACEHOLDER_LABEL


@dataclass(frozen=True)
class NoLabel:
    def __str__(self):
        return "eps"


@dataclass(frozen=True)
class Plus:
    label: str

    def __str__(self):
        return f"+{self.label}"


@dataclass(frozen=True)
class Minus:
    label: str

    def __str__(self):
        return f"-{self.label}"


@dataclass(frozen=True)
class OldAt:
    label: str

    def __str__(self):
        return f"old({self.label})"


@dataclass(frozen=True)
class CurAt:
    label: str

    def __str__(self):
        return f"cur({self.label})"


@dataclass(frozen=True)
class EncodingContext:
    current: NoLabel | Plus | Minus
    old_ctx: OldAt | CurAt

    def __str__(self):
        return f"({self.current}, {self.old_ctx})"


EPS = NoLabel()


# The six holds(r) cases, keyed by (current kind, old kind).  ``p`` is the
# already-built perm(R(..)) with R's arguments encoded in (eps, old).
def _holds_eps_cur(p, c, o):
    return p


def _holds_eps_old(p, c, o):
    return C.LabeledOld(o.label, p)


def _holds_plus_cur(p, c, o):
    return C.Binop("-", p, C.LabeledOld(c.label, p))


def _holds_plus_old(p, c, o):
    return C.Binop("-", C.LabeledOld(o.label, p), C.LabeledOld(c.label, p))


def _holds_minus_cur(p, c, o):
    return C.Binop("-", C.LabeledOld(c.label, p), p)


def _holds_minus_old(p, c, o):
    return C.LabeledOld(o.label, p)


HOLDS_RULES = {
    (NoLabel, CurAt): _holds_eps_cur,
    (NoLabel, OldAt): _holds_eps_old,
    (Plus, CurAt): _holds_plus_cur,
    (Plus, OldAt): _holds_plus_old,
    (Minus, CurAt): _holds_minus_cur,
    (Minus, OldAt): _holds_minus_old,
}


@dataclass
class Slot:
    """What a source name stands for during encoding."""
    expr: C.CExpr
    mutable: bool = False


class LabelSupply:
    def __init__(self):
        self.calls = 0
        self.temps = 0

    def call_labels(self) -> tuple[str, str]:
        self.calls += 1
        return f"l{self.calls}_pre", f"l{self.calls}_post"

    def temp(self) -> str:
        self.temps += 1
        return f"arg${self.temps}"


def encode_program(prog: A.SourceProgram, encoder=None) -> C.CoreProgram:
    return (encoder or Encoder)(prog).program()


def _tag(e: C.CExpr, origin, span) -> C.CExpr:
    return dataclasses.replace(e, origin=origin, span=span)


class Encoder:
    holds_rules = HOLDS_RULES

    def __init__(self, prog: A.SourceProgram):
        self.prog = prog
        self.structs = {s.name: s for s in prog.structs}
        self.fns = {f.qualname: f for f in prog.functions}
        self.inline_depth = 0
        self.renames = 0

    # ------------------------------------------------------------ program

    def program(self) -> C.CoreProgram:
        preds = [C.PredicateDecl(k.name, tuple((f"arg{i + 1}", t) for i, t in enumerate(k.param_types)))
                 for k in self.prog.resource_kinds]
        methods = [self.function(f) for f in self.prog.functions
                   if not f.pure and not f.trusted and f.body is not None]
        funcs = []
        for f in self.prog.functions:
            if f.pure and f.body is None:
                funcs.append(C.FunctionSig(f.qualname, tuple(p.type for p in f.params), f.ret))
        return C.CoreProgram(
            predicates=preds,
            methods=methods,
            sorts=[d.name for d in self.prog.type_decls],
            structs={s.name: list(s.fields) for s in self.prog.structs},
            functions=funcs,
        )

    def invariants_for(self, struct: str) -> list[A.Expr]:
        s = self.structs.get(struct)
        return list(s.coupling_invariants) if s else []

    def function(self, f: A.FunctionDecl) -> C.CoreMethod:
        self.labels = LabelSupply()
        self.locals: list[tuple[str, Type]] = []
        env: dict[str, Slot] = {}
        for p in f.params:
            env[p.name] = Slot(C.Var(p.name, p.type), p.mode == "mut")
        if f.ret is not None:
            self.locals.append(("result", f.ret))
            env["result"] = Slot(C.Var("result", f.ret), True)

        pre_ctx = EncodingContext(EPS, CurAt(PLACEHOLDER))
        pre_parts = [_tag(fact, ("typefact", None), p.span)
                     for p in f.params for fact in self.type_facts(env[p.name].expr, p.type)]
        pre_parts += [self.clause(r, pre_ctx, env, "pre") for r in f.requires]
        body: list[C.CStmt] = [C.Inhale(C.conj(pre_parts), span=f.span, origin=("method-pre", f.qualname)),
                               C.Label("pre")]
        self.env = env
        body += self.block(f.body.stmts)
        post_ctx = EncodingContext(Minus("post"), CurAt("pre"))
        post_parts = [self.clause(e, post_ctx, env, "post") for e in f.ensures]
        post_parts += self.coupling(f, post_ctx, env)
        body += [C.Label("post"),
                 C.Exhale(C.conj(post_parts), span=f.span, origin=("method-post", f.qualname))]
        params = [(p.name, p.type) for p in f.params]
        return C.CoreMethod(f.qualname, params, self.locals, body, span=f.span)

    def clause(self, e: A.Expr, ctx: EncodingContext, env, role: str) -> C.CExpr:
        return _tag(self.expr(e, ctx, env), ("clause", role), e.span)

    def coupling(self, f: A.FunctionDecl, ctx: EncodingContext, env) -> list[C.CExpr]:
        out = []
        for p in f.params:
            if p.mode == "mut" and isinstance(p.type, StructType):
                for inv in self.invariants_for(p.type.name):
                    inv_env = {"self": env[p.name]}
                    out.append(_tag(self.expr(inv, ctx, inv_env), ("clause", "invariant", p.type.name), inv.span))
        return out

    def type_facts(self, e: C.CExpr, t: Type) -> list[C.CExpr]:
        """``x >= 0`` for every u32 leaf reachable from ``e`` without crossing a map."""
        if isinstance(t, IntType) and t.unsigned:
            return [C.Binop(">=", e, C.IntConst(0))]
        if isinstance(t, StructType) and t.name in self.structs:
            out = []
            for name, ft in self.structs[t.name].fields:
                out += self.type_facts(C.Field(e, name), ft)
            return out
        if isinstance(t, TupleType):
            out = []
            for i, et in enumerate(t.elems):
                out += self.type_facts(C.Field(e, str(i)), et)
            return out
        return []

    # ------------------------------------------------------------ statements

    def block(self, stmts: list[A.Stmt]) -> list[C.CStmt]:
        out = []
        for s in stmts:
            out += self.stmt(s)
        return out

    def stmt(self, s: A.Stmt) -> list[C.CStmt]:
        env = self.env
        body_ctx = EncodingContext(EPS, CurAt("pre"))
        if isinstance(s, A.Let):
            t = s.type if s.type is not None else s.init.ty
            self.locals.append((s.name, t))
            env[s.name] = Slot(C.Var(s.name, t), s.mutable)
            if self.is_call(s.init):
                return self.call(s.init, s, target=s.name)
            return [C.Assign(s.name, (), self.expr(s.init, body_ctx, env), span=s.span)]
        if isinstance(s, A.Assign):
            root, path = self.place(s.target)
            return [C.Assign(root, path, self.expr(s.value, body_ctx, env), span=s.span)]
        if isinstance(s, A.ExprStmt):
            e = s.expr
            if isinstance(e, A.MethodCall) and e.ref == ("map_set",):
                root, path = self.place(e.recv)
                m = self.expr(e.recv, body_ctx, env)
                k = self.expr(e.args[0], body_ctx, env)
                v = self.expr(e.args[1], body_ctx, env)
                return [C.Assign(root, path, C.MapStore(m, k, v), span=s.span)]
            return self.call(e, s)
        if isinstance(s, A.Produce):
            return [C.Inhale(self.expr(s.expr, body_ctx, env), span=s.span, origin=("produce", None))]
        if isinstance(s, A.Consume):
            return [C.Exhale(self.expr(s.expr, body_ctx, env), span=s.span, origin=("consume", None))]
        if isinstance(s, A.AssertStmt):
            return [C.Assert(self.expr(s.expr, body_ctx, env), span=s.span, origin=("assert", None))]
        if isinstance(s, A.IfStmt):
            cond = self.expr(s.cond, body_ctx, env)
            then = tuple(self.block(s.then.stmts))
            else_ = tuple(self.block(s.else_.stmts)) if s.else_ is not None else ()
            return [C.If(cond, then, else_, span=s.span)]
        if isinstance(s, A.Block):
            return self.block(s.stmts)
        if isinstance(s, A.TailExpr):
            if self.is_call(s.expr):
                return self.call(s.expr, s, target="result")
            return [C.Assign("result", (), self.expr(s.expr, body_ctx, env), span=s.span)]
        raise TypeError(f"cannot encode {type(s).__name__}")

    def place(self, e: A.Expr) -> tuple[str, tuple[str, ...]]:
        path = []
        while isinstance(e, A.FieldAccess):
            path.append(e.field)
            e = e.obj
        return e.id, tuple(reversed(path))

    @staticmethod
    def is_call(e: A.Expr) -> bool:
        return isinstance(e, (A.Call, A.MethodCall)) and isinstance(e.ref, tuple) and e.ref[0] == "fn"

    def havoc_stmts(self, mut_vars: list[str], span) -> list[C.CStmt]:
        return [C.Havoc(v, span=span) for v in mut_vars]

    def call(self, e: A.Expr, s: A.Stmt, target: str | None = None) -> list[C.CStmt]:
        """Encode a call statement as exhale-pre / havoc / inhale-post between fresh labels."""
        f: A.FunctionDecl = e.ref[1]
        args = ([e.recv] if isinstance(e, A.MethodCall) and f.is_method else []) + list(e.args)
        body_ctx = EncodingContext(EPS, CurAt("pre"))
        out: list[C.CStmt] = []
        callee_env: dict[str, Slot] = {}
        mut_vars = []
        for p, a in zip(f.params, args):
            if p.mode == "mut":
                slot = self.env[a.id]
                callee_env[p.name] = Slot(slot.expr, True)
                mut_vars.append(a.id)
            elif isinstance(a, (A.IntLit, A.BoolLit)):
                callee_env[p.name] = Slot(self.expr(a, body_ctx, self.env), False)
            elif isinstance(a, A.Name):
                slot = self.env[a.id]
                callee_env[p.name] = Slot(slot.expr, slot.mutable)
            else:
                tmp = self.labels.temp()
                self.locals.append((tmp, p.type))
                out.append(C.Assign(tmp, (), self.expr(a, body_ctx, self.env), span=a.span))
                callee_env[p.name] = Slot(C.Var(tmp, p.type), False)
        l_pre, l_post = self.labels.call_labels()
        origin = f.qualname

        pre_ctx = EncodingContext(Minus(l_pre), CurAt(PLACEHOLDER))
        pre_parts = [_tag(fact, ("typefact", None), a.span)
                     for p, a in zip(f.params, args) if p.mode != "mut"
                     for fact in self.type_facts(callee_env[p.name].expr, p.type)]
        pre_parts += [self.clause(r, pre_ctx, callee_env, "pre") for r in f.requires]
        out += [C.Label(l_pre),
                C.Exhale(C.conj(pre_parts), span=e.span, origin=("call-pre", origin))]

        havocked = list(mut_vars)
        if target is not None:
            callee_env["result"] = Slot(C.Var(target, f.ret), False)
            havocked.append(target)
        out += self.havoc_stmts(mut_vars, e.span)
        if target is not None:
            out.append(C.Havoc(target, span=e.span))

        post_ctx = EncodingContext(Plus(l_post), CurAt(l_pre))
        post_parts = []
        for v in havocked:
            slot = self.env[v]
            post_parts += [_tag(fact, ("typefact", None), e.span)
                           for fact in self.type_facts(slot.expr, slot.expr.type)]
        post_parts += [self.clause(q, post_ctx, callee_env, "post") for q in f.ensures]
        post_parts += self.coupling(f, post_ctx, callee_env)
        out += [C.Label(l_post),
                C.Inhale(C.conj(post_parts), span=e.span, origin=("call-post", origin))]
        return out

    # ------------------------------------------------------------ expressions

    def expr(self, e: A.Expr, ctx: EncodingContext, env: dict[str, Slot]) -> C.CExpr:
        out = self._expr(e, ctx, env)
        if out.span is None and e.span is not None:
            out = dataclasses.replace(out, span=e.span)
        return out

    def _expr(self, e: A.Expr, ctx: EncodingContext, env: dict[str, Slot]) -> C.CExpr:
        if isinstance(e, A.IntLit):
            return C.IntConst(e.value)
        if isinstance(e, A.BoolLit):
            return C.BoolConst(e.value)
        if isinstance(e, A.Name):
            slot = env[e.id]
            if slot.mutable and isinstance(ctx.old_ctx, OldAt):
                return C.LabeledOld(ctx.old_ctx.label, slot.expr)
            return slot.expr
        if isinstance(e, A.FieldAccess):
            return C.Field(self.expr(e.obj, ctx, env), e.field)
        if isinstance(e, A.Call):
            kind, f = e.ref
            args = [self.expr(a, ctx, env) for a in e.args]
            return self.pure_call(f, args)
        if isinstance(e, A.MethodCall):
            if e.ref == ("map_get",):
                return C.MapSelect(self.expr(e.recv, ctx, env), self.expr(e.args[0], ctx, env))
            kind, f = e.ref
            args = [self.expr(a, ctx, env) for a in [e.recv] + list(e.args)]
            return self.pure_call(f, args)
        if isinstance(e, A.Unary):
            return C.Unop(e.op, self.expr(e.operand, ctx, env))
        if isinstance(e, A.Binary):
            return C.Binop(e.op, self.expr(e.left, ctx, env), self.expr(e.right, ctx, env))
        if isinstance(e, A.IfExpr):
            return C.Cond(self.expr(e.cond, ctx, env), self.expr(e.then, ctx, env),
                          self.expr(e.else_, ctx, env))
        if isinstance(e, A.Forall):
            inner = dict(env)
            binders = []
            for b in e.binders:
                name = b.name
                if self.inline_depth:
                    self.renames += 1
                    name = f"{b.name}${self.renames}"
                binders.append((name, b.type))
                inner[b.name] = Slot(C.Var(name, b.type), False)
            return C.Forall(tuple(binders), self.expr(e.body, ctx, inner))
        if isinstance(e, A.Old):
            assert isinstance(ctx.old_ctx, CurAt), "nested old survived type checking"
            return self.expr(e.expr, EncodingContext(ctx.current, OldAt(ctx.old_ctx.label)), env)
        if isinstance(e, A.Holds):
            pred, args = self.rtype(e.rtype, EncodingContext(EPS, ctx.old_ctx), env)
            rule = self.holds_rules[(type(ctx.current), type(ctx.old_ctx))]
            return rule(C.Perm(pred, args), ctx.current, ctx.old_ctx)
        if isinstance(e, A.Resource):
            pred, args = self.rtype(e.rtype, ctx, env)
            return C.Acc(pred, args, self.expr(e.amount, ctx, env))
        if isinstance(e, A.StructLit):
            order = [n for n, _ in self.structs[e.name].fields]
            given = dict(e.fields)
            return C.StructCons(e.name, tuple((n, self.expr(given[n], ctx, env)) for n in order))
        if isinstance(e, A.TupleLit):
            return C.TupleCons(tuple(self.expr(x, ctx, env) for x in e.elems))
        raise TypeError(f"cannot encode {type(e).__name__}")

    def rtype(self, r: A.Call, ctx: EncodingContext, env) -> tuple[str, tuple[C.CExpr, ...]]:
        return r.func, tuple(self.expr(a, ctx, env) for a in r.args)

    def pure_call(self, f: A.FunctionDecl, args: list[C.CExpr]) -> C.CExpr:
        if f.body is None:
            return C.FuncApp(f.qualname, tuple(args))
        body = f.body.stmts[0].expr
        env = {p.name: Slot(a, False) for p, a in zip(f.params, args)}
        self.inline_depth += 1
        try:
            return self.expr(body, EncodingContext(EPS, CurAt(PLACEHOLDER)), env)
        finally:
            self.inline_depth -= 1


def encode_expr(e: A.Expr, ctx: EncodingContext, env: dict[str, C.CExpr] | None = None,
                prog: A.SourceProgram | None = None, mutable: frozenset[str] = frozenset()) -> C.CExpr:
    """Encode a single typed expression; names resolve through ``env``."""
    enc = Encoder(prog or A.SourceProgram([]))
    slots = {k: Slot(v, k in mutable) for k, v in (env or {}).items()}
    return enc.expr(e, ctx, slots)
