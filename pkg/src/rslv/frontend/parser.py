"""Recursive-descent parser producing a :class:`SourceProgram`.

Expressions use precedence climbing; ``macro_rules!`` definitions are
expanded at their use sites while parsing, so later stages never see a macro
invocation.
"""

from __future__ import annotations

import copy

from rslv.errors import ParseError, Span
from rslv.frontend import ast as A
from rslv.frontend.lexer import Token, tokenize
from rslv.types import BOOL, INT, U32, MapType, RefType, SortType, StructType, TupleType, Type

SPEC_ATTRS = {"requires", "ensures", "invariant_twostate", "invariant"}
FLAG_ATTRS = {"resource_kind", "pure", "trusted"}
STMT_MACROS = {"produce": A.Produce, "consume": A.Consume, "assert": A.AssertStmt}
COMPARISONS = {"==", "!=", "<", "<=", ">", ">="}


def parse(source: str | list[Token], filename: str = "<input>") -> A.SourceProgram:
    """Parse RSL text (or a token list from :func:`tokenize`)."""
    if isinstance(source, str):
        text = source
        tokens = tokenize(source, filename)
    else:
        text = ""
        tokens = list(source)
    return Parser(tokens, filename).program(text)


def parse_expr(text: str, filename: str = "<expr>") -> A.Expr:
    p = Parser(tokenize(text, filename), filename)
    e = p.expr()
    p.expect_eof()
    return e


class Parser:
    def __init__(self, tokens: list[Token], filename: str = "<input>"):
        last = tokens[-1].span if tokens else Span(1, 1, 1, 1, filename)
        eof_span = Span(last.end_line, last.end_col, last.end_line, last.end_col, filename)
        self.toks = tokens + [Token("eof", "", eof_span)]
        self.pos = 0
        self.filename = filename
        self.macros: dict[str, A.MacroDecl] = {}

    # ------------------------------------------------------------ token helpers

    @property
    def tok(self) -> Token:
        return self.toks[self.pos]

    def peek(self, k: int = 1) -> Token:
        return self.toks[min(self.pos + k, len(self.toks) - 1)]

    def advance(self) -> Token:
        t = self.tok
        if t.kind != "eof":
            self.pos += 1
        return t

    def at(self, text: str) -> bool:
        return self.tok.is_(text)

    def accept(self, text: str) -> Token | None:
        if self.at(text):
            return self.advance()
        return None

    def error(self, expected: set[str] | frozenset[str], tok: Token | None = None) -> ParseError:
        tok = tok or self.tok
        found = "end of input" if tok.kind == "eof" else repr(tok.text)
        exp = ", ".join(sorted(repr(e) for e in expected))
        return ParseError(f"expected {exp}, found {found}", tok.span, frozenset(expected))

    def expect(self, text: str) -> Token:
        if not self.at(text):
            raise self.error({text})
        return self.advance()

    def ident(self) -> Token:
        if self.tok.kind != "ident":
            raise self.error({"identifier"})
        return self.advance()

    def expect_eof(self):
        if self.tok.kind != "eof":
            raise self.error({"end of input"})

    def span_from(self, start: Span) -> Span:
        prev = self.toks[self.pos - 1].span if self.pos > 0 else start
        return start.merge(prev)

    # ------------------------------------------------------------ items

    def program(self, text: str = "") -> A.SourceProgram:
        items: list[A.Node] = []
        while self.tok.kind != "eof":
            item = self.item()
            if item is not None:
                items.append(item)
        return A.SourceProgram(items, self.filename, text)

    def attributes(self) -> list[tuple[str, A.Expr | None, Span]]:
        attrs = []
        while self.at("#["):
            start = self.advance().span
            name = self.ident()
            arg = None
            if name.text in SPEC_ATTRS:
                self.expect("(")
                arg = self.expr()
                self.expect(")")
            elif name.text not in FLAG_ATTRS:
                raise ParseError(f"unknown attribute {name.text!r}", name.span,
                                 frozenset(SPEC_ATTRS | FLAG_ATTRS))
            self.expect("]")
            attrs.append((name.text, arg, self.span_from(start)))
        return attrs

    def item(self) -> A.Node | None:
        attrs = self.attributes()
        start = self.tok.span
        if self.at("type"):
            if attrs:
                raise ParseError("attributes are not allowed on type declarations", attrs[0][2])
            self.advance()
            name = self.ident().text
            self.expect(";")
            return A.TypeDecl(name, span=self.span_from(start))
        if self.at("struct"):
            return self.struct(attrs, start)
        if self.at("impl"):
            if attrs:
                raise ParseError("attributes are not allowed on impl blocks", attrs[0][2])
            self.advance()
            name = self.ident().text
            self.expect("{")
            fns = []
            while not self.at("}"):
                fattrs = self.attributes()
                fns.append(self.function(fattrs, owner=name))
            self.expect("}")
            return A.ImplBlock(name, fns, span=self.span_from(start))
        if self.at("fn"):
            return self.function(attrs, owner=None)
        if self.tok.kind == "ident" and self.tok.text == "macro_rules":
            if attrs:
                raise ParseError("attributes are not allowed on macros", attrs[0][2])
            return self.macro_def()
        raise self.error({"type", "struct", "impl", "fn", "macro_rules", "#["})

    def struct(self, attrs, start: Span) -> A.Node:
        self.expect("struct")
        name = self.ident().text
        flags = {a[0] for a in attrs}
        invariants = []
        for aname, arg, aspan in attrs:
            if aname in ("invariant_twostate", "invariant"):
                invariants.append(arg)
            elif aname != "resource_kind":
                raise ParseError(f"attribute {aname!r} is not valid on a struct", aspan)
        if self.accept("("):
            types = []
            while not self.at(")"):
                types.append(self.type())
                if not self.accept(","):
                    break
            self.expect(")")
            self.expect(";")
            if "resource_kind" not in flags:
                raise ParseError("tuple structs are only supported as #[resource_kind] declarations",
                                 self.span_from(start))
            if invariants:
                raise ParseError("resource kinds cannot carry invariants", self.span_from(start))
            return A.ResourceKindDecl(name, types, span=self.span_from(start))
        if "resource_kind" in flags:
            raise ParseError("a #[resource_kind] must be declared as a tuple struct, e.g. struct Money(AcctId);",
                             self.tok.span)
        self.expect("{")
        fields = []
        while not self.at("}"):
            fname = self.ident().text
            self.expect(":")
            fields.append((fname, self.type()))
            if not self.accept(","):
                break
        self.expect("}")
        self.accept(";")
        return A.StructDecl(name, fields, invariants, span=self.span_from(start))

    def function(self, attrs, owner: str | None) -> A.FunctionDecl:
        start = self.tok.span
        self.expect("fn")
        name = self.ident().text
        self.expect("(")
        params = []
        while not self.at(")"):
            params.append(self.param(owner))
            if not self.accept(","):
                break
        self.expect(")")
        ret = None
        if self.accept("->"):
            ret = self.type(allow_ref=True)
        requires, ensures = [], []
        pure = trusted = False
        for aname, arg, aspan in attrs:
            if aname == "requires":
                requires.append(arg)
            elif aname == "ensures":
                ensures.append(arg)
            elif aname == "pure":
                pure = True
            elif aname == "trusted":
                trusted = True
            else:
                raise ParseError(f"attribute {aname!r} is not valid on a function", aspan)
        body = None
        if self.accept(";") is None:
            body = self.block()
        return A.FunctionDecl(name, owner, params, ret, requires, ensures, body,
                              pure=pure, trusted=trusted, span=self.span_from(start))

    def param(self, owner: str | None) -> A.Param:
        start = self.tok.span
        # &self, &mut self, self
        if self.at("&") and (self.peek().is_("self") or (self.peek().is_("mut") and self.peek(2).is_("self"))):
            self.advance()
            mutable = self.accept("mut") is not None
            self.expect("self")
            if owner is None:
                raise ParseError("'self' parameter outside of an impl block", start)
            return A.Param("self", StructType(owner), "mut" if mutable else "shared", span=self.span_from(start))
        if self.at("self"):
            self.advance()
            if owner is None:
                raise ParseError("'self' parameter outside of an impl block", start)
            return A.Param("self", StructType(owner), "value", span=self.span_from(start))
        name = self.ident().text
        self.expect(":")
        t = self.type(allow_ref=True)
        mode = "value"
        if isinstance(t, RefType):
            mode = "mut" if t.mutable else "shared"
            t = t.inner
        return A.Param(name, t, mode, span=self.span_from(start))

    def type(self, allow_ref: bool = False) -> Type:
        if self.at("&"):
            tok = self.advance()
            if not allow_ref:
                raise ParseError("reference types are only allowed on parameters and results", tok.span)
            mutable = self.accept("mut") is not None
            return RefType(mutable, self.type())
        if self.accept("("):
            elems = []
            while not self.at(")"):
                elems.append(self.type())
                if not self.accept(","):
                    break
            self.expect(")")
            return TupleType(tuple(elems))
        tok = self.ident()
        if tok.text == "Int":
            return INT
        if tok.text == "u32":
            return U32
        if tok.text == "bool":
            return BOOL
        if tok.text == "Map":
            self.expect("[")
            key = self.type()
            self.expect("]")
            val = self.ident()
            if val.text not in ("Int", "u32"):
                raise ParseError("maps only range over integers (Map[K]Int)", val.span)
            return MapType(key)
        # resolved to a struct or sort by the type checker
        return SortType(tok.text)

    def macro_def(self) -> A.MacroDecl:
        start = self.advance().span  # macro_rules
        self.expect("!")
        name = self.ident().text
        self.expect("{")
        self.expect("(")
        params = []
        while not self.at(")"):
            self.expect("$")
            params.append(self.ident().text)
            self.expect(":")
            frag = self.ident()
            if frag.text != "expr":
                raise ParseError("only $name:expr macro parameters are supported", frag.span)
            if not self.accept(","):
                break
        self.expect(")")
        self.expect("=>")
        self.expect("{")
        self._macro_params = set(params)
        try:
            body = self.expr()
        finally:
            self._macro_params = None
        self.expect("}")
        self.expect("}")
        self.accept(";")
        decl = A.MacroDecl(name, params, body, span=self.span_from(start))
        self.macros[name] = decl
        return decl

    _macro_params: set[str] | None = None

    # ------------------------------------------------------------ statements

    def block(self) -> A.Block:
        start = self.expect("{").span
        stmts: list[A.Stmt] = []
        while not self.at("}"):
            stmts.append(self.stmt())
            if isinstance(stmts[-1], A.TailExpr) and not self.at("}"):
                raise self.error({";"})
        self.expect("}")
        return A.Block(stmts, span=self.span_from(start))

    def stmt(self) -> A.Stmt:
        start = self.tok.span
        if self.at("let"):
            self.advance()
            mutable = self.accept("mut") is not None
            name = self.ident().text
            t = None
            if self.accept(":"):
                t = self.type()
            self.expect("=")
            init = self.expr()
            self.expect(";")
            return A.Let(name, mutable, t, init, span=self.span_from(start))
        if self.at("if"):
            return self.if_stmt()
        if self.at("{"):
            b = self.block()
            self.accept(";")
            return b
        if self.tok.kind == "ident" and self.tok.text in STMT_MACROS and self.peek().is_("!"):
            cls = STMT_MACROS[self.advance().text]
            self.expect("!")
            self.expect("(")
            e = self.expr()
            self.expect(")")
            self.expect(";")
            return cls(e, span=self.span_from(start))
        e = self.expr()
        if self.accept("="):
            v = self.expr()
            self.expect(";")
            return A.Assign(e, v, span=self.span_from(start))
        if self.accept(";"):
            return A.ExprStmt(e, span=self.span_from(start))
        if self.at("}"):
            return A.TailExpr(e, span=self.span_from(start))
        raise self.error({";", "=", "}"})

    def if_stmt(self) -> A.IfStmt:
        start = self.expect("if").span
        cond = self.expr(no_struct=True)
        then = self.block()
        else_ = None
        if self.accept("else"):
            if self.at("if"):
                inner = self.if_stmt()
                else_ = A.Block([inner], span=inner.span)
            else:
                else_ = self.block()
        self.accept(";")
        return A.IfStmt(cond, then, else_, span=self.span_from(start))

    # ------------------------------------------------------------ expressions

    def expr(self, no_struct: bool = False) -> A.Expr:
        saved = getattr(self, "_no_struct", False)
        self._no_struct = no_struct
        try:
            return self.implication()
        finally:
            self._no_struct = saved

    def implication(self) -> A.Expr:
        left = self.binary_level(0)
        if self.at("==>"):
            self.advance()
            right = self.implication()
            return A.Binary("==>", left, right, span=left.span.merge(right.span))
        return left

    LEVELS = [("||",), ("&&",), tuple(COMPARISONS), ("+", "-"), ("*", "/", "%")]

    def binary_level(self, level: int) -> A.Expr:
        if level == len(self.LEVELS):
            return self.unary()
        ops = self.LEVELS[level]
        left = self.binary_level(level + 1)
        while self.tok.kind == "punct" and self.tok.text in ops:
            op = self.advance().text
            right = self.binary_level(level + 1)
            left = A.Binary(op, left, right, span=left.span.merge(right.span))
            if op in COMPARISONS and self.tok.kind == "punct" and self.tok.text in COMPARISONS:
                raise ParseError("comparison operators cannot be chained", self.tok.span)
        return left

    def unary(self) -> A.Expr:
        if self.at("!") or self.at("-"):
            tok = self.advance()
            operand = self.unary()
            if tok.text == "-" and isinstance(operand, A.IntLit):
                return A.IntLit(-operand.value, span=tok.span.merge(operand.span))
            return A.Unary(tok.text, operand, span=tok.span.merge(operand.span))
        return self.postfix(self.primary())

    def postfix(self, e: A.Expr) -> A.Expr:
        while True:
            if self.at("."):
                self.advance()
                if self.tok.kind == "int":
                    t = self.advance()
                    e = A.FieldAccess(e, t.text, span=e.span.merge(t.span))
                    continue
                name = self.ident()
                if self.at("("):
                    args = self.call_args()
                    e = A.MethodCall(e, name.text, args, span=self.span_from(e.span))
                else:
                    e = A.FieldAccess(e, name.text, span=e.span.merge(name.span))
            else:
                return e

    def call_args(self) -> list[A.Expr]:
        self.expect("(")
        args = []
        saved = getattr(self, "_no_struct", False)
        self._no_struct = False
        while not self.at(")"):
            args.append(self.expr())
            if not self.accept(","):
                break
        self._no_struct = saved
        self.expect(")")
        return args

    def primary(self) -> A.Expr:
        tok = self.tok
        start = tok.span
        if tok.kind == "int":
            self.advance()
            return A.IntLit(int(tok.text), span=tok.span)
        if tok.is_("true") or tok.is_("false"):
            self.advance()
            return A.BoolLit(tok.text == "true", span=tok.span)
        if tok.is_("self"):
            self.advance()
            return A.Name("self", span=tok.span)
        if tok.is_("("):
            self.advance()
            saved = getattr(self, "_no_struct", False)
            self._no_struct = False
            first = self.expr()
            if self.accept(","):
                elems = [first]
                while not self.at(")"):
                    elems.append(self.expr())
                    if not self.accept(","):
                        break
                self.expect(")")
                self._no_struct = saved
                return A.TupleLit(elems, span=self.span_from(start))
            self.expect(")")
            self._no_struct = saved
            return first
        if tok.is_("if"):
            return self.if_expr()
        if tok.is_("$"):
            self.advance()
            name = self.ident()
            if self._macro_params is None or name.text not in self._macro_params:
                raise ParseError(f"unknown macro parameter ${name.text}", name.span)
            return A.MacroParam(name.text, span=self.span_from(start))
        if tok.kind == "ident":
            self.advance()
            name = tok.text
            if self.at("!") and self.peek().is_("("):
                return self.macro_call(tok)
            if self.at("("):
                if name == "forall":
                    return self.forall(start)
                args = self.call_args()
                span = self.span_from(start)
                if name == "old":
                    self._arity(name, args, 1, span)
                    return A.Old(args[0], span=span)
                if name == "holds":
                    self._arity(name, args, 1, span)
                    return A.Holds(args[0], span=span)
                if name == "resource":
                    self._arity(name, args, 2, span)
                    return A.Resource(args[0], args[1], span=span)
                return A.Call(name, args, span=span)
            if self.at("{") and not getattr(self, "_no_struct", False) and self._looks_like_struct_lit():
                return self.struct_lit(tok)
            return A.Name(name, span=tok.span)
        raise self.error({"expression"})

    def _arity(self, name, args, n, span):
        if len(args) != n:
            raise ParseError(f"{name}(...) takes {n} argument(s), got {len(args)}", span)

    def _looks_like_struct_lit(self) -> bool:
        nxt, nxt2 = self.peek(), self.peek(2)
        return nxt.is_("}") or (nxt.kind == "ident" and nxt2.is_(":"))

    def struct_lit(self, name_tok: Token) -> A.StructLit:
        self.expect("{")
        fields = []
        while not self.at("}"):
            f = self.ident().text
            self.expect(":")
            fields.append((f, self.expr()))
            if not self.accept(","):
                break
        self.expect("}")
        return A.StructLit(name_tok.text, fields, span=self.span_from(name_tok.span))

    def if_expr(self) -> A.IfExpr:
        start = self.expect("if").span
        cond = self.expr(no_struct=True)
        self.expect("{")
        then = self.expr()
        self.expect("}")
        self.expect("else")
        if self.at("if"):
            else_ = self.if_expr()
        else:
            self.expect("{")
            else_ = self.expr()
            self.expect("}")
        return A.IfExpr(cond, then, else_, span=self.span_from(start))

    def forall(self, start: Span) -> A.Forall:
        self.expect("(")
        self.expect("|")
        binders = []
        while not self.at("|"):
            bstart = self.tok.span
            name = self.ident().text
            self.expect(":")
            binders.append(A.Binder(name, self.type(), span=self.span_from(bstart)))
            if not self.accept(","):
                break
        self.expect("|")
        if not binders:
            raise ParseError("forall needs at least one binder", start)
        body = self.expr()
        self.expect(")")
        return A.Forall(binders, body, span=self.span_from(start))

    def macro_call(self, name_tok: Token) -> A.Expr:
        self.expect("!")
        args = self.call_args()
        span = self.span_from(name_tok.span)
        decl = self.macros.get(name_tok.text)
        if decl is None:
            raise ParseError(f"unknown macro {name_tok.text}!", name_tok.span)
        if len(args) != len(decl.params):
            raise ParseError(f"macro {decl.name}! takes {len(decl.params)} argument(s), got {len(args)}", span)
        return expand_macro(decl, args, span)


def expand_macro(decl: A.MacroDecl, args: list[A.Expr], span: Span) -> A.Expr:
    """Substitute ``args`` for the parameters of ``decl``; body nodes take the call-site span."""
    binding = dict(zip(decl.params, args))

    def sub(e):
        if isinstance(e, A.MacroParam):
            return copy.deepcopy(binding[e.name])
        e = copy.copy(e)
        e.span = span
        for fname in e.__dataclass_fields__:
            val = getattr(e, fname)
            if isinstance(val, A.Expr):
                setattr(e, fname, sub(val))
            elif isinstance(val, list):
                setattr(e, fname, [sub(v) if isinstance(v, A.Expr)
                                   else (v[0], sub(v[1])) if isinstance(v, tuple) else v
                                   for v in val])
        return e

    return sub(decl.body)
