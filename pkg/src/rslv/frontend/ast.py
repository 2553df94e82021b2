"""Source-level AST for RSL.

Nodes are plain dataclasses.  ``span``, ``ty`` and ``ref`` are metadata: they
are excluded from equality so that two parses of equivalent text compare
equal.  ``ty`` and ``ref`` are filled in once by the type checker; after that
the tree is treated as read-only.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any

from rslv.errors import Span
from rslv.types import Type


def _meta(default=None):
    return field(default=default, compare=False, repr=False, kw_only=True)


@dataclass
class Node:
    span: Span | None = _meta()


# ---------------------------------------------------------------- expressions

@dataclass
class Expr(Node):
    ty: Type | None = _meta()
    ref: Any = _meta()


@dataclass
class IntLit(Expr):
    value: int


@dataclass
class BoolLit(Expr):
    value: bool


@dataclass
class Name(Expr):
    """A variable, ``self`` or ``result``.  ``ref`` becomes the binding kind."""
    id: str


@dataclass
class FieldAccess(Expr):
    obj: Expr
    field: str


@dataclass
class Call(Expr):
    """``f(args)``: resource constructor, pure function or (in statements) a call."""
    func: str
    args: list[Expr]


@dataclass
class MethodCall(Expr):
    recv: Expr
    method: str
    args: list[Expr]


@dataclass
class Unary(Expr):
    op: str
    operand: Expr


@dataclass
class Binary(Expr):
    op: str
    left: Expr
    right: Expr


@dataclass
class IfExpr(Expr):
    cond: Expr
    then: Expr
    else_: Expr


@dataclass
class Binder(Node):
    name: str
    type: Type


@dataclass
class Forall(Expr):
    binders: list[Binder]
    body: Expr


@dataclass
class Old(Expr):
    expr: Expr


@dataclass
class Holds(Expr):
    rtype: Expr


@dataclass
class Resource(Expr):
    rtype: Expr
    amount: Expr


@dataclass
class StructLit(Expr):
    name: str
    fields: list[tuple[str, Expr]]


@dataclass
class TupleLit(Expr):
    elems: list[Expr]


@dataclass
class MacroParam(Expr):
    """``$name`` inside a macro body; never survives expansion."""
    name: str


# ---------------------------------------------------------------- statements

@dataclass
class Stmt(Node):
    pass


@dataclass
class Let(Stmt):
    name: str
    mutable: bool
    type: Type | None
    init: Expr


@dataclass
class Assign(Stmt):
    target: Expr
    value: Expr


@dataclass
class ExprStmt(Stmt):
    expr: Expr


@dataclass
class Produce(Stmt):
    expr: Expr


@dataclass
class Consume(Stmt):
    expr: Expr


@dataclass
class AssertStmt(Stmt):
    expr: Expr


@dataclass
class Block(Stmt):
    stmts: list[Stmt]


@dataclass
class IfStmt(Stmt):
    cond: Expr
    then: Block
    else_: Block | None


@dataclass
class TailExpr(Stmt):
    """Trailing expression of a body; its value is the function result."""
    expr: Expr


# ---------------------------------------------------------------- declarations

@dataclass
class Param(Node):
    name: str
    type: Type
    mode: str  # "value" | "shared" | "mut"


@dataclass
class TypeDecl(Node):
    name: str


@dataclass
class ResourceKindDecl(Node):
    name: str
    param_types: list[Type]


@dataclass
class StructDecl(Node):
    name: str
    fields: list[tuple[str, Type]]
    coupling_invariants: list[Expr]


@dataclass
class FunctionDecl(Node):
    name: str
    owner: str | None
    params: list[Param]
    ret: Type | None
    requires: list[Expr]
    ensures: list[Expr]
    body: Block | None
    pure: bool = False
    trusted: bool = False

    @property
    def qualname(self) -> str:
        return f"{self.owner}::{self.name}" if self.owner else self.name

    @property
    def is_method(self) -> bool:
        return bool(self.params) and self.params[0].name == "self"


@dataclass
class MacroDecl(Node):
    name: str
    params: list[str]
    body: Expr


@dataclass
class SourceProgram:
    items: list[Node]
    filename: str = field(default="<input>", compare=False)
    source: str = field(default="", compare=False, repr=False)

    @property
    def type_decls(self) -> list[TypeDecl]:
        return [i for i in self.items if isinstance(i, TypeDecl)]

    @property
    def resource_kinds(self) -> list[ResourceKindDecl]:
        return [i for i in self.items if isinstance(i, ResourceKindDecl)]

    @property
    def structs(self) -> list[StructDecl]:
        return [i for i in self.items if isinstance(i, StructDecl)]

    @property
    def functions(self) -> list[FunctionDecl]:
        out = []
        for i in self.items:
            if isinstance(i, FunctionDecl):
                out.append(i)
            elif isinstance(i, ImplBlock):
                out.extend(i.functions)
        return out

    @property
    def macros(self) -> list[MacroDecl]:
        return [i for i in self.items if isinstance(i, MacroDecl)]

    def pure_functions_of(self, struct: str) -> list[FunctionDecl]:
        return [f for f in self.functions if f.pure and f.owner == struct]


@dataclass
class ImplBlock(Node):
    name: str
    functions: list[FunctionDecl]


def children(node: Node):
    """Yield direct child nodes of an expression or statement."""
    if isinstance(node, FieldAccess):
        yield node.obj
    elif isinstance(node, Call):
        yield from node.args
    elif isinstance(node, MethodCall):
        yield node.recv
        yield from node.args
    elif isinstance(node, Unary):
        yield node.operand
    elif isinstance(node, Binary):
        yield node.left
        yield node.right
    elif isinstance(node, IfExpr):
        yield node.cond
        yield node.then
        yield node.else_
    elif isinstance(node, Forall):
        yield node.body
    elif isinstance(node, (Old,)):
        yield node.expr
    elif isinstance(node, Holds):
        yield node.rtype
    elif isinstance(node, Resource):
        yield node.rtype
        yield node.amount
    elif isinstance(node, StructLit):
        for _, e in node.fields:
            yield e
    elif isinstance(node, TupleLit):
        yield from node.elems
    elif isinstance(node, (Let,)):
        yield node.init
    elif isinstance(node, Assign):
        yield node.target
        yield node.value
    elif isinstance(node, (ExprStmt, Produce, Consume, AssertStmt, TailExpr)):
        yield node.expr
    elif isinstance(node, Block):
        yield from node.stmts
    elif isinstance(node, IfStmt):
        yield node.cond
        yield node.then
        if node.else_ is not None:
            yield node.else_


def walk(node: Node):
    yield node
    for c in children(node):
        yield from walk(c)
