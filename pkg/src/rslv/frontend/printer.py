"""Render a SourceProgram back to RSL text.

Binary operators are always parenthesised, so the output reparses to the same
tree regardless of precedence.
"""

from __future__ import annotations

from rslv.frontend import ast as A
from rslv.types import RefType, StructType, Type


def fmt_type(t: Type) -> str:
    return str(t)


def fmt_expr(e: A.Expr) -> str:
    if isinstance(e, A.IntLit):
        return str(e.value) if e.value >= 0 else f"({e.value})"
    if isinstance(e, A.BoolLit):
        return "true" if e.value else "false"
    if isinstance(e, A.Name):
        return e.id
    if isinstance(e, A.MacroParam):
        return "$" + e.name
    if isinstance(e, A.FieldAccess):
        return f"{fmt_postfix(e.obj)}.{e.field}"
    if isinstance(e, A.Call):
        return f"{e.func}({', '.join(fmt_expr(a) for a in e.args)})"
    if isinstance(e, A.MethodCall):
        return f"{fmt_postfix(e.recv)}.{e.method}({', '.join(fmt_expr(a) for a in e.args)})"
    if isinstance(e, A.Unary):
        return f"{e.op}{fmt_postfix(e.operand)}"
    if isinstance(e, A.Binary):
        return f"({fmt_expr(e.left)} {e.op} {fmt_expr(e.right)})"
    if isinstance(e, A.IfExpr):
        return f"(if {fmt_expr(e.cond)} {{ {fmt_expr(e.then)} }} else {{ {fmt_expr(e.else_)} }})"
    if isinstance(e, A.Forall):
        bs = ", ".join(f"{b.name}: {fmt_type(b.type)}" for b in e.binders)
        return f"forall(|{bs}| {fmt_expr(e.body)})"
    if isinstance(e, A.Old):
        return f"old({fmt_expr(e.expr)})"
    if isinstance(e, A.Holds):
        return f"holds({fmt_expr(e.rtype)})"
    if isinstance(e, A.Resource):
        return f"resource({fmt_expr(e.rtype)}, {fmt_expr(e.amount)})"
    if isinstance(e, A.StructLit):
        fs = ", ".join(f"{n}: {fmt_expr(v)}" for n, v in e.fields)
        return f"{e.name} {{ {fs} }}"
    if isinstance(e, A.TupleLit):
        inner = ", ".join(fmt_expr(x) for x in e.elems)
        return f"({inner},)" if len(e.elems) == 1 else f"({inner})"
    raise TypeError(f"cannot print {type(e).__name__}")


def fmt_postfix(e: A.Expr) -> str:
    s = fmt_expr(e)
    if isinstance(e, (A.StructLit, A.Unary)) or (isinstance(e, A.IntLit) and e.value < 0):
        return f"({s})"
    return s


def fmt_cond(e: A.Expr) -> str:
    # struct literals are not allowed bare in an if condition
    s = fmt_expr(e)
    return f"({s})" if isinstance(e, A.StructLit) else s


def _stmt_lines(s: A.Stmt, ind: str) -> list[str]:
    if isinstance(s, A.Let):
        ann = f": {fmt_type(s.type)}" if s.type is not None else ""
        mut = "mut " if s.mutable else ""
        return [f"{ind}let {mut}{s.name}{ann} = {fmt_expr(s.init)};"]
    if isinstance(s, A.Assign):
        return [f"{ind}{fmt_expr(s.target)} = {fmt_expr(s.value)};"]
    if isinstance(s, A.ExprStmt):
        return [f"{ind}{fmt_expr(s.expr)};"]
    if isinstance(s, A.Produce):
        return [f"{ind}produce!({fmt_expr(s.expr)});"]
    if isinstance(s, A.Consume):
        return [f"{ind}consume!({fmt_expr(s.expr)});"]
    if isinstance(s, A.AssertStmt):
        return [f"{ind}assert!({fmt_expr(s.expr)});"]
    if isinstance(s, A.TailExpr):
        return [f"{ind}{fmt_expr(s.expr)}"]
    if isinstance(s, A.Block):
        return [f"{ind}{{", *_block_body(s, ind + "    "), f"{ind}}}"]
    if isinstance(s, A.IfStmt):
        lines = [f"{ind}if {fmt_cond(s.cond)} {{", *_block_body(s.then, ind + "    ")]
        if s.else_ is None:
            lines.append(f"{ind}}}")
        else:
            lines += [f"{ind}}} else {{", *_block_body(s.else_, ind + "    "), f"{ind}}}"]
        return lines
    raise TypeError(f"cannot print {type(s).__name__}")


def _block_body(b: A.Block, ind: str) -> list[str]:
    out = []
    for s in b.stmts:
        out += _stmt_lines(s, ind)
    return out


def _param(p: A.Param) -> str:
    if p.name == "self":
        return {"mut": "&mut self", "shared": "&self", "value": "self"}[p.mode]
    t = p.type
    if p.mode == "mut":
        t = RefType(True, t)
    elif p.mode == "shared":
        t = RefType(False, t)
    return f"{p.name}: {fmt_type(t)}"


def _function(f: A.FunctionDecl, ind: str) -> list[str]:
    lines = []
    if f.pure:
        lines.append(f"{ind}#[pure]")
    if f.trusted:
        lines.append(f"{ind}#[trusted]")
    lines += [f"{ind}#[requires({fmt_expr(r)})]" for r in f.requires]
    lines += [f"{ind}#[ensures({fmt_expr(r)})]" for r in f.ensures]
    sig = f"{ind}fn {f.name}({', '.join(_param(p) for p in f.params)})"
    if f.ret is not None:
        sig += f" -> {fmt_type(f.ret)}"
    if f.body is None:
        lines.append(sig + ";")
    else:
        lines += [sig + " {", *_block_body(f.body, ind + "    "), f"{ind}}}"]
    return lines


def pretty_print(prog: A.SourceProgram) -> str:
    out: list[str] = []
    for item in prog.items:
        if isinstance(item, A.TypeDecl):
            out.append(f"type {item.name};")
        elif isinstance(item, A.ResourceKindDecl):
            out += ["#[resource_kind]",
                    f"struct {item.name}({', '.join(fmt_type(t) for t in item.param_types)});"]
        elif isinstance(item, A.StructDecl):
            out += [f"#[invariant_twostate({fmt_expr(i)})]" for i in item.coupling_invariants]
            fs = ", ".join(f"{n}: {fmt_type(t)}" for n, t in item.fields)
            out.append(f"struct {item.name} {{ {fs} }}")
        elif isinstance(item, A.MacroDecl):
            ps = ", ".join(f"${p}:expr" for p in item.params)
            out.append(f"macro_rules! {item.name} {{ ({ps}) => {{ {fmt_expr(item.body)} }} }}")
        elif isinstance(item, A.FunctionDecl):
            out += _function(item, "")
        elif isinstance(item, A.ImplBlock):
            out.append(f"impl {item.name} {{")
            for f in item.functions:
                out += _function(f, "    ")
            out.append("}")
        out.append("")
    return "\n".join(out)


__all__ = ["pretty_print", "fmt_expr", "fmt_type", "StructType"]
