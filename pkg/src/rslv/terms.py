"""Symbolic terms used by the VC generator, with folding smart constructors.

Terms are sorted: Int, Bool, uninterpreted sorts named after ``type`` decls,
and arrays.  Structs and tuples never become terms; the VC generator keeps
them as Python records of terms (:class:`Rec`, :class:`Tup`).
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from functools import reduce


@dataclass(frozen=True)
class Sort:
    name: str
    args: tuple["Sort", ...] = ()

    def smt(self) -> str:
        if self.name == "Array":
            return f"(Array {self.args[0].smt()} {self.args[1].smt()})"
        return symbol(self.name) if self.name not in ("Int", "Bool") else self.name

    def __str__(self):
        return self.smt()


INT_S = Sort("Int")
BOOL_S = Sort("Bool")


def array_sort(key: Sort, val: Sort) -> Sort:
    return Sort("Array", (key, val))


class Term:
    sort: Sort


@dataclass(frozen=True)
class IntV(Term):
    value: int

    @property
    def sort(self):
        return INT_S


@dataclass(frozen=True)
class BoolV(Term):
    value: bool

    @property
    def sort(self):
        return BOOL_S


@dataclass(frozen=True)
class Const(Term):
    """A free (existentially read) symbol."""
    name: str
    sort: Sort


@dataclass(frozen=True)
class BVar(Term):
    """A variable bound by an enclosing quantifier."""
    name: str
    sort: Sort


@dataclass(frozen=True)
class App(Term):
    op: str
    args: tuple[Term, ...]
    sort: Sort


@dataclass(frozen=True)
class UF(Term):
    name: str
    args: tuple[Term, ...]
    sort: Sort


@dataclass(frozen=True)
class Quant(Term):
    vars: tuple[BVar, ...]
    body: Term

    @property
    def sort(self):
        return BOOL_S


TRUE = BoolV(True)
FALSE = BoolV(False)
ZERO = IntV(0)


# ---------------------------------------------------------------- constructors

def _is_int(t, v=None):
    return isinstance(t, IntV) and (v is None or t.value == v)


def add(a: Term, b: Term) -> Term:
    if _is_int(a) and _is_int(b):
        return IntV(a.value + b.value)
    if _is_int(a, 0):
        return b
    if _is_int(b, 0):
        return a
    return App("+", (a, b), INT_S)


def sub(a: Term, b: Term) -> Term:
    if _is_int(a) and _is_int(b):
        return IntV(a.value - b.value)
    if _is_int(b, 0):
        return a
    if a == b:
        return ZERO
    return App("-", (a, b), INT_S)


def neg(a: Term) -> Term:
    if _is_int(a):
        return IntV(-a.value)
    return App("-", (a,), INT_S)


def mul(a: Term, b: Term) -> Term:
    if _is_int(a) and _is_int(b):
        return IntV(a.value * b.value)
    if _is_int(a, 0) or _is_int(b, 0):
        return ZERO
    if _is_int(a, 1):
        return b
    if _is_int(b, 1):
        return a
    return App("*", (a, b), INT_S)


def div(a: Term, b: Term) -> Term:
    if _is_int(a) and _is_int(b) and b.value != 0:
        return IntV(euclid_div(a.value, b.value))
    return App("div", (a, b), INT_S)


def mod(a: Term, b: Term) -> Term:
    if _is_int(a) and _is_int(b) and b.value != 0:
        return IntV(a.value - b.value * euclid_div(a.value, b.value))
    return App("mod", (a, b), INT_S)


def euclid_div(a: int, b: int) -> int:
    """SMT-LIB integer division: the remainder is always non-negative."""
    q = a // b
    if a - b * q < 0:
        q += 1
    return q


_CMP = {"<": lambda x, y: x < y, "<=": lambda x, y: x <= y,
        ">": lambda x, y: x > y, ">=": lambda x, y: x >= y}


def cmp(op: str, a: Term, b: Term) -> Term:
    if _is_int(a) and _is_int(b):
        return BoolV(_CMP[op](a.value, b.value))
    if a == b:
        return BoolV(op in ("<=", ">="))
    return App(op, (a, b), BOOL_S)


def eq(a: Term, b: Term) -> Term:
    if a is b or a == b:
        return TRUE
    if isinstance(a, (IntV, BoolV)) and isinstance(b, (IntV, BoolV)):
        return BoolV(a.value == b.value)
    if isinstance(a, BoolV):
        return b if a.value else not_(b)
    if isinstance(b, BoolV):
        return a if b.value else not_(a)
    return App("=", (a, b), BOOL_S)


def not_(a: Term) -> Term:
    if isinstance(a, BoolV):
        return BoolV(not a.value)
    if isinstance(a, App) and a.op == "not":
        return a.args[0]
    return App("not", (a,), BOOL_S)


def and_(*args: Term) -> Term:
    flat = []
    for a in args:
        if isinstance(a, BoolV):
            if not a.value:
                return FALSE
            continue
        if isinstance(a, App) and a.op == "and":
            flat.extend(a.args)
        else:
            flat.append(a)
    if not flat:
        return TRUE
    if len(flat) == 1:
        return flat[0]
    return App("and", tuple(flat), BOOL_S)


def or_(*args: Term) -> Term:
    flat = []
    for a in args:
        if isinstance(a, BoolV):
            if a.value:
                return TRUE
            continue
        if isinstance(a, App) and a.op == "or":
            flat.extend(a.args)
        else:
            flat.append(a)
    if not flat:
        return FALSE
    if len(flat) == 1:
        return flat[0]
    return App("or", tuple(flat), BOOL_S)


def implies(a: Term, b: Term) -> Term:
    if isinstance(a, BoolV):
        return b if a.value else TRUE
    if isinstance(b, BoolV) and b.value:
        return TRUE
    if a == b:
        return TRUE
    return App("=>", (a, b), BOOL_S)


def ite(c: Term, t: Term, e: Term) -> Term:
    if isinstance(c, BoolV):
        return t if c.value else e
    if t == e:
        return t
    if t.sort == BOOL_S:
        if t == TRUE and e == FALSE:
            return c
        if t == FALSE and e == TRUE:
            return not_(c)
    return App("ite", (c, t, e), t.sort)


def select(m: Term, k: Term) -> Term:
    while isinstance(m, App) and m.op == "store":
        same = eq(m.args[1], k)
        if same == TRUE:
            return m.args[2]
        if same == FALSE:
            m = m.args[0]
            continue
        break
    return App("select", (m, k), m.sort.args[1])


def store(m: Term, k: Term, v: Term) -> Term:
    return App("store", (m, k, v), m.sort)


def forall(vars: tuple[BVar, ...], body: Term) -> Term:
    if isinstance(body, BoolV) or not vars:
        return body
    return Quant(tuple(vars), body)


def sum_terms(ts) -> Term:
    return reduce(add, ts, ZERO)


# ---------------------------------------------------------------- inspection

def children(t: Term):
    if isinstance(t, (App, UF)):
        return t.args
    if isinstance(t, Quant):
        return (t.body,)
    return ()


def walk(t: Term):
    stack = [t]
    seen = set()
    while stack:
        x = stack.pop()
        if id(x) in seen:
            continue
        seen.add(id(x))
        yield x
        stack.extend(children(x))


def free_symbols(terms) -> tuple[dict[str, Sort], dict[str, tuple[tuple[Sort, ...], Sort]], set[str]]:
    """Constants, uninterpreted functions and user sorts occurring in ``terms``."""
    consts: dict[str, Sort] = {}
    funcs: dict[str, tuple[tuple[Sort, ...], Sort]] = {}
    sorts: set[str] = set()

    def note_sort(s: Sort):
        if s.name == "Array":
            for a in s.args:
                note_sort(a)
        elif s.name not in ("Int", "Bool"):
            sorts.add(s.name)

    for root in terms:
        for x in walk(root):
            if isinstance(x, Const):
                consts[x.name] = x.sort
                note_sort(x.sort)
            elif isinstance(x, UF):
                funcs[x.name] = (tuple(a.sort for a in x.args), x.sort)
                note_sort(x.sort)
            elif isinstance(x, BVar):
                note_sort(x.sort)
    return consts, funcs, sorts


# ---------------------------------------------------------------- printing

_SIMPLE = re.compile(r"[A-Za-z_~!@$%^&*+=<>.?/\-][A-Za-z0-9_~!@$%^&*+=<>.?/\-]*")
_RESERVED = {"and", "or", "not", "ite", "forall", "exists", "let", "true", "false", "select",
             "store", "div", "mod", "distinct", "par", "_", "!", "as", "Int", "Bool", "Array"}


def symbol(name: str) -> str:
    if _SIMPLE.fullmatch(name) and name not in _RESERVED and not name[0].isdigit():
        return name
    return "|" + name.replace("|", "_").replace("\\", "_") + "|"


def smt(t: Term) -> str:
    if isinstance(t, IntV):
        return str(t.value) if t.value >= 0 else f"(- {-t.value})"
    if isinstance(t, BoolV):
        return "true" if t.value else "false"
    if isinstance(t, (Const, BVar)):
        return symbol(t.name)
    if isinstance(t, App):
        return f"({t.op} {' '.join(smt(a) for a in t.args)})"
    if isinstance(t, UF):
        if not t.args:
            return symbol(t.name)
        return f"({symbol(t.name)} {' '.join(smt(a) for a in t.args)})"
    if isinstance(t, Quant):
        vs = " ".join(f"({symbol(v.name)} {v.sort.smt()})" for v in t.vars)
        return f"(forall ({vs}) {smt(t.body)})"
    raise TypeError(f"not a term: {t!r}")
