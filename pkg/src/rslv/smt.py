"""SMT-LIB2 lowering of obligations and a subprocess driver for the solver.

Every obligation becomes its own self-contained script: declarations, the
path condition, the negated goal and ``(check-sat)``.  The model is requested
interactively only after the solver answered ``sat``.
"""

from __future__ import annotations

import os
import re
import shlex
import subprocess
import threading
import time
from dataclasses import dataclass, field

from rslv import terms as T
from rslv.errors import LoweringError, SolverCrash
from rslv.vcgen import Obligation

DEFAULT_SOLVER = "z3 -in -smt2"
DEFAULT_TIMEOUT = 10.0


@dataclass
class SmtScript:
    text: str
    symbols: list[str] = field(default_factory=list)


@dataclass
class Proved:
    time: float = 0.0


@dataclass
class Refuted:
    model: dict[str, str]
    text: str = ""
    time: float = 0.0


@dataclass
class Unknown:
    reason: str
    time: float = 0.0


SolverVerdict = Proved | Refuted | Unknown


def _check_fragment(terms):
    for root in terms:
        for x in T.walk(root):
            if isinstance(x, T.App):
                if x.op == "*" and not any(isinstance(a, T.IntV) for a in x.args):
                    raise LoweringError("non-linear multiplication is outside the supported fragment")
                if x.op in ("div", "mod") and not (isinstance(x.args[1], T.IntV) and x.args[1].value != 0):
                    raise LoweringError(f"'{x.op}' by a non-constant is outside the supported fragment")


def lower(ob: Obligation) -> SmtScript:
    terms = list(ob.pc) + [ob.goal]
    _check_fragment(terms)
    consts, funcs, sorts = T.free_symbols(terms)
    lines = ["(set-option :produce-models true)", "(set-logic ALL)"]
    for s in sorted(sorts):
        lines.append(f"(declare-sort {T.symbol(s)} 0)")
    for name in sorted(consts):
        lines.append(f"(declare-fun {T.symbol(name)} () {consts[name].smt()})")
    for name in sorted(funcs):
        args, ret = funcs[name]
        lines.append(f"(declare-fun {T.symbol(name)} ({' '.join(a.smt() for a in args)}) {ret.smt()})")
    for p in ob.pc:
        if p != T.TRUE:
            lines.append(f"(assert {T.smt(p)})")
    lines.append(f"(assert (not {T.smt(ob.goal)}))")
    lines.append("(check-sat)")
    return SmtScript("\n".join(lines) + "\n", sorted(consts) + sorted(funcs))


def check(script: SmtScript, solver_cmd: str = DEFAULT_SOLVER, timeout: float = DEFAULT_TIMEOUT) -> SolverVerdict:
    """Run one script; ``unsat`` is the only answer that yields Proved."""
    argv = shlex.split(solver_cmd)
    start = time.monotonic()
    try:
        proc = subprocess.Popen(argv, stdin=subprocess.PIPE, stdout=subprocess.PIPE,
                                stderr=subprocess.PIPE, text=True)
    except OSError as exc:
        raise SolverCrash(f"cannot start solver {argv[0]!r}: {exc}") from exc
    timed_out = threading.Event()

    def kill():
        timed_out.set()
        proc.kill()

    timer = threading.Timer(timeout, kill)
    timer.start()
    try:
        try:
            proc.stdin.write(script.text)
            proc.stdin.flush()
        except (BrokenPipeError, OSError):
            pass
        line = proc.stdout.readline().strip()
        while line == "success":
            line = proc.stdout.readline().strip()
        tail = "(get-model)\n(exit)\n" if line == "sat" else "(exit)\n"
        try:
            out, err = proc.communicate(tail, timeout=timeout)
        except (BrokenPipeError, OSError, ValueError):
            out, err = "", ""
        except subprocess.TimeoutExpired:
            proc.kill()
            out, err = proc.communicate()
            timed_out.set()
    finally:
        timer.cancel()
    elapsed = time.monotonic() - start
    if timed_out.is_set() and line not in ("sat", "unsat"):
        return Unknown("timeout", elapsed)
    if line == "unsat":
        return Proved(elapsed)
    if line == "sat":
        return Refuted(parse_model(out), out.strip(), elapsed)
    if line == "unknown":
        return Unknown("solver returned unknown", elapsed)
    detail = (line + " " + (err or "")).strip()
    raise SolverCrash(f"unexpected solver output (exit {proc.returncode}): {detail[:200]}")


def dump(script: SmtScript, directory: str, method: str, index: int) -> str:
    os.makedirs(directory, exist_ok=True)
    safe = re.sub(r"[^A-Za-z0-9_.-]+", "_", method)
    path = os.path.join(directory, f"{safe}_{index}.smt2")
    with open(path, "w") as fh:
        fh.write(script.text)
    return path


# ---------------------------------------------------------------- models

_TOKEN = re.compile(r'\(|\)|\|[^|]*\||"(?:[^"]|"")*"|[^\s()|"]+')


def _sexprs(text: str):
    stack: list[list] = [[]]
    for tok in _TOKEN.findall(text):
        if tok == "(":
            stack.append([])
        elif tok == ")":
            if len(stack) == 1:
                continue
            done = stack.pop()
            stack[-1].append(done)
        else:
            stack[-1].append(tok)
    return stack[0]


def _render(x) -> str:
    if isinstance(x, list):
        return "(" + " ".join(_render(y) for y in x) + ")"
    return x


def parse_model(text: str) -> dict[str, str]:
    """Zero-arity ``define-fun`` entries of a ``get-model`` answer as name -> value text."""
    out: dict[str, str] = {}

    def visit(node):
        if isinstance(node, list):
            if len(node) == 5 and node[0] == "define-fun" and node[2] == []:
                name = node[1]
                if name.startswith("|") and name.endswith("|"):
                    name = name[1:-1]
                out[name] = _render(node[4])
                return
            for c in node:
                visit(c)

    visit(_sexprs(text))
    return out
