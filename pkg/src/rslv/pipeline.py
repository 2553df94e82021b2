"""frontend -> encoder -> vcgen -> SMT, producing a VerificationReport."""

from __future__ import annotations

import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

from rslv import core_ir as C
from rslv import smt
from rslv import terms as T
from rslv.encoder import Encoder, encode_program
from rslv.errors import DomainTooLarge, LoweringError, SolverCrash
from rslv.frontend import parse, typecheck
from rslv.oracle import DomainConfig, enumerate_check, oracle_summary
from rslv.report import Diagnostic, FunctionResult, VerificationReport, verdict_for
from rslv.vcgen import Executor, Obligation


@dataclass
class RunOptions:
    smt_cmd: str = smt.DEFAULT_SOLVER
    timeout: float = smt.DEFAULT_TIMEOUT
    jobs: int = 1
    dump_ir: bool = False
    dump_smt: str | None = None
    warn_leaks: bool = False
    oracle: bool = False
    domain_size: int = 2
    amount_max: int = 3
    # mutation testing swaps these out
    encoder: type = Encoder
    executor: type = Executor
    ir_out: list[str] = field(default_factory=list)


def compile_source(text: str, filename: str, encoder=Encoder) -> C.CoreProgram:
    prog = typecheck(parse(text, filename))
    core = encode_program(prog, encoder)
    problems = C.wellformed(core)
    if problems:
        raise problems[0]
    return core


def _discharge(ob: Obligation, opts: RunOptions) -> Diagnostic | None:
    if ob.goal == T.TRUE:
        return None
    try:
        script = smt.lower(ob)
    except LoweringError as exc:
        return Diagnostic("unsupported", f"{ob.message} ({exc.message})", ob.span, "unknown")
    if opts.dump_smt:
        smt.dump(script, opts.dump_smt, ob.method, ob.index)
    try:
        res = smt.check(script, opts.smt_cmd, opts.timeout)
    except SolverCrash as exc:
        return Diagnostic("solver-error", f"{ob.message} ({exc.message})", ob.span, "unknown")
    if isinstance(res, smt.Proved):
        return None
    if isinstance(res, smt.Refuted):
        return Diagnostic(ob.kind, ob.message, ob.span, "error", res.model or None)
    return Diagnostic("unknown", f"{ob.message} ({res.reason})", ob.span, "unknown")


def verify_method(core: C.CoreProgram, m: C.CoreMethod, opts: RunOptions) -> FunctionResult:
    start = time.monotonic()
    ex = opts.executor(core, m)
    obligations = ex.run()
    diags = [d for d in (_discharge(ob, opts) for ob in obligations) if d is not None]
    if opts.warn_leaks:
        for ob in ex.leak_checks:
            d = _discharge(ob, opts)
            if d is not None and d.severity == "error":
                diags.append(Diagnostic("leak", ob.message, ob.span, "warning"))
    result = FunctionResult(m.name, verdict_for(diags), diags, round(time.monotonic() - start, 3),
                            len(obligations), m.span)
    if opts.oracle:
        cfg = DomainConfig(ids=opts.domain_size, amount_max=opts.amount_max)
        try:
            result.oracle = oracle_summary(enumerate_check(m, cfg, core))
        except DomainTooLarge as exc:
            result.oracle = {"result": "incomplete", "detail": exc.message, "assignment": None}
    return result


def verify_source(text: str, filename: str = "<input>", opts: RunOptions | None = None) -> VerificationReport:
    """Verify every non-trusted function; parse and type errors propagate as exceptions."""
    opts = opts or RunOptions()
    core = compile_source(text, filename, opts.encoder)
    if opts.dump_ir:
        opts.ir_out.append(C.pretty_print(core))
    report = VerificationReport(filename)
    if opts.jobs > 1 and len(core.methods) > 1:
        with ThreadPoolExecutor(max_workers=opts.jobs) as pool:
            report.functions = list(pool.map(lambda m: verify_method(core, m, opts), core.methods))
    else:
        report.functions = [verify_method(core, m, opts) for m in core.methods]
    report.sort()
    return report


def verify_file(path: str, opts: RunOptions | None = None) -> VerificationReport:
    with open(path) as fh:
        text = fh.read()
    return verify_source(text, path, opts)

