"""Run a manifest of expected verdicts against the verifier."""

from __future__ import annotations

import json
import logging
import os
from dataclasses import dataclass, field

from rslv.errors import ManifestError, RslError
from rslv.oracle import Disagreement, DomainConfig, agree
from rslv.pipeline import RunOptions, compile_source, verify_file
from rslv.report import VERDICTS, VerificationReport

log = logging.getLogger(__name__)


@dataclass
class Expectation:
    file: str
    function: str
    verdict: str
    kind: str | None = None
    line: int | None = None


@dataclass
class CorpusManifest:
    root: str
    entries: list[Expectation]


def load_manifest(path: str) -> CorpusManifest:
    try:
        with open(path) as fh:
            data = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ManifestError(f"{path}: not valid JSON ({exc})") from exc
    if isinstance(data, dict):
        data = data.get("entries")
    if not isinstance(data, list):
        raise ManifestError(f"{path}: expected a list of entries")
    return CorpusManifest(os.path.dirname(os.path.abspath(path)), [_entry(e, i) for i, e in enumerate(data)])


def _entry(e, i: int) -> Expectation:
    if not isinstance(e, dict):
        raise ManifestError(f"entry {i} is not an object")
    missing = [k for k in ("file", "function", "verdict") if k not in e]
    if missing:
        raise ManifestError(f"entry {i} lacks {', '.join(missing)}")
    unknown = set(e) - {"file", "function", "verdict", "kind", "line"}
    if unknown:
        raise ManifestError(f"entry {i} has unknown keys {sorted(unknown)}")
    if e["verdict"] not in VERDICTS:
        raise ManifestError(f"entry {i}: verdict must be one of {', '.join(VERDICTS)}")
    if e.get("line") is not None and not isinstance(e["line"], int):
        raise ManifestError(f"entry {i}: line must be an integer")
    if e["verdict"] != "failed" and ("kind" in e or "line" in e):
        raise ManifestError(f"entry {i}: kind/line only make sense for failed functions")
    return Expectation(e["file"], e["function"], e["verdict"], e.get("kind"), e.get("line"))


@dataclass
class CorpusResult:
    checked: int = 0
    mismatches: list[str] = field(default_factory=list)
    warnings: list[str] = field(default_factory=list)
    reports: dict[str, VerificationReport] = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return not self.mismatches


def compare(exp: Expectation, report: VerificationReport) -> str | None:
    try:
        got = report.function(exp.function)
    except KeyError:
        return f"{exp.file}: no function {exp.function!r} in the report"
    if got.verdict != exp.verdict:
        return f"{exp.file}:{exp.function}: expected {exp.verdict}, got {got.verdict}"
    if exp.verdict == "failed" and (exp.kind or exp.line):
        hits = [d for d in got.diagnostics if d.severity == "error"
                and (exp.kind is None or d.kind == exp.kind)
                and (exp.line is None or (d.span is not None and d.span.line == exp.line))]
        if not hits:
            seen = ", ".join(f"{d.kind}@{d.span.line if d.span else '?'}" for d in got.diagnostics)
            return (f"{exp.file}:{exp.function}: expected {exp.kind or 'an error'} at line "
                    f"{exp.line if exp.line is not None else '?'}, got {seen or 'nothing'}")
    return None


def run_corpus(manifest: CorpusManifest, opts: RunOptions | None = None) -> CorpusResult:
    out = CorpusResult()
    if not manifest.entries:
        msg = "manifest has no entries; nothing was checked"
        log.warning(msg)
        out.warnings.append(msg)
        return out
    for exp in manifest.entries:
        path = os.path.join(manifest.root, exp.file)
        if exp.file not in out.reports:
            if not os.path.exists(path):
                raise ManifestError(f"corpus file {exp.file} does not exist")
            try:
                out.reports[exp.file] = verify_file(path, opts)
            except RslError as exc:
                out.mismatches.append(f"{exp.file}: {exc}")
                out.reports[exp.file] = VerificationReport(exp.file, errors=[str(exc)])
                continue
        problem = compare(exp, out.reports[exp.file])
        out.checked += 1
        if problem:
            out.mismatches.append(problem)
    listed = {e.file for e in manifest.entries}
    for name in sorted(os.listdir(manifest.root)):
        if name.endswith(".rsl") and name not in listed:
            out.warnings.append(f"{name} is not listed in the manifest")
    for file, report in out.reports.items():
        named = {e.function for e in manifest.entries if e.file == file}
        for f in report.functions:
            if f.name not in named:
                out.warnings.append(f"{file}:{f.name} has no expectation")
    return out


def oracle_sweep(manifest: CorpusManifest, result: CorpusResult,
                 cfg: DomainConfig | None = None) -> list[Disagreement]:
    """Check every symbolically verified method of ``result`` against the oracle.

    The oracle always runs on freshly encoded IR, so a broken encoder or
    executor configured in the run options cannot hide its own mistakes.
    """
    found = []
    for file, report in result.reports.items():
        if report.errors:
            continue
        with open(os.path.join(manifest.root, file)) as fh:
            core = compile_source(fh.read(), file)
        for m in core.methods:
            verdict = agree(report, m, cfg, core)
            if isinstance(verdict, Disagreement):
                found.append(verdict)
    return found
