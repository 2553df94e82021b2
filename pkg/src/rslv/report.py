"""Verification reports: per-function verdicts, diagnostics and their JSON form."""

from __future__ import annotations

import json
from dataclasses import dataclass, field

from rslv.errors import Span

VERDICTS = ("verified", "failed", "unknown")
SCHEMA_VERSION = 1


@dataclass
class Diagnostic:
    kind: str
    message: str
    span: Span | None = None
    # "error" for refuted obligations, "unknown" for undecided ones, "warning" for leaks
    severity: str = "error"
    model: dict[str, str] | None = None

    def to_dict(self) -> dict:
        return {"kind": self.kind, "message": self.message, "severity": self.severity,
                "span": self.span.to_dict() if self.span else None, "model": self.model}

    @classmethod
    def from_dict(cls, d: dict) -> "Diagnostic":
        span = Span.from_dict(d["span"]) if d.get("span") else None
        return cls(d["kind"], d["message"], span, d.get("severity", "error"), d.get("model"))

    def render(self) -> str:
        where = f"{self.span}: " if self.span else ""
        label = {"error": "error", "unknown": "unknown", "warning": "warning"}.get(self.severity, self.severity)
        return f"{where}{label}[{self.kind}]: {self.message}"


def verdict_for(diagnostics: list[Diagnostic]) -> str:
    if any(d.severity == "error" for d in diagnostics):
        return "failed"
    if any(d.severity == "unknown" for d in diagnostics):
        return "unknown"
    return "verified"


@dataclass
class FunctionResult:
    name: str
    verdict: str
    diagnostics: list[Diagnostic] = field(default_factory=list)
    time: float = 0.0
    obligations: int = 0
    span: Span | None = None
    oracle: dict | None = None

    def to_dict(self) -> dict:
        return {"name": self.name, "verdict": self.verdict, "time": self.time,
                "obligations": self.obligations,
                "span": self.span.to_dict() if self.span else None,
                "diagnostics": [d.to_dict() for d in self.diagnostics],
                "oracle": self.oracle}

    @classmethod
    def from_dict(cls, d: dict) -> "FunctionResult":
        if d.get("verdict") not in VERDICTS:
            raise ValueError(f"bad verdict {d.get('verdict')!r} for {d.get('name')!r}")
        return cls(d["name"], d["verdict"], [Diagnostic.from_dict(x) for x in d.get("diagnostics", [])],
                   d.get("time", 0.0), d.get("obligations", 0),
                   Span.from_dict(d["span"]) if d.get("span") else None, d.get("oracle"))


@dataclass
class VerificationReport:
    file: str
    functions: list[FunctionResult] = field(default_factory=list)
    errors: list[str] = field(default_factory=list)

    def function(self, name: str) -> FunctionResult:
        for f in self.functions:
            if f.name == name:
                return f
        raise KeyError(name)

    @property
    def verdict(self) -> str:
        vs = [f.verdict for f in self.functions]
        if self.errors or "failed" in vs:
            return "failed"
        if "unknown" in vs:
            return "unknown"
        return "verified"

    def sort(self):
        big = Span(10 ** 9, 0, 0, 0)
        self.functions.sort(key=lambda f: (f.span or big, f.name))

    def to_dict(self) -> dict:
        return {"version": SCHEMA_VERSION, "file": self.file, "verdict": self.verdict,
                "errors": list(self.errors), "functions": [f.to_dict() for f in self.functions]}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    @classmethod
    def from_dict(cls, d: dict) -> "VerificationReport":
        if d.get("version") != SCHEMA_VERSION:
            raise ValueError(f"unsupported report version {d.get('version')!r}")
        return cls(d["file"], [FunctionResult.from_dict(f) for f in d.get("functions", [])],
                   list(d.get("errors", [])))

    @classmethod
    def from_json(cls, text: str) -> "VerificationReport":
        return cls.from_dict(json.loads(text))

    def render(self) -> str:
        lines = []
        for e in self.errors:
            lines.append(e)
        for f in self.functions:
            lines.append(f"{f.name}: {f.verdict} ({f.obligations} obligations, {f.time:.2f}s)")
            for d in f.diagnostics:
                lines.append("  " + d.render())
                if d.model:
                    for k in sorted(d.model):
                        lines.append(f"    {k}={d.model[k]}")
            if f.oracle:
                lines.append(f"  oracle: {f.oracle.get('result')}"
                             + (f" ({f.oracle['detail']})" if f.oracle.get("detail") else ""))
                for k, v in sorted((f.oracle.get("assignment") or {}).items()):
                    lines.append(f"    {k}={v}")
        ok = sum(f.verdict == "verified" for f in self.functions)
        lines.append(f"{self.file}: {self.verdict} ({ok}/{len(self.functions)} functions verified)")
        return "\n".join(lines)
