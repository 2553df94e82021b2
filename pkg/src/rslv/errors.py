"""Source spans and the exception hierarchy shared by all pipeline stages."""

from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True, order=True)
class Span:
    line: int
    col: int
    end_line: int
    end_col: int
    file: str = "<input>"

    def merge(self, other: "Span | None") -> "Span":
        if other is None:
            return self
        return Span(self.line, self.col, other.end_line, other.end_col, self.file)

    def to_dict(self) -> dict:
        return {"file": self.file, "line": self.line, "col": self.col,
                "end_line": self.end_line, "end_col": self.end_col}

    @classmethod
    def from_dict(cls, d: dict) -> "Span":
        return cls(d["line"], d["col"], d["end_line"], d["end_col"], d.get("file", "<input>"))

    def __str__(self) -> str:
        return f"{self.file}:{self.line}:{self.col}"


class RslError(Exception):
    """Base class for every error raised by rslv."""

    def __init__(self, message: str, span: Span | None = None):
        super().__init__(message)
        self.message = message
        self.span = span

    def __str__(self) -> str:
        if self.span is None:
            return self.message
        return f"{self.span}: {self.message}"


class LexError(RslError):
    pass


class ParseError(RslError):
    def __init__(self, message: str, span: Span | None = None, expected: frozenset[str] = frozenset()):
        super().__init__(message, span)
        self.expected = expected


class TypeCheckError(RslError):
    """A single well-formedness or typing violation."""


class TypeCheckFailed(RslError):
    """Raised by ``typecheck`` carrying every violation found."""

    def __init__(self, errors: list[TypeCheckError]):
        super().__init__(f"{len(errors)} type error(s); first: {errors[0]}", errors[0].span)
        self.errors = errors


class IRError(RslError):
    def __init__(self, message: str, method: str | None = None, index: int | None = None):
        super().__init__(message)
        self.method = method
        self.index = index

    def __str__(self) -> str:
        where = self.method or "<program>"
        if self.index is not None:
            where += f"#{self.index}"
        return f"{where}: {self.message}"


class LoweringError(RslError):
    pass


class SolverCrash(RslError):
    pass


class ManifestError(RslError):
    pass


class DomainTooLarge(RslError):
    pass
