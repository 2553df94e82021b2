"""Tokenizer for RSL source text."""

from __future__ import annotations

from dataclasses import dataclass

from rslv.errors import LexError, Span

KEYWORDS = frozenset({
    "fn", "struct", "impl", "let", "mut", "if", "else", "true", "false", "type", "self",
})

# longest first so that maximal munch works with a simple prefix scan
PUNCT = (
    "==>", "#[", "::", "->", "=>", "==", "!=", "<=", ">=", "&&", "||",
    "+", "-", "*", "/", "%", "<", ">", "=", "!", "(", ")", "{", "}", "[", "]",
    ",", ";", ":", ".", "|", "&", "$",
)


@dataclass(frozen=True)
class Token:
    kind: str      # "ident", "int", "string", "kw", "punct", "error", "eof"
    text: str
    span: Span

    def __repr__(self) -> str:
        return f"Token({self.kind}, {self.text!r}, {self.span.line}:{self.span.col})"

    def is_(self, text: str) -> bool:
        return self.kind in ("kw", "punct") and self.text == text


def tokenize(text: str, filename: str = "<input>", *, strict: bool = True) -> list[Token]:
    """Split ``text`` into tokens, dropping whitespace and comments.

    Illegal characters produce an ``error`` token; with ``strict`` (the default)
    the first one raises :class:`LexError` instead.  Unterminated strings and
    block comments always raise.  The returned list never contains the final
    ``eof`` token; :class:`~rslv.frontend.parser.Parser` appends it.
    """
    tokens: list[Token] = []
    i, line, col = 0, 1, 1
    n = len(text)

    def span(start_line, start_col, end_line, end_col):
        return Span(start_line, start_col, end_line, end_col, filename)

    while i < n:
        c = text[i]
        if c == "\n":
            i += 1
            line += 1
            col = 1
            continue
        if c in " \t\r":
            i += 1
            col += 1
            continue
        if text.startswith("//", i):
            while i < n and text[i] != "\n":
                i += 1
            continue
        if text.startswith("/*", i):
            sl, sc = line, col
            j = text.find("*/", i + 2)
            if j < 0:
                raise LexError("unterminated block comment", span(sl, sc, sl, sc + 2))
            chunk = text[i:j + 2]
            nl = chunk.count("\n")
            if nl:
                line += nl
                col = len(chunk) - chunk.rfind("\n")
            else:
                col += len(chunk)
            i = j + 2
            continue
        sl, sc = line, col
        if c.isalpha() or c == "_":
            j = i
            while j < n and (text[j].isalnum() or text[j] == "_"):
                j += 1
            word = text[i:j]
            kind = "kw" if word in KEYWORDS else "ident"
            col += j - i
            tokens.append(Token(kind, word, span(sl, sc, line, col)))
            i = j
            continue
        if c.isdigit():
            j = i
            while j < n and (text[j].isdigit() or text[j] == "_"):
                j += 1
            col += j - i
            tokens.append(Token("int", text[i:j].replace("_", ""), span(sl, sc, line, col)))
            i = j
            continue
        if c == '"':
            j = i + 1
            while j < n and text[j] != '"' and text[j] != "\n":
                j += 2 if text[j] == "\\" else 1
            if j >= n or text[j] != '"':
                raise LexError("unterminated string literal", span(sl, sc, sl, sc + 1))
            col += j + 1 - i
            tokens.append(Token("string", text[i + 1:j], span(sl, sc, line, col)))
            i = j + 1
            continue
        for p in PUNCT:
            if text.startswith(p, i):
                col += len(p)
                tokens.append(Token("punct", p, span(sl, sc, line, col)))
                i += len(p)
                break
        else:
            col += 1
            bad = Token("error", c, span(sl, sc, line, col))
            if strict:
                raise LexError(f"illegal character {c!r}", bad.span)
            tokens.append(bad)
            i += 1
    return tokens
