"""Lexer, parser, pretty printer and type checker for .rsl sources."""

from rslv.frontend.lexer import tokenize
from rslv.frontend.parser import parse, parse_expr
from rslv.frontend.printer import pretty_print
from rslv.frontend.typecheck import check, typecheck

__all__ = ["tokenize", "parse", "parse_expr", "pretty_print", "check", "typecheck"]
