"""Value types shared by the typed AST and the core IR."""

from __future__ import annotations

from dataclasses import dataclass


class Type:
    def erase(self) -> "Type":
        return self


@dataclass(frozen=True)
class IntType(Type):
    # u32 is an unbounded integer whose only extra meaning is a >= 0 fact on parameters
    unsigned: bool = False

    def erase(self) -> Type:
        return INT

    def __str__(self) -> str:
        return "u32" if self.unsigned else "Int"


@dataclass(frozen=True)
class BoolType(Type):
    def __str__(self) -> str:
        return "bool"


@dataclass(frozen=True)
class SortType(Type):
    """An uninterpreted identifier type declared with ``type Name;``."""
    name: str

    def __str__(self) -> str:
        return self.name


@dataclass(frozen=True)
class StructType(Type):
    name: str

    def __str__(self) -> str:
        return self.name


@dataclass(frozen=True)
class TupleType(Type):
    elems: tuple[Type, ...]

    def erase(self) -> Type:
        return TupleType(tuple(e.erase() for e in self.elems))

    def __str__(self) -> str:
        return "(" + ", ".join(map(str, self.elems)) + ("," if len(self.elems) == 1 else "") + ")"


@dataclass(frozen=True)
class MapType(Type):
    """Total map from ``key`` to integers, default 0."""
    key: Type

    def erase(self) -> Type:
        return MapType(self.key.erase())

    def __str__(self) -> str:
        return f"Map[{self.key}]Int"


@dataclass(frozen=True)
class ResType(Type):
    """The type of a resource-type constructor application such as ``Money(a)``."""
    kind: str

    def __str__(self) -> str:
        return f"resource type {self.kind}"


@dataclass(frozen=True)
class AssertionType(Type):
    """A boolean that carries resource assertions; only valid in positive positions."""

    def __str__(self) -> str:
        return "resource assertion"


@dataclass(frozen=True)
class UnitType(Type):
    def __str__(self) -> str:
        return "()"


@dataclass(frozen=True)
class RefType(Type):
    mutable: bool
    inner: Type

    def __str__(self) -> str:
        return ("&mut " if self.mutable else "&") + str(self.inner)


INT = IntType()
U32 = IntType(unsigned=True)
BOOL = BoolType()
UNIT = UnitType()
ASSERTION = AssertionType()


def same(a: Type, b: Type) -> bool:
    return a.erase() == b.erase()


def is_int(t: Type) -> bool:
    return isinstance(t, IntType)


def is_boolish(t: Type) -> bool:
    return isinstance(t, (BoolType, AssertionType))
