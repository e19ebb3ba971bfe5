"""Abstract syntax of the dynamic logic.

Labels are tuples of edge labels in execution order: ``("i", "ab")`` means
take ``i`` first, then ``ab``.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import reduce
from typing import Iterable, Union

COMPARISONS = ("<", "=", ">", "<=", ">=")


@dataclass(frozen=True)
class Atom:
    measurement: str
    outcome: str

    @property
    def letter(self) -> str:
        return f"{self.measurement}={self.outcome}"


@dataclass(frozen=True)
class Top:
    pass


@dataclass(frozen=True)
class Not:
    body: "Formula"


@dataclass(frozen=True)
class And:
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True)
class Or:
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True)
class Iff:
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True)
class Xor:
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True)
class Box:
    label: tuple
    body: "Formula"


@dataclass(frozen=True)
class Diamond:
    label: tuple
    body: "Formula"


@dataclass(frozen=True)
class Prob:
    body: "Formula"
    label: tuple
    op: str
    bound: Fraction

    def __post_init__(self):
        if self.op not in COMPARISONS:
            raise ValueError(f"unknown comparison {self.op!r}")


Formula = Union[Atom, Top, Not, And, Or, Iff, Xor, Box, Diamond, Prob]
BOOLEAN = (Atom, Top, Not, And, Or, Iff, Xor)
BINARY = (And, Or, Iff, Xor)


@dataclass(frozen=True)
class Sequent:
    antecedents: frozenset
    consequent: Formula

    def __init__(self, antecedents: Iterable[Formula], consequent: Formula):
        object.__setattr__(self, "antecedents", frozenset(antecedents))
        object.__setattr__(self, "consequent", consequent)


def label_of(value) -> tuple:
    """Normalize ``"ab"`` or ``("i", "ab")`` to a label tuple."""
    return (value,) if isinstance(value, str) else tuple(value)


def box(label, body) -> Box:
    return Box(label_of(label), body)


def diamond(label, body) -> Diamond:
    return Diamond(label_of(label), body)


def conjoin(formulas: Iterable[Formula]) -> Formula:
    formulas = list(formulas)
    return reduce(And, formulas) if formulas else Top()


def disjoin(formulas: Iterable[Formula]) -> Formula:
    formulas = list(formulas)
    return reduce(Or, formulas) if formulas else Not(Top())


def conjuncts(f: Formula) -> list[Formula]:
    """Flatten a left-nested conjunction."""
    if isinstance(f, And):
        return conjuncts(f.left) + conjuncts(f.right)
    return [f]


def is_boolean(f: Formula) -> bool:
    if isinstance(f, (Atom, Top)):
        return True
    if isinstance(f, Not):
        return is_boolean(f.body)
    if isinstance(f, BINARY):
        return is_boolean(f.left) and is_boolean(f.right)
    return False


def atoms(f: Formula) -> set[Atom]:
    if isinstance(f, Atom):
        return {f}
    if isinstance(f, Top):
        return set()
    if isinstance(f, (Not, Box, Diamond, Prob)):
        return atoms(f.body)
    return atoms(f.left) | atoms(f.right)


def subformulas(f: Formula) -> set:
    out = {f}
    if isinstance(f, (Not, Box, Diamond, Prob)):
        out |= subformulas(f.body)
    elif isinstance(f, BINARY):
        out |= subformulas(f.left) | subformulas(f.right)
    return out


def to_primitive(f: Formula) -> Formula:
    """Rewrite into atoms, T, negation, conjunction, [e] and P with <, =, >."""
    if isinstance(f, (Atom, Top)):
        return f
    if isinstance(f, Not):
        return Not(to_primitive(f.body))
    if isinstance(f, Box):
        return Box(f.label, to_primitive(f.body))
    if isinstance(f, Diamond):
        return Not(Box(f.label, Not(to_primitive(f.body))))
    if isinstance(f, Prob):
        body = to_primitive(f.body)
        if f.op in ("<=", ">="):
            strict = Prob(body, f.label, f.op[0], f.bound)
            return _or(strict, Prob(body, f.label, "=", f.bound))
        return Prob(body, f.label, f.op, f.bound)
    left, right = to_primitive(f.left), to_primitive(f.right)
    if isinstance(f, And):
        return And(left, right)
    if isinstance(f, Or):
        return _or(left, right)
    if isinstance(f, Iff):
        return And(Not(And(left, Not(right))), Not(And(right, Not(left))))
    return Not(And(Not(And(left, Not(right))), Not(And(right, Not(left)))))


def _or(a: Formula, b: Formula) -> Formula:
    return Not(And(Not(a), Not(b)))
