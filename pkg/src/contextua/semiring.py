"""Commutative semirings and normalized finite-support distributions.

Three instances are provided: ``BOOL`` (possibilistic weights),
``NONNEG`` (exact non-negative rationals, i.e. probabilities) and
``RATIONAL`` (exact signed rationals). Floats are rejected everywhere.
"""
from __future__ import annotations

import operator
from dataclasses import dataclass
from fractions import Fraction
from functools import reduce
from types import MappingProxyType
from typing import Any, Callable, Hashable, Mapping

from .errors import (
    EmptySupport,
    NotNormalizable,
    NotNormalized,
    UndefinedKernel,
    ZeroTotal,
)


def parse_rational(value) -> Fraction:
    """Exact rational from an int, Fraction or a "p/q" / "n" string."""
    if isinstance(value, bool):
        raise TypeError("booleans are not rationals")
    if isinstance(value, (int, Fraction)):
        return Fraction(value)
    if isinstance(value, str):
        text = value.strip()
        if "." in text or "e" in text.lower():
            raise ValueError(f"not an exact rational literal: {value!r}")
        return Fraction(text)
    raise TypeError(f"cannot read {value!r} as an exact rational")


def format_rational(value: Fraction) -> str:
    return str(Fraction(value))


def _coerce_bool(value) -> bool:
    if isinstance(value, bool):
        return value
    if isinstance(value, str) and value.strip().lower() in ("true", "false"):
        return value.strip().lower() == "true"
    if isinstance(value, (int, Fraction)) and value in (0, 1):
        return bool(value)
    raise TypeError(f"not a boolean weight: {value!r}")


def _coerce_nonneg(value) -> Fraction:
    q = parse_rational(value)
    if q < 0:
        raise ValueError(f"negative weight {q} in the non-negative rationals")
    return q


@dataclass(frozen=True)
class Semiring:
    """A commutative semiring with decidable equality.

    ``divide(r, c)`` returns some ``r'`` with ``r' * c == r``; it is only
    present on normalizable instances.
    """

    name: str
    zero: Any
    one: Any
    add: Callable[[Any, Any], Any]
    mul: Callable[[Any, Any], Any]
    coerce: Callable[[Any], Any]
    divide: Callable[[Any, Any], Any] | None = None
    ordered: bool = False

    def __repr__(self):
        return f"Semiring({self.name})"

    @property
    def normalizable(self) -> bool:
        return self.divide is not None

    def eq(self, a, b) -> bool:
        return a == b

    def is_zero(self, a) -> bool:
        return a == self.zero

    def sum(self, values) -> Any:
        return reduce(self.add, values, self.zero)

    def product(self, values) -> Any:
        return reduce(self.mul, values, self.one)

    def format(self, value) -> str:
        if self.name == "bool":
            return "true" if value else "false"
        return format_rational(value)


BOOL = Semiring(
    "bool", False, True, operator.or_, operator.and_, _coerce_bool,
    divide=lambda r, c: r,
)
NONNEG = Semiring(
    "nonneg-rational", Fraction(0), Fraction(1), operator.add, operator.mul,
    _coerce_nonneg, divide=lambda r, c: r / c, ordered=True,
)
RATIONAL = Semiring(
    "rational", Fraction(0), Fraction(1), operator.add, operator.mul,
    parse_rational, divide=lambda r, c: r / c, ordered=True,
)

SEMIRINGS = {s.name: s for s in (BOOL, NONNEG, RATIONAL)}


def get_semiring(name: str) -> Semiring:
    try:
        return SEMIRINGS[name]
    except KeyError:
        raise ValueError(
            f"unknown semiring {name!r}; expected one of {sorted(SEMIRINGS)}"
        ) from None


class Distribution:
    """A normalized finite-support distribution over a semiring.

    The carrier may contain zero-weight points; equality and hashing only
    look at the semiring and the nonzero part (the distribution as a
    function).
    """

    __slots__ = ("semiring", "_weights", "_support")

    def __init__(self, semiring: Semiring, weights: Mapping[Hashable, Any]):
        ws = {x: semiring.coerce(w) for x, w in weights.items()}
        support = frozenset(x for x, w in ws.items() if not semiring.is_zero(w))
        if not support:
            raise EmptySupport("distribution has no nonzero weight")
        total = semiring.sum(ws[x] for x in support)
        if not semiring.eq(total, semiring.one):
            raise NotNormalized(f"weights sum to {total!r}, not {semiring.one!r}")
        self.semiring = semiring
        self._weights = MappingProxyType(ws)
        self._support = support

    @property
    def weights(self) -> Mapping[Hashable, Any]:
        return self._weights

    @property
    def carrier(self) -> frozenset:
        return frozenset(self._weights)

    @property
    def support(self) -> frozenset:
        return self._support

    def __getitem__(self, x):
        return self._weights.get(x, self.semiring.zero)

    def items(self):
        """(point, weight) pairs of the support."""
        return ((x, self._weights[x]) for x in self._support)

    def _key(self):
        return self.semiring.name, frozenset(self.items())

    def __eq__(self, other):
        if not isinstance(other, Distribution):
            return NotImplemented
        return self._key() == other._key()

    def __hash__(self):
        return hash(self._key())

    def __repr__(self):
        body = ", ".join(
            f"{x!r}: {self.semiring.format(w)}"
            for x, w in sorted(self.items(), key=lambda p: repr(p[0]))
        )
        return f"Distribution({{{body}}})"

    def mass(self, points) -> Any:
        """Semiring sum of the weights of ``points`` (missing points weigh zero)."""
        return self.semiring.sum(self[x] for x in points if x in self._support)

    def pushforward(self, f: Callable) -> "Distribution":
        out: dict = {}
        sr = self.semiring
        for x, w in self.items():
            y = f(x)
            out[y] = sr.add(out.get(y, sr.zero), w)
        return Distribution(sr, out)


def dist_make(semiring: Semiring, weights: Mapping[Hashable, Any]) -> Distribution:
    return Distribution(semiring, weights)


def dist_normalize(semiring: Semiring, family: Mapping[Hashable, Any]) -> Distribution:
    """Rescale a nonzero-total weight family so that it sums to one."""
    if not semiring.normalizable:
        raise NotNormalizable(f"{semiring.name} has no normalization")
    family = {x: semiring.coerce(r) for x, r in family.items()}
    total = semiring.sum(family.values())
    if semiring.is_zero(total):
        raise ZeroTotal("cannot normalize a family whose total is zero")
    # zero entries stay zero (r' = 0 satisfies r' * c = 0)
    scaled = {
        x: semiring.zero if semiring.is_zero(r) else semiring.divide(r, total)
        for x, r in family.items()
    }
    return Distribution(semiring, scaled)


def dist_unit(semiring: Semiring, x: Hashable) -> Distribution:
    return Distribution(semiring, {x: semiring.one})


def dist_bind(d: Distribution, kernel: Callable[[Hashable], Distribution] | Mapping) -> Distribution:
    """Kleisli extension: weight of u is the sum over t of d(t) * k(t)(u)."""
    sr = d.semiring
    lookup = kernel.__getitem__ if isinstance(kernel, Mapping) else kernel
    out: dict = {}
    for t, w in d.items():
        try:
            kt = lookup(t)
        except (KeyError, IndexError):
            raise UndefinedKernel(f"kernel undefined at support point {t!r}") from None
        if kt is None:
            raise UndefinedKernel(f"kernel undefined at support point {t!r}")
        for u, v in kt.weights.items():
            out[u] = sr.add(out.get(u, sr.zero), sr.mul(w, v))
    return Distribution(sr, out)


def to_rational(semiring: Semiring, value) -> Fraction:
    """Numeric value of a weight, for probability comparisons."""
    if not semiring.ordered:
        raise TypeError(f"weights of {semiring.name} have no numeric value")
    return Fraction(value)
