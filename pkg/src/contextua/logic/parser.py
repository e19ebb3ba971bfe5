"""Recursive-descent parser and printer for the ASCII formula syntax.

Grammar, loosest binding first (binary operators associate to the left)::

    formula := level1
    level1  := level2 (("<->" | "(+)") level2)*
    level2  := level3 ("|" level3)*
    level3  := unary ("&" unary)*
    unary   := "!" unary | "[" label "]" unary | "<" label ">" unary | atom
    atom    := "T" | name "=" outcome | "(" formula ")"
             | "P" "(" formula "|" label ")" cmp rational
    label   := name (("." | "∘") name)*      written last step first

Inside ``P(...)`` a ``|`` followed by a label and the closing parenthesis
separates the label; any other ``|`` is a disjunction.
"""
from __future__ import annotations

import re
from fractions import Fraction

from ..errors import FormulaSyntaxError
from .syntax import And, Atom, Box, Diamond, Formula, Iff, Not, Or, Prob, Top, Xor

_UNICODE = {"¬": "!", "∧": "&", "∨": "|", "↔": "<->", "⊕": "(+)", "⊤": "T", "∘": ".",
            "⟨": "<", "⟩": ">"}

_TOKEN = re.compile(
    r"\s*(?:(?P<sym><->|\(\+\)|<=|>=|[()\[\]<>=&|!./-])|(?P<name>[A-Za-z0-9_][A-Za-z0-9_']*)|(?P<bad>\S))"
)


def _normalize(text: str) -> tuple[str, list[int]]:
    """ASCII form of ``text`` and, per ASCII character, its original offset."""
    chars, origin = [], []
    for i, ch in enumerate(text):
        rep = _UNICODE.get(ch, ch)
        chars.append(rep)
        origin += [i] * len(rep)
    origin.append(len(text))
    return "".join(chars), origin


def _tokenize(raw: str) -> list[tuple[str, str, int]]:
    text, origin = _normalize(raw)
    out = []
    pos = 0
    while True:
        m = _TOKEN.match(text, pos)
        if m is None:
            break
        start = m.start(m.lastgroup)
        if m.lastgroup == "bad":
            raise FormulaSyntaxError(f"unexpected character {m.group('bad')!r}", origin[start])
        kind = "sym" if m.lastgroup == "sym" else "name"
        out.append((kind, m.group(m.lastgroup), origin[start]))
        pos = m.end()
    out.append(("end", "", len(raw)))
    return out


PREC = {Iff: 1, Xor: 1, Or: 2, And: 3}
_BINARY_SYMBOLS = {1: {"<->": Iff, "(+)": Xor}, 2: {"|": Or}, 3: {"&": And}}


class _Parser:
    def __init__(self, text: str):
        self.tokens = _tokenize(text)
        self.i = 0

    def peek(self, k: int = 0):
        return self.tokens[min(self.i + k, len(self.tokens) - 1)]

    def next(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect(self, value: str):
        kind, v, pos = self.next()
        if v != value or kind == "end":
            raise FormulaSyntaxError(f"expected {value!r}, found {v or 'end of input'!r}", pos)

    def name(self, what: str) -> str:
        kind, v, pos = self.next()
        if kind != "name":
            raise FormulaSyntaxError(f"expected {what}, found {v or 'end of input'!r}", pos)
        return v

    def parse(self) -> Formula:
        f = self.binary(1, False)
        kind, v, pos = self.peek()
        if kind != "end":
            raise FormulaSyntaxError(f"unexpected {v!r}", pos)
        return f

    def binary(self, level: int, in_prob: bool) -> Formula:
        if level == 4:
            return self.unary(in_prob)
        left = self.binary(level + 1, in_prob)
        while True:
            kind, v, _ = self.peek()
            ctor = _BINARY_SYMBOLS[level].get(v) if kind == "sym" else None
            if ctor is None or (v == "|" and in_prob and self._label_follows()):
                return left
            self.next()
            left = ctor(left, self.binary(level + 1, in_prob))

    def _label_follows(self) -> bool:
        k = 1
        if self.peek(k)[0] != "name":
            return False
        k += 1
        while self.peek(k)[1] == "." and self.peek(k + 1)[0] == "name":
            k += 2
        return self.peek(k)[1] == ")"

    def label(self) -> tuple:
        steps = [self.name("a label")]
        while self.peek()[1] == ".":
            self.next()
            steps.append(self.name("a label"))
        return tuple(reversed(steps))

    def unary(self, in_prob: bool) -> Formula:
        kind, v, pos = self.peek()
        if v == "!":
            self.next()
            return Not(self.unary(in_prob))
        if v == "[":
            self.next()
            lbl = self.label()
            self.expect("]")
            return Box(lbl, self.unary(in_prob))
        if v == "<":
            self.next()
            lbl = self.label()
            self.expect(">")
            return Diamond(lbl, self.unary(in_prob))
        return self.atom()

    def atom(self) -> Formula:
        kind, v, pos = self.next()
        if v == "(" and kind == "sym":
            f = self.binary(1, False)
            self.expect(")")
            return f
        if kind != "name":
            raise FormulaSyntaxError(f"expected a formula, found {v or 'end of input'!r}", pos)
        nxt = self.peek()[1]
        if v == "P" and nxt == "(":
            return self.probability()
        if nxt == "=":
            self.next()
            return Atom(v, self.name("an outcome"))
        if v == "T":
            return Top()
        raise FormulaSyntaxError(f"expected a letter 'measurement=outcome' at {v!r}", pos)

    def probability(self) -> Formula:
        self.expect("(")
        body = self.binary(1, True)
        self.expect("|")
        lbl = self.label()
        self.expect(")")
        kind, op, pos = self.next()
        if op not in ("<", "=", ">", "<=", ">="):
            raise FormulaSyntaxError(f"expected a comparison, found {op or 'end of input'!r}", pos)
        return Prob(body, lbl, op, self.rational())

    def rational(self) -> Fraction:
        sign = 1
        if self.peek()[1] == "-":
            self.next()
            sign = -1
        kind, num, pos = self.next()
        if kind != "name" or not num.isdigit():
            raise FormulaSyntaxError(f"expected a rational, found {num or 'end of input'!r}", pos)
        den = "1"
        if self.peek()[1] == "/":
            self.next()
            kind, den, pos = self.next()
            if kind != "name" or not den.isdigit() or int(den) == 0:
                raise FormulaSyntaxError(f"bad denominator {den!r}", pos)
        return sign * Fraction(int(num), int(den))


def parse_formula(text: str) -> Formula:
    return _Parser(text).parse()


def print_label(label: tuple) -> str:
    return ".".join(reversed(label))


def _prec(f: Formula) -> int:
    if isinstance(f, (Not, Box, Diamond)):
        return 4
    return PREC.get(type(f), 5)


def _wrap(f: Formula, minimum: int) -> str:
    s = print_formula(f)
    return f"({s})" if _prec(f) < minimum else s


_SYMBOL = {And: "&", Or: "|", Iff: "<->", Xor: "(+)"}


def print_formula(f: Formula) -> str:
    if isinstance(f, Atom):
        return f.letter
    if isinstance(f, Top):
        return "T"
    if isinstance(f, Not):
        return "!" + _wrap(f.body, 4)
    if isinstance(f, Box):
        return f"[{print_label(f.label)}]" + _wrap(f.body, 4)
    if isinstance(f, Diamond):
        return f"<{print_label(f.label)}>" + _wrap(f.body, 4)
    if isinstance(f, Prob):
        q = f.bound
        r = str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"
        return f"P({_wrap(f.body, 3)} | {print_label(f.label)}) {f.op} {r}"
    p = PREC[type(f)]
    return f"{_wrap(f.left, p)} {_SYMBOL[type(f)]} {_wrap(f.right, p + 1)}"
