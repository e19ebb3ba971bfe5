"""Determinacy, the PR and Hardy descriptions, label-monotonicity axioms,
and the legal sentences that describe empirical models."""
from __future__ import annotations

import operator
from fractions import Fraction
from typing import Iterable

from ..errors import NotLegal, SchemaError
from ..hidden import STAGE
from ..scenarios import EmpiricalModel, MeasurementScenario
from .syntax import (
    And, Atom, Box, Diamond, Formula, Iff, Not, Or, Prob, Sequent, Top, Xor,
    conjoin, disjoin, is_boolean,
)


def det_of(scenario: MeasurementScenario, a: str) -> Formula:
    return disjoin(Box((a,), Atom(a, k)) for k in scenario.outcomes(a))


def det_sentence(scenario: MeasurementScenario) -> Formula:
    """Every measurement has an outcome it is bound to give."""
    return conjoin(det_of(scenario, a) for a in scenario.order)


def _a(name: str, k: str = "0") -> Atom:
    return Atom(name, k)


_PR_CONTEXTS = ("ab", "ab'", "a'b", "a'b'")


def delta_pr(with_stage: bool = False) -> list[Formula]:
    """Conjuncts of the PR description; with ``with_stage`` every conjunct
    is prefixed by [i] (boxes) or <i> (diamonds)."""
    out: list[Formula] = [Diamond((e,), Top()) for e in _PR_CONTEXTS]
    out += [
        Box(("ab",), Iff(_a("a"), _a("b"))),
        Box(("ab'",), Iff(_a("a"), _a("b'"))),
        Box(("a'b",), Iff(_a("a'"), _a("b"))),
        Box(("a'b'",), Xor(_a("a'"), _a("b'"))),
    ]
    if with_stage:
        out = [
            Diamond((STAGE,), f) if isinstance(f, Diamond) else Box((STAGE,), f) for f in out
        ]
    return out


def delta_hardy() -> list[Formula]:
    i = (STAGE,)
    out: list[Formula] = [Diamond(i, Diamond((e,), Top())) for e in _PR_CONTEXTS]
    out += [
        Diamond(i, Diamond(("ab",), And(_a("a"), _a("b")))),
        Box(i, Box(("ab'",), Or(_a("a", "1"), _a("b'", "1")))),
        Box(i, Box(("a'b",), Or(_a("a'", "1"), _a("b", "1")))),
        Box(i, Box(("a'b'",), Or(_a("a'"), _a("b'")))),
    ]
    return out


def lambda_axioms(scenario: MeasurementScenario, formulas: Iterable[Formula]) -> list[Sequent]:
    """[e0]phi |- [e1]phi for every pair of contexts e0 within e1 and every
    supplied phi."""
    ctxs = scenario.all_contexts()
    formulas = list(formulas)
    out = []
    for e0 in ctxs:
        for e1 in ctxs:
            if set(e0) <= set(e1):
                l0, l1 = (scenario.label(e0),), (scenario.label(e1),)
                out += [Sequent([Box(l0, phi)], Box(l1, phi)) for phi in formulas]
    return out


# legal sentences ----------------------------------------------------------


def _legal_parts(f: Formula, scenario: MeasurementScenario):
    """(kind, context, body) for a legal sentence, or None."""
    if isinstance(f, (Box, Diamond)) and f.label == (STAGE,) and type(f.body) is type(f):
        kind, label, body = type(f).__name__.lower(), f.body.label, f.body.body
    elif isinstance(f, Prob) and len(f.label) == 2 and f.label[0] == STAGE:
        kind, label, body = "prob", (f.label[1],), f.body
    else:
        return None
    if len(label) != 1:
        return None
    context = scenario.context_of_label(label[0])
    if context is None or not is_boolean(body):
        return None
    if not _letters_within(body, context, scenario):
        return None
    return kind, context, body


def _letters_within(f: Formula, context, scenario) -> bool:
    if isinstance(f, Atom):
        return f.measurement in context and f.outcome in scenario.outcomes(f.measurement)
    if isinstance(f, Top):
        return True
    if isinstance(f, Not):
        return _letters_within(f.body, context, scenario)
    return _letters_within(f.left, context, scenario) and _letters_within(f.right, context, scenario)


def is_legal(f: Formula, scenario: MeasurementScenario) -> bool:
    return _legal_parts(f, scenario) is not None


def holds_of(f: Formula, context, g: tuple) -> bool:
    """Truth of a Boolean formula at the joint outcome g of ``context``."""
    if isinstance(f, Atom):
        return g[list(context).index(f.measurement)] == f.outcome
    if isinstance(f, Top):
        return True
    if isinstance(f, Not):
        return not holds_of(f.body, context, g)
    l, r = holds_of(f.left, context, g), holds_of(f.right, context, g)
    if isinstance(f, And):
        return l and r
    if isinstance(f, Or):
        return l or r
    if isinstance(f, Iff):
        return l == r
    if isinstance(f, Xor):
        return l != r
    raise TypeError(f"not a Boolean formula: {f!r}")


_COMPARE = {"<": operator.lt, "=": operator.eq, ">": operator.gt}


def describes(f: Formula, E: EmpiricalModel) -> bool:
    """Whether the legal sentence f describes E.

    The table of a non-maximal context is read as the marginal of each
    maximal context containing it: boxes and probabilities must hold for
    all of them, diamonds for some.
    """
    parts = _legal_parts(f, E.scenario)
    if parts is None:
        raise NotLegal(f"not a legal sentence for this scenario: {f!r}")
    kind, context, body = parts
    marginals = [d for _, d in E.support_marginals(context)]
    if kind == "box":
        return all(all(holds_of(body, context, g) for g in d.support) for d in marginals)
    if kind == "diamond":
        return any(any(holds_of(body, context, g) for g in d.support) for d in marginals)
    sr = E.semiring
    if not sr.ordered:
        raise SchemaError(f"probability comparisons need ordered weights, not {sr.name}")
    ops = ["<", "="] if f.op == "<=" else [">", "="] if f.op == ">=" else [f.op]

    def compare(op: str) -> bool:
        return all(
            _COMPARE[op](sr.sum(d[g] for g in d.support if holds_of(body, context, g)), Fraction(f.bound))
            for d in marginals
        )

    return any(compare(op) for op in ops)


def stage_hypotheses(scenario: MeasurementScenario) -> list[Formula]:
    """<i><e>T for every maximal context e."""
    return [Diamond((STAGE,), Diamond((scenario.label(e),), Top())) for e in scenario.contexts]
