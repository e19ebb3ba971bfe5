"""Evaluation of formulas over a StochasticModel.

States are (stage, state) pairs. A label ``(l1, ..., ln)`` is resolved to
the tree of the model's family that has a path with those edge labels (the
initial tree first). At a state s on stage x, the modal clauses quantify
over every path x -> ... -> z of the initial tree whose edges project, in
order, onto a path labelled l1..ln; with no such path they hold vacuously.
"""
from __future__ import annotations

import operator
from fractions import Fraction
from typing import Iterable

from ..errors import SchemaError, UnknownLabel, UnknownLetter
from ..presheaves import StochasticModel, eval_path
from .syntax import (
    And, Atom, Box, Diamond, Formula, Iff, Not, Or, Prob, Sequent, Top, Xor,
)

_COMPARE = {"<": operator.lt, "=": operator.eq, ">": operator.gt}


def _has_label_path(tree, label: tuple) -> bool:
    frontier = set(tree.nodes)
    for step in label:
        frontier = {c for n in frontier for c in tree.children(n) if tree.label[c] == step}
        if not frontier:
            return False
    return True


class Evaluator:
    """Computes extensions over one model, caching them per formula.

    ``vacuous`` collects (formula, state) pairs where a modal clause held
    only because no path matched its label.
    """

    def __init__(self, model: StochasticModel):
        self.model = model
        self.system = model.system
        self.states = model.states()
        self._cache: dict = {}
        self._paths: dict = {}
        self._composites: dict = {}
        self.vacuous: set = set()

    # label resolution ------------------------------------------------------

    def resolve(self, label: tuple) -> str:
        """Name of the tree in which ``label`` is read."""
        M = self.model
        if _has_label_path(M.trees[M.initial], label):
            return M.initial
        hits = [name for name in sorted(M.trees) if _has_label_path(M.trees[name], label)]
        if not hits:
            raise UnknownLabel(f"no tree has a path labelled {'.'.join(reversed(label))!r}")
        if len(hits) > 1:
            raise UnknownLabel(f"label {'.'.join(reversed(label))!r} is ambiguous: {hits}")
        return hits[0]

    def matching_paths(self, stage, label: tuple) -> list:
        """End stages of the initial-tree paths from ``stage`` projecting onto ``label``."""
        key = (stage, label)
        if key not in self._paths:
            proj = self.model.projections[self.resolve(label)]
            L0, m, target = proj.source, proj.node_map, proj.target
            frontier = [stage]
            for step in label:
                nxt = []
                for x in frontier:
                    for c in L0.children(x):
                        if x in m and c in m and target.label[m[c]] == step:
                            nxt.append(c)
                frontier = nxt
            self._paths[key] = sorted(frontier, key=repr)
        return self._paths[key]

    def composite(self, x, z):
        if (x, z) not in self._composites:
            self._composites[(x, z)] = eval_path(self.system, x, z)
        return self._composites[(x, z)]

    # extension -------------------------------------------------------------

    def extension(self, f: Formula) -> frozenset:
        if f not in self._cache:
            self._cache[f] = frozenset(self._compute(f))
        return self._cache[f]

    def holds(self, f: Formula, state) -> bool:
        return state in self.extension(f)

    def _compute(self, f: Formula) -> Iterable:
        if isinstance(f, Atom):
            try:
                return self.model.valuation[f.letter]
            except KeyError:
                raise UnknownLetter(f"letter {f.letter!r} has no valuation") from None
        if isinstance(f, Top):
            return self.states
        if isinstance(f, Not):
            return self.states - self.extension(f.body)
        if isinstance(f, And):
            return self.extension(f.left) & self.extension(f.right)
        if isinstance(f, Or):
            return self.extension(f.left) | self.extension(f.right)
        if isinstance(f, Iff):
            l, r = self.extension(f.left), self.extension(f.right)
            return self.states - (l ^ r)
        if isinstance(f, Xor):
            return self.extension(f.left) ^ self.extension(f.right)
        if isinstance(f, Diamond):
            return self.states - self.extension(Box(f.label, Not(f.body)))
        if isinstance(f, Box):
            body = self.extension(f.body)
            return {
                st for st in self.states
                if self._forall(f, st, lambda z, d: all((z, t) in body for t in d.support))
            }
        if isinstance(f, Prob):
            return self._probability(f)
        raise TypeError(f"not a formula: {f!r}")

    def _forall(self, f, st, test) -> bool:
        stage, s = st
        ends = self.matching_paths(stage, f.label)
        if not ends:
            self.vacuous.add((f, st))
            return True
        for z in ends:
            if not test(z, self.composite(stage, z).weights[s]):
                return False
        return True

    def _probability(self, f: Prob) -> set:
        if f.op in ("<=", ">="):
            strict = Prob(f.body, f.label, f.op[0], f.bound)
            return self.extension(strict) | self.extension(Prob(f.body, f.label, "=", f.bound))
        sr = self.model.semiring
        if not sr.ordered:
            raise SchemaError(f"probability comparisons need ordered weights, not {sr.name}")
        body = self.extension(f.body)
        cmp = _COMPARE[f.op]
        bound = Fraction(f.bound)

        def test(z, d):
            mass = sr.sum(d[t] for t in d.carrier if (z, t) in body)
            return cmp(mass, bound)

        return {st for st in self.states if self._forall(f, st, test)}


def extension(M: StochasticModel, f: Formula) -> frozenset:
    return Evaluator(M).extension(f)


def check_sequent(M: StochasticModel, state, seq: Sequent, evaluator: Evaluator | None = None) -> bool:
    ev = evaluator or Evaluator(M)
    if all(ev.holds(a, state) for a in seq.antecedents):
        return ev.holds(seq.consequent, state)
    return True


def counterexamples(M: StochasticModel, seq: Sequent, evaluator: Evaluator | None = None) -> list:
    """States where every antecedent holds but the consequent fails."""
    ev = evaluator or Evaluator(M)
    ante = frozenset(ev.states)
    for a in seq.antecedents:
        ante &= ev.extension(a)
    return sorted(ante - ev.extension(seq.consequent), key=repr)


def validates(M: StochasticModel, seq: Sequent, evaluator: Evaluator | None = None) -> bool:
    return not counterexamples(M, seq, evaluator)
