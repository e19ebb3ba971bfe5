"""Dynamic logic over weighted transition models."""
from .parser import parse_formula, print_formula
from .semantics import Evaluator, check_sequent, extension, validates
from .syntax import (
    And, Atom, Box, Diamond, Formula, Iff, Not, Or, Prob, Sequent, Top, Xor, to_primitive,
)

__all__ = [
    "And", "Atom", "Box", "Diamond", "Evaluator", "Formula", "Iff", "Not", "Or", "Prob",
    "Sequent", "Top", "Xor", "check_sequent", "extension", "parse_formula", "print_formula",
    "to_primitive", "validates",
]
