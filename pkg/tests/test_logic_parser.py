from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from contextua.errors import FormulaSyntaxError
from contextua.logic.parser import parse_formula, print_formula
from contextua.logic.sentences import delta_hardy, delta_pr
from contextua.logic.syntax import (
    COMPARISONS, And, Atom, Box, Diamond, Iff, Not, Or, Prob, Top, Xor, conjuncts, to_primitive,
)

F = Fraction

PR_TEXT = (
    "<ab>T & <ab'>T & <a'b>T & <a'b'>T & [ab](a=0 <-> b=0) & [ab'](a=0 <-> b'=0)"
    " & [a'b](a'=0 <-> b=0) & [a'b'](a'=0 (+) b'=0)"
)
HARDY_TEXT = (
    "<i><ab>T & <i><ab'>T & <i><a'b>T & <i><a'b'>T & <i><ab>(a=0 & b=0)"
    " & [i][ab'](a=1 | b'=1) & [i][a'b](a'=1 | b=1) & [i][a'b'](a'=0 | b'=0)"
)
PR_UNICODE = (
    "⟨ab⟩⊤ ∧ ⟨ab'⟩⊤ ∧ ⟨a'b⟩⊤ ∧ ⟨a'b'⟩⊤ ∧ [ab](a = 0 ↔ b = 0) ∧ [ab'](a = 0 ↔ b' = 0)"
    " ∧ [a'b](a' = 0 ↔ b = 0) ∧ [a'b'](a' = 0 ⊕ b' = 0)"
)
HARDY_UNICODE = (
    "⟨i⟩⟨ab⟩⊤ ∧ ⟨i⟩⟨ab'⟩⊤ ∧ ⟨i⟩⟨a'b⟩⊤ ∧ ⟨i⟩⟨a'b'⟩⊤ ∧ ⟨i⟩⟨ab⟩(a = 0 ∧ b = 0)"
    " ∧ [i][ab'](a = 1 ∨ b' = 1) ∧ [i][a'b](a' = 1 ∨ b = 1) ∧ [i][a'b'](a' = 0 ∨ b' = 0)"
)

# strategies ------------------------------------------------------------------

measurements = st.sampled_from(["a", "a'", "b", "b'", "x_1"])
outcomes = st.sampled_from(["0", "1", "2"])
labels = st.lists(st.sampled_from(["ab", "a'b'", "i", "e"]), min_size=1, max_size=2).map(tuple)
bounds = st.builds(Fraction, st.integers(-5, 5), st.integers(1, 6))
leaves = st.one_of(st.builds(Atom, measurements, outcomes), st.just(Top()))


def _extend(children):
    binary = [st.builds(c, children, children) for c in (And, Or, Iff, Xor)]
    return st.one_of(
        st.builds(Not, children),
        st.builds(Box, labels, children),
        st.builds(Diamond, labels, children),
        st.builds(Prob, children, labels, st.sampled_from(COMPARISONS), bounds),
        *binary,
    )


formulas = st.recursive(leaves, _extend, max_leaves=12)


@settings(max_examples=200, deadline=None)
@given(formulas)
def test_parse_print_round_trip(f):
    assert parse_formula(print_formula(f)) == f


@settings(max_examples=100, deadline=None)
@given(formulas)
def test_print_is_stable(f):
    text = print_formula(f)
    assert print_formula(parse_formula(text)) == text


# examples ----------------------------------------------------------------------


def test_box_example():
    f = parse_formula("[ab](a=0 <-> b=0)")
    assert f == Box(("ab",), Iff(Atom("a", "0"), Atom("b", "0")))


def test_nested_diamond_normal_form():
    f = parse_formula("<i><ab>(a=0 & b=0)")
    body = And(Atom("a", "0"), Atom("b", "0"))
    assert f == Diamond(("i",), Diamond(("ab",), body))
    assert to_primitive(f) == Not(Box(("i",), Not(Not(Box(("ab",), Not(body))))))


def test_probability_example():
    f = parse_formula("P(a=0 | ab) = 1/2")
    assert f == Prob(Atom("a", "0"), ("ab",), "=", F(1, 2))
    assert isinstance(f.bound, Fraction)


def test_label_paths_read_last_step_first():
    dotted = parse_formula("P(a=0 & b=0 | ab.i) = 1/2")
    circ = parse_formula("P(a=0 ∧ b=0 | ab∘i) = 1/2")
    assert dotted == circ
    assert dotted.label == ("i", "ab")
    assert print_formula(dotted) == "P(a=0 & b=0 | ab.i) = 1/2"
    assert parse_formula("[ab.i]T") == Box(("i", "ab"), Top())


def test_disjunction_inside_probability():
    f = parse_formula("P(a=0 | b=1 | ab) > 1/3")
    assert f == Prob(Or(Atom("a", "0"), Atom("b", "1")), ("ab",), ">", F(1, 3))


def test_comparisons_and_negative_bounds():
    for op in COMPARISONS:
        f = parse_formula(f"P(T | e) {op} -2/4")
        assert f.op == op and f.bound == F(-1, 2)
    assert parse_formula("P(T | e) >= 3").bound == 3


def test_precedence():
    a, b, c = Atom("a", "0"), Atom("b", "0"), Atom("c", "0")
    assert parse_formula("a=0 | b=0 & c=0") == Or(a, And(b, c))
    assert parse_formula("a=0 <-> b=0 | c=0") == Iff(a, Or(b, c))
    assert parse_formula("!a=0 & b=0") == And(Not(a), b)
    assert parse_formula("[e]a=0 & b=0") == And(Box(("e",), a), b)
    assert parse_formula("a=0 & b=0 & c=0") == And(And(a, b), c)
    assert parse_formula("a=0 (+) b=0 <-> c=0") == Iff(Xor(a, b), c)


def test_verbatim_pr_description():
    assert conjuncts(parse_formula(PR_TEXT)) == delta_pr()
    assert conjuncts(parse_formula(PR_UNICODE)) == delta_pr()


def test_verbatim_hardy_description():
    assert conjuncts(parse_formula(HARDY_TEXT)) == delta_hardy()
    assert conjuncts(parse_formula(HARDY_UNICODE)) == delta_hardy()


def test_builder_conjuncts_match_displays():
    assert delta_pr()[-1] == Box(("a'b'",), Xor(Atom("a'", "0"), Atom("b'", "0")))
    assert delta_hardy()[-1] == Box(("i",), Box(("a'b'",), Or(Atom("a'", "0"), Atom("b'", "0"))))


@pytest.mark.parametrize(
    "text, pos",
    [
        ("a=0 &", 5),
        ("[ab a=0", 4),
        ("a=0 # b=0", 4),
        ("P(a=0 | ab) ~ 1", 12),
        ("P(a=0 | ab) = 1/0", 16),
        ("(a=0", 4),
        ("a=0 b=0", 4),
        ("a", 0),
    ],
)
def test_syntax_errors_carry_positions(text, pos):
    with pytest.raises(FormulaSyntaxError) as info:
        parse_formula(text)
    assert info.value.position == pos


def test_unicode_error_positions_refer_to_input():
    with pytest.raises(FormulaSyntaxError) as info:
        parse_formula("a=0 ↔ ¬ # b=0")
    assert info.value.position == 8
    with pytest.raises(FormulaSyntaxError) as info:
        parse_formula("a=0 ∧")
    assert info.value.position == 5
