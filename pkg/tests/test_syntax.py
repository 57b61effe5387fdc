import random

import pytest
from hypothesis import given, settings

from helpers import jformulas, modal_formulas, rand_jformula
from justlab.errors import FormulaSyntaxError
from justlab.syntax import (
    BOT,
    And,
    App,
    Atom,
    Box,
    BoxVar,
    Imp,
    Just,
    Or,
    Var,
    annotate,
    from_json,
    node_count,
    parse_formula,
    parse_jformula,
    parse_modal,
    parse_term,
    print_formula,
    project,
    star_translate,
    star_untranslate,
    subformulas,
    to_json,
    uniquely_annotated,
)

P1, P2, P3 = Atom(1), Atom(2), Atom(3)
X1, X2 = Var(1), Var(2)


@pytest.mark.parametrize(
    "text, ast",
    [
        ("x1:(p1 -> p2)", Just(X1, Imp(P1, P2))),
        ("p1 -> p2 -> p1", Imp(P1, Imp(P2, P1))),
        ("(x1 . x2):p2", Just(App(X1, X2), P2)),
        ("~p1 & p2", And(Imp(P1, BOT), P2)),
        ("p1 | p2 & p3", Or(P1, And(P2, P3))),
    ],
)
def test_parse_examples(text, ast):
    assert parse_jformula(text) == ast


@pytest.mark.parametrize(
    "ast, text",
    [
        (Just(X1, P1), "x1:p1"),
        (Imp(P1, BOT), "~p1"),
        (And(P1, Or(P2, P3)), "p1 & (p2 | p3)"),
    ],
)
def test_print_examples(ast, text):
    assert print_formula(ast) == text


def test_whitespace_insensitive():
    assert parse_formula("x1:(p1->p2)") == parse_formula("  x1 : ( p1  ->  p2 ) ")


@pytest.mark.parametrize("text", ["p1 & & p2", "p1 ->", "x1:", "(p1", "p1 p2", "q1"])
def test_syntax_error_has_offset(text):
    with pytest.raises(FormulaSyntaxError) as e:
        parse_formula(text)
    assert 0 <= e.value.offset <= len(text.encode())


def test_language_restriction():
    with pytest.raises(FormulaSyntaxError):
        parse_jformula("#p1")
    with pytest.raises(FormulaSyntaxError):
        parse_modal("x1:p1")


@pytest.mark.parametrize(
    "src, out",
    [
        ("#(p1->p2) -> (#p1 -> #p2)", "#1(p1->p2) -> (#2 p1 -> #3 p2)"),
        ("#p1 -> #p1", "#1 p1 -> #2 p1"),
        ("p1", "p1"),
    ],
)
def test_annotate_examples(src, out):
    assert annotate(parse_modal(src)) == parse_formula(out)


def test_project_examples():
    assert project(parse_formula("#1 p1 -> #2 p1")) == parse_modal("#p1 -> #p1")
    assert project(parse_formula("p1 & p2")) == parse_formula("p1 & p2")


def test_star_examples():
    assert star_translate(parse_jformula("x1:p1")) == BoxVar(P1, X1)
    assert star_translate(parse_jformula("p1 -> p2")) == Imp(P1, P2)
    assert star_translate(parse_jformula("x1:x1:p1")) == BoxVar(Just(X1, P1), X1)
    assert star_untranslate(BoxVar(P1, X1)) == Just(X1, P1)
    assert star_untranslate(Atom(3)) == Atom(3)


def test_subformula_examples():
    assert subformulas(parse_jformula("x1:p1 -> p1")) == {
        parse_jformula("x1:p1 -> p1"),
        Just(X1, P1),
        P1,
    }
    assert subformulas(BOT) == {BOT}


def test_term_parse():
    assert parse_term("!(x1 + c2)") == parse_formula("!(x1 + c2):p1").term


@settings(max_examples=300, deadline=None)
@given(jformulas)
def test_roundtrip_j(phi):
    assert parse_formula(print_formula(phi)) == phi
    assert from_json(to_json(phi)) == phi


@settings(max_examples=200, deadline=None)
@given(modal_formulas)
def test_annotate_invariants(phi):
    a = annotate(phi)
    assert uniquely_annotated(a)
    assert project(a) == phi
    assert parse_formula(print_formula(a)) == a
    assert parse_formula(print_formula(phi)) == phi


@settings(max_examples=300, deadline=None)
@given(jformulas)
def test_star_roundtrip(phi):
    s = star_translate(phi)
    assert star_untranslate(s) == phi
    assert star_translate(star_untranslate(s)) == s
    assert parse_formula(print_formula(s), "star") == s
    assert from_json(to_json(s)) == s


def _commutes(phi, s):
    if isinstance(phi, Just):
        return s == BoxVar(phi.body, phi.term)
    if isinstance(phi, (And, Or, Imp)):
        return type(s) is type(phi) and _commutes(phi.left, s.left) and _commutes(phi.right, s.right)
    return s == phi


def test_star_commutes_nodewise():
    rng = random.Random(3)
    for _ in range(300):
        phi = rand_jformula(rng, 4)
        assert _commutes(phi, star_translate(phi))


@settings(max_examples=200, deadline=None)
@given(jformulas)
def test_subformula_bound(phi):
    subs = subformulas(phi)
    assert phi in subs
    assert len(subs) <= node_count(phi)


def test_box_indices_must_be_unique():
    assert not uniquely_annotated(Imp(Box(P1, 1), Box(P1, 1)))
