import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from helpers import jformulas, rand_modal, rand_quasi, rand_term, terms
from justlab.errors import AnnotationError
from justlab.realization import T, SignedFormula, real_member
from justlab.syntax import (
    BOT,
    And,
    App,
    Atom,
    Bang,
    Box,
    Const,
    Imp,
    Just,
    Or,
    Sum,
    Var,
    annotate,
    box_indices,
    parse_formula,
    parse_jformula,
    parse_term,
)
from justlab.substitution import (
    JustSubstitution,
    PropSubstitution,
    apply_just,
    apply_prop,
    compose,
    jvar,
    lives_away,
    lives_on,
    meets_no_new_variables,
)

X1, X2, C1 = Var(1), Var(2), Const(1)


def test_apply_prop_examples():
    s = PropSubstitution({1: parse_jformula("x1:p2")})
    assert apply_prop(s, parse_jformula("p1 & p1")) == parse_jformula("x1:p2 & x1:p2")
    phi = parse_jformula("x2:p1 -> p3")
    assert apply_prop(PropSubstitution(), phi) == phi
    assert apply_prop(PropSubstitution({1: BOT}), parse_jformula("p1 -> p1")) == Imp(BOT, BOT)


def test_apply_just_examples():
    s = JustSubstitution({1: App(X1, X2)})
    assert apply_just(s, parse_jformula("x1:p1")) == parse_jformula("(x1 . x2):p1")
    assert apply_just(JustSubstitution({1: C1}), parse_term("!x1")) == parse_term("!c1")


@given(jformulas)
def test_empty_substitutions_are_identity(phi):
    assert apply_just(JustSubstitution(), phi) == phi
    assert apply_prop(PropSubstitution(), phi) == phi


def test_compose_examples():
    s = compose(JustSubstitution({1: X2}), JustSubstitution({2: C1}))
    assert s == JustSubstitution({1: C1, 2: C1})
    sig = JustSubstitution({1: App(C1, X1)})
    assert compose(sig, JustSubstitution()) == sig


sub_strategy = st.dictionaries(st.integers(1, 4), terms, max_size=3).map(JustSubstitution)


@settings(max_examples=200, deadline=None)
@given(sub_strategy, sub_strategy, terms)
def test_compose_is_sequential_application(a, b, t):
    assert apply_just(compose(a, b), t) == apply_just(b, apply_just(a, t))


@settings(max_examples=200, deadline=None)
@given(sub_strategy, jformulas)
def test_apply_just_is_homomorphic(s, phi):
    out = apply_just(s, phi)
    if isinstance(phi, Just):
        assert out == Just(apply_just(s, phi.term), apply_just(s, phi.body))
    elif isinstance(phi, (And, Or, Imp)):
        assert out == type(phi)(apply_just(s, phi.left), apply_just(s, phi.right))
    else:
        assert out == phi


@settings(max_examples=200, deadline=None)
@given(sub_strategy, terms, terms)
def test_term_extension(s, t, u):
    assert apply_just(s, App(t, u)) == App(apply_just(s, t), apply_just(s, u))
    assert apply_just(s, Sum(t, u)) == Sum(apply_just(s, t), apply_just(s, u))
    assert apply_just(s, Bang(t)) == Bang(apply_just(s, t))


def test_domain_drops_identity_keys():
    s = JustSubstitution({1: X1, 2: C1})
    assert s.domain == {2}
    assert JustSubstitution.from_json(s.to_json()) == s


@pytest.mark.parametrize(
    "mapping, expected",
    [({1: Bang(X1)}, True), ({1: App(C1, X1)}, True), ({1: X2}, False), ({3: Sum(X1, C1)}, False)],
)
def test_no_new_variables(mapping, expected):
    assert meets_no_new_variables(JustSubstitution(mapping)) is expected


def test_lives_examples():
    phi = annotate(parse_formula("#p1"))
    on, away = JustSubstitution({1: C1}), JustSubstitution({2: C1})
    assert lives_on(on, phi) and not lives_away(on, phi)
    assert not lives_on(away, phi) and lives_away(away, phi)
    assert lives_on(JustSubstitution(), phi) and lives_away(JustSubstitution(), phi)


def test_lives_requires_unique_annotation():
    bad = Imp(Box(Atom(1), 1), Box(Atom(1), 1))
    with pytest.raises(AnnotationError):
        lives_on(JustSubstitution(), bad)


def test_jvar_examples():
    assert jvar(parse_term("(x1 + c2)")) == {1}
    assert jvar(parse_jformula("x1:x2:p1")) == {1, 2}
    assert jvar(Atom(1)) == set()


def _nnv_sub(rng, keys):
    """A random substitution on ``keys`` meeting no-new-variables."""
    out = {}
    for k in keys:
        t = rand_term(rng, 2, consts=True)
        # rename every variable of t to x_k
        out[k] = apply_just(JustSubstitution({v: Var(k) for v in jvar(t)}), t)
    return JustSubstitution(out)


def test_commutation_lemma():
    rng = random.Random(11)
    for _ in range(100):
        phi = annotate(rand_modal(rng, 3, top="imp"))
        on_keys = set(i for i in box_indices(phi))
        off_keys = {5, 6, 7} - on_keys
        s0 = _nnv_sub(rng, rng.sample(sorted(on_keys), min(len(on_keys), 2)) if on_keys else [])
        s1 = _nnv_sub(rng, rng.sample(sorted(off_keys), 2))
        assert meets_no_new_variables(s0) and meets_no_new_variables(s1)
        assert lives_on(s0, phi) and lives_away(s1, phi)
        for _ in range(20):
            t = rand_term(rng, 3)
            assert apply_just(compose(s0, s1), t) == apply_just(compose(s1, s0), t)


def test_lives_away_preserves_real_membership():
    rng = random.Random(5)
    checked = 0
    for _ in range(100):
        phi = annotate(rand_modal(rng, 2))
        alpha = rand_quasi(rng, T, phi, width=1)
        s = SignedFormula(T, alpha)
        if not real_member(s, phi):
            continue
        sigma = _nnv_sub(rng, [8, 9])
        assert lives_away(sigma, phi)
        assert real_member(SignedFormula(T, apply_just(sigma, alpha)), phi)
        checked += 1
    assert checked > 20
