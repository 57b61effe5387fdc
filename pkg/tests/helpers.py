"""Random generators shared by the test modules."""

from __future__ import annotations

import random

from hypothesis import strategies as st

from justlab.calculus import IPCJ, LogicSpec, ProofBuilder, check_proof
from justlab.realization import F, T
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
    big_and,
    big_or,
)

# --------------------------------------------------------------------------
# hypothesis strategies

terms = st.recursive(
    st.one_of(st.builds(Var, st.integers(1, 4)), st.builds(Const, st.integers(1, 3))),
    lambda inner: st.one_of(
        st.builds(App, inner, inner), st.builds(Sum, inner, inner), st.builds(Bang, inner)
    ),
    max_leaves=6,
)

prop_formulas = st.recursive(
    st.one_of(st.just(BOT), st.builds(Atom, st.integers(1, 4))),
    lambda inner: st.one_of(
        st.builds(And, inner, inner), st.builds(Or, inner, inner), st.builds(Imp, inner, inner)
    ),
    max_leaves=8,
)

jformulas = st.recursive(
    st.one_of(st.just(BOT), st.builds(Atom, st.integers(1, 4))),
    lambda inner: st.one_of(
        st.builds(And, inner, inner),
        st.builds(Or, inner, inner),
        st.builds(Imp, inner, inner),
        st.builds(Just, terms, inner),
    ),
    max_leaves=8,
)

modal_formulas = st.recursive(
    st.one_of(st.just(BOT), st.builds(Atom, st.integers(1, 3))),
    lambda inner: st.one_of(
        st.builds(And, inner, inner),
        st.builds(Or, inner, inner),
        st.builds(Imp, inner, inner),
        st.builds(Box, inner),
    ),
    max_leaves=6,
)

# --------------------------------------------------------------------------
# seeded random generators


def rand_term(rng: random.Random, depth: int = 2, consts: bool = True):
    if depth == 0 or rng.random() < 0.4:
        if consts and rng.random() < 0.3:
            return Const(rng.randint(1, 2))
        return Var(rng.randint(1, 4))
    k = rng.randrange(3)
    if k == 0:
        return App(rand_term(rng, depth - 1, consts), rand_term(rng, depth - 1, consts))
    if k == 1:
        return Sum(rand_term(rng, depth - 1, consts), rand_term(rng, depth - 1, consts))
    return Bang(rand_term(rng, depth - 1, consts))


def rand_prop(rng: random.Random, depth: int = 2, atoms: int = 3):
    if depth == 0 or rng.random() < 0.3:
        return BOT if rng.random() < 0.1 else Atom(rng.randint(1, atoms))
    k = rng.randrange(3)
    cls = (And, Or, Imp)[k]
    return cls(rand_prop(rng, depth - 1, atoms), rand_prop(rng, depth - 1, atoms))


def rand_jformula(rng: random.Random, depth: int = 3, atoms: int = 3, consts: bool = True):
    if depth == 0 or rng.random() < 0.25:
        return BOT if rng.random() < 0.1 else Atom(rng.randint(1, atoms))
    k = rng.randrange(5)
    if k == 4:
        return Just(rand_term(rng, 1, consts), rand_jformula(rng, depth - 1, atoms, consts))
    cls = (And, Or, Imp, Imp)[k]
    return cls(rand_jformula(rng, depth - 1, atoms, consts), rand_jformula(rng, depth - 1, atoms, consts))


def rand_modal(rng: random.Random, depth: int = 2, top=None):
    """A random modal formula; ``top`` forces the outermost node kind."""
    kinds = ["atom", "bot", "and", "or", "imp", "box"]
    kind = top or (rng.choice(kinds[:2]) if depth == 0 else rng.choice(kinds))
    if kind == "atom":
        return Atom(rng.randint(1, 2))
    if kind == "bot":
        return BOT
    if kind == "box":
        return Box(rand_modal(rng, max(depth - 1, 0)))
    cls = {"and": And, "or": Or, "imp": Imp}[kind]
    return cls(rand_modal(rng, max(depth - 1, 0)), rand_modal(rng, max(depth - 1, 0)))


def rand_quasi(rng: random.Random, pol, a, width: int = 2):
    """A random member of quasi<pol, a>."""
    if isinstance(a, (Atom, type(BOT))):
        return a
    if isinstance(a, (And, Or)):
        return type(a)(rand_quasi(rng, pol, a.left, width), rand_quasi(rng, pol, a.right, width))
    if isinstance(a, Imp):
        if pol is T:
            return Imp(rand_quasi(rng, F, a.left, width), rand_quasi(rng, T, a.right, width))
        left = [rand_quasi(rng, T, a.left, width) for _ in range(rng.randint(1, width))]
        right = [rand_quasi(rng, F, a.right, width) for _ in range(rng.randint(1, width))]
        return Imp(big_and(left), big_or(right))
    if isinstance(a, Box):
        if pol is T:
            return Just(Var(a.index), rand_quasi(rng, T, a.body, width))
        body = [rand_quasi(rng, F, a.body, width) for _ in range(rng.randint(1, width))]
        return Just(rand_term(rng, 1), big_or(body))
    raise TypeError(a)


RULE_TOPS = {"atomic": "atom", "and": "and", "or": "or", "imp": "imp", "box": "box"}


def rand_annotated(rng: random.Random, kind: str, depth: int = 2):
    return annotate(rand_modal(rng, depth, top=RULE_TOPS[kind]))


# --------------------------------------------------------------------------
# random valid proofs


def rand_proof(rng: random.Random, logic: LogicSpec = IPCJ, premises: int = 3, depth: int = 6, consts: bool = True):
    """A random valid proof with up to ``premises`` premises and ``depth`` derivation rounds."""
    k = rng.randint(0, premises)
    prem = []
    while len(prem) < k:
        f = rand_jformula(rng, 2, consts=consts)
        if f not in prem:
            prem.append(f)
    b = ProofBuilder(logic, prem)
    lines = [b.premise(i) for i in range(len(prem))]
    if not lines:
        a = rand_prop(rng, 1)
        lines.append(b.self_imp(a))
    for _ in range(rng.randint(2, depth)):
        move = rng.randrange(7)
        j = rng.choice(lines)
        phi = b.formula(j)
        try:
            if move == 0:
                psi = rand_prop(rng, 1)
                ax = b.axiom("A1", Imp(phi, Imp(psi, phi)))
                lines.append(b.mp(ax, j))
            elif move == 1:
                i2 = rng.choice(lines)
                psi = b.formula(i2)
                ax = b.axiom("A5", Imp(phi, Imp(psi, And(phi, psi))))
                lines.append(b.mp(b.mp(ax, j), i2))
            elif move == 2:
                psi = rand_prop(rng, 1)
                ax = b.axiom("A6", Imp(phi, Or(phi, psi)))
                lines.append(b.mp(ax, j))
            elif move == 3 and isinstance(phi, And):
                ax = b.axiom("A3", Imp(phi, phi.left))
                lines.append(b.mp(ax, j))
            elif move == 4 and isinstance(phi, Imp):
                arg = next((i for i in lines if b.formula(i) == phi.left), None)
                if arg is not None:
                    lines.append(b.mp(j, arg))
                else:
                    lines.append(b.self_imp(phi.left))
            elif move == 5:
                t = rand_term(rng, 1, consts)
                ax = b.axiom("PlusL", Imp(Just(t, phi), Just(Sum(t, Var(rng.randint(1, 3))), phi)))
                lines.append(ax)
            elif move == 6:
                c = Const(rng.randint(1, 2))
                psi = rand_prop(rng, 1)
                lines.append(b.cs(Just(c, Imp(psi, Imp(phi, psi)))))
            if logic.factive and rng.random() < 0.2:
                t = rand_term(rng, 1, consts)
                lines.append(b.axiom("Factivity", Imp(Just(t, phi), phi)))
            if logic.introspective and rng.random() < 0.2:
                t = rand_term(rng, 1, consts)
                lines.append(b.axiom("Introspection", Imp(Just(t, phi), Just(Bang(t), Just(t, phi)))))
        except Exception:
            continue
    tail = list(dict.fromkeys(lines[-3:]))
    try:
        last = b.and_fold(tail)
    except Exception:
        last = lines[-1]
    proof = b.build(last)
    # keep every premise listed even if unused, so deduction has something to discharge
    proof = type(proof)(tuple(prem), proof.steps)
    assert check_proof(proof, logic).valid
    return proof
