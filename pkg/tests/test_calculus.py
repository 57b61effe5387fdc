import json
import random

import pytest

from helpers import rand_jformula, rand_proof, rand_term
from justlab.calculus import (
    IPCJ,
    MP,
    Axiom,
    CSInstance,
    LogicSpec,
    Premise,
    Proof,
    ProofBuilder,
    axiom_names,
    bc_formula,
    case_glue,
    check_proof,
    conj_elim_k,
    conj_intro,
    deduction,
    disj_intro,
    in_cs,
    internalize,
    is_axiom,
    matches_scheme,
    parse_logic,
    self_implication,
    subst_proof,
    syllogism,
)
from justlab.errors import NotTotalCS, PremiseNotFound, ShapeMismatch
from justlab.substitution import JustSubstitution, PropSubstitution, apply_prop, jvar
from justlab.syntax import And, Atom, Const, Imp, Just, Or, Sum, Var, big_and, parse_jformula

P = parse_jformula
LOGICS = ["IPC-J", "IPC-JT", "IPC-J4", "IPC-JT4", "G-J", "G3-JT", "KC-J4", "C-JT4"]


def test_logic_strings():
    assert parse_logic("G3-JT4") == LogicSpec("Gn", "JT4", 3)
    assert parse_logic("IPC-J") == IPCJ
    for bad in ["IPC", "G1-J", "KC2-J", "IPC-K"]:
        with pytest.raises(ValueError):
            parse_logic(bad)


def test_scheme_sets():
    assert "LIN" in axiom_names(parse_logic("G-J"))
    assert {"LIN", "BC2"} <= set(axiom_names(parse_logic("G3-J")))
    assert "WLEM" in axiom_names(parse_logic("KC-J"))
    assert "LEM" in axiom_names(parse_logic("C-J"))
    assert "Factivity" not in axiom_names(IPCJ)
    assert {"Factivity", "Introspection"} <= set(axiom_names(parse_logic("IPC-JT4")))


@pytest.mark.parametrize(
    "text, logic, name",
    [
        ("x1:(p1->p2) -> (x2:p1 -> (x1.x2):p2)", "IPC-J", "J"),
        ("x1:(p1->p2) -> (x2:p1 -> (x1.x2):p2)", "C-JT4", "J"),
        ("x1:p1 -> p1", "IPC-JT", "Factivity"),
        ("x1:p1 -> p1", "IPC-J", None),
        ("(p1->p2) | (p2->p1)", "G-J", "LIN"),
        ("(p1->p2) | (p2->p1)", "IPC-J", None),
        ("p1 | ~p1", "C-J", "LEM"),
        ("~~p1 | ~p1", "KC-J", "WLEM"),
        ("x1:p1 -> !x1:x1:p1", "IPC-J4", "Introspection"),
        ("x1:p1 -> (x2 + x1):p1", "IPC-J", "PlusR"),
        ("bot -> p4", "IPC-J", "A9"),
    ],
)
def test_is_axiom_examples(text, logic, name):
    assert is_axiom(P(text), parse_logic(logic)) == name


def test_bc_axiom():
    letters = [Atom(i) for i in range(1, 4)]
    assert is_axiom(bc_formula(2, letters), parse_logic("G3-J")) == "BC2"
    assert is_axiom(bc_formula(2, letters), parse_logic("G-J")) is None


@pytest.mark.parametrize(
    "text, logic, expected",
    [
        ("c1:(p1 -> (p2 -> p1))", "IPC-J", True),
        ("c2:c1:(x1:p1 -> p1)", "IPC-JT", True),
        ("c1:p1", "IPC-J", False),
        ("x1:(p1 -> (p2 -> p1))", "IPC-J", False),
    ],
)
def test_in_cs_examples(text, logic, expected):
    assert in_cs(P(text), parse_logic(logic)) is expected


def test_explicit_cs():
    cs = frozenset({P("c1:(p1 -> (p2 -> p1))")})
    logic = LogicSpec("IPC", "J", cs=cs)
    assert in_cs(P("c1:(p1 -> (p2 -> p1))"), logic)
    assert not in_cs(P("c2:(p1 -> (p2 -> p1))"), logic)
    with pytest.raises(ValueError):
        LogicSpec("IPC", "J", cs=frozenset({P("c1:p1")}))


def test_check_examples():
    a1 = P("p1->(p2->p1)")
    rep = check_proof(Proof((), (Axiom("A1", a1),)), IPCJ)
    assert rep.valid and rep.conclusion == a1
    pr = Proof((P("p1"), P("p1->p2")), (Premise(0, P("p1")), Premise(1, P("p1->p2")), MP(1, 0, P("p2"))))
    assert check_proof(pr, IPCJ).valid
    rep = check_proof(Proof((), (Axiom("A1", P("p1")),)), IPCJ)
    assert not rep.valid and rep.step == 0 and rep.reason == "NotAxiom"


@pytest.mark.parametrize(
    "steps, premises, reason",
    [
        ((Premise(1, P("p1")),), (P("p1"),), "BadPremiseIndex"),
        ((CSInstance(P("c1:p1")),), (), "NotCS"),
        ((Premise(0, P("p1")), MP(0, 0, P("p2"))), (P("p1"),), "BadMP"),
        ((Premise(0, P("p1")), MP(2, 0, P("p2"))), (P("p1"),), "BadMP"),
        ((), (), "EmptyProof"),
    ],
)
def test_check_rejections(steps, premises, reason):
    rep = check_proof(Proof(premises, steps), IPCJ)
    assert not rep.valid and rep.reason == reason


def test_proof_json_roundtrip():
    rng = random.Random(1)
    for _ in range(30):
        pr = rand_proof(rng)
        again = Proof.from_json(json.loads(json.dumps(pr.to_json())))
        assert again == pr


def test_deduction_examples():
    pr = Proof((P("p1"),), (Premise(0, P("p1")),))
    d = deduction(pr, P("p1"), IPCJ)
    assert d.premises == () and d.conclusion == P("p1 -> p1") and check_proof(d, IPCJ).valid

    pr = Proof((P("p1"), P("p1->p2")), (Premise(0, P("p1")), Premise(1, P("p1->p2")), MP(1, 0, P("p2"))))
    d = deduction(pr, P("p1"), IPCJ)
    assert d.premises == (P("p1->p2"),) and d.conclusion == P("p1 -> p2") and check_proof(d, IPCJ).valid
    d2 = deduction(d, P("p1->p2"), IPCJ)
    assert d2.premises == () and d2.conclusion == P("(p1->p2)->(p1->p2)") and check_proof(d2, IPCJ).valid

    used = {s.name for s in d2.steps if isinstance(s, Axiom)}
    assert used <= {"A1", "A2"}


def test_deduction_missing_premise():
    with pytest.raises(PremiseNotFound):
        deduction(Proof((P("p1"),), (Premise(0, P("p1")),)), P("p2"), IPCJ)


def test_internalize_examples():
    a1 = P("p1->(p2->p1)")
    t, lifted = internalize(Proof((), (Axiom("A1", a1),)), [], IPCJ)
    assert t == Const(1) and lifted.conclusion == Just(Const(1), a1) and check_proof(lifted, IPCJ).valid

    pr = Proof((P("p1->p2"), P("p1")), (Premise(0, P("p1->p2")), Premise(1, P("p1")), MP(0, 1, P("p2"))))
    t, lifted = internalize(pr, [Var(1), Var(2)], IPCJ)
    assert t == P("(x1.x2):p1").term
    assert lifted.premises == (P("x1:(p1->p2)"), P("x2:p1"))
    assert lifted.conclusion == P("(x1.x2):p2") and check_proof(lifted, IPCJ).valid

    si = self_implication(P("p1"))
    assert len(si) == 5
    t, lifted = internalize(si, [], IPCJ)
    assert jvar(t) == set() and check_proof(lifted, IPCJ).valid


def test_internalize_needs_total_cs():
    logic = LogicSpec("IPC", "J", cs=frozenset())
    with pytest.raises(NotTotalCS):
        internalize(Proof((), (Axiom("A1", P("p1->(p2->p1)")),)), [], logic)


def test_subst_proof_examples():
    ax = P("x1:p1 -> (x1+x2):p1")
    pr = Proof((), (Axiom("PlusL", ax),))
    out = subst_proof(pr, JustSubstitution({1: Const(1)}), IPCJ)
    assert out.conclusion == P("c1:p1 -> (c1+x2):p1") and check_proof(out, IPCJ).valid
    assert subst_proof(pr, JustSubstitution(), IPCJ) == pr

    t, lifted = internalize(self_implication(P("p1")), [], IPCJ)
    # lift again so there is a variable to substitute
    b = ProofBuilder(IPCJ)
    line = b.mp(b.axiom("PlusL", Imp(lifted.conclusion, Just(Sum(t, Var(1)), P("p1->p1")))), b.splice(lifted))
    out = subst_proof(b.build(line), JustSubstitution({1: Const(1)}), IPCJ)
    assert check_proof(out, IPCJ).valid


def test_combinators():
    a, b, c = P("p1"), P("p2"), P("p3")
    ab = self_implication(a)
    bc_ = syllogism(ab, ab)
    assert bc_.conclusion == Imp(a, a) and check_proof(bc_, IPCJ).valid

    x = P("p4")
    bb = ProofBuilder(IPCJ)
    conj = big_and([a, b, c])
    base = self_implication(conj)
    mid = conj_elim_k(base, 2)
    assert mid.conclusion == Imp(conj, b) and check_proof(mid, IPCJ).valid

    both = conj_intro([conj_elim_k(base, 3), conj_elim_k(base, 1)])
    assert both.conclusion == Imp(conj, And(c, a)) and check_proof(both, IPCJ).valid

    inj = disj_intro(self_implication(b), [a, b, c], 1)
    assert inj.conclusion == Imp(b, Or(Or(a, b), c)) and check_proof(inj, IPCJ).valid

    g1 = bb.build(bb.axiom("A1", Imp(a, Imp(x, a))))
    g2 = bb.build(bb.axiom("A1", Imp(b, Imp(x, b))))
    with pytest.raises(ShapeMismatch):
        case_glue([g1, g2])
    goal = Or(a, b)
    left = ProofBuilder(IPCJ)
    p1 = left.build(left.axiom("A6", Imp(a, goal)))
    right = ProofBuilder(IPCJ)
    p2 = right.build(right.axiom("A7", Imp(b, goal)))
    glued = case_glue([p1, p2])
    assert glued.conclusion == Imp(Or(a, b), goal) and check_proof(glued, IPCJ).valid


def test_checker_gate_randomized():
    """Every proof-returning operation yields checked proofs (500 invocations)."""
    rng = random.Random(2024)
    count = 0
    while count < 500:
        logic = parse_logic(rng.choice(LOGICS))
        pr = rand_proof(rng, logic)
        op = rng.randrange(3)
        if op == 0 and pr.premises:
            out = deduction(pr, rng.choice(pr.premises), logic)
        elif op == 1:
            out = internalize(pr, [rand_term(rng, 1) for _ in pr.premises], logic)[1]
        else:
            while pr.premises:
                pr = deduction(pr, pr.premises[0], logic)
            out = subst_proof(pr, JustSubstitution({1: rand_term(rng, 2), 2: rand_term(rng, 1)}), logic)
        assert check_proof(out, logic).valid
        count += 1


def test_deduction_contract_randomized():
    rng = random.Random(7)
    for _ in range(100):
        pr = rand_proof(rng)
        if not pr.premises:
            continue
        g = rng.choice(pr.premises)
        d = deduction(pr, g, IPCJ)
        assert d.conclusion == Imp(g, pr.conclusion)
        assert set(d.premises) == set(pr.premises) - {g}


def test_axiom_recognition_is_substitution_closed():
    rng = random.Random(9)
    for _ in range(300):
        logic = parse_logic(rng.choice(LOGICS))
        pr = rand_proof(rng, logic)
        sigma = PropSubstitution({k: rand_jformula(rng, 2) for k in (1, 2, 3) if rng.random() < 0.6})
        for s in pr.steps:
            if isinstance(s, Axiom):
                img = apply_prop(sigma, s.formula)
                # the first match may move to an earlier overlapping scheme
                assert matches_scheme(s.name, img, logic)
                assert is_axiom(img, logic) is not None
