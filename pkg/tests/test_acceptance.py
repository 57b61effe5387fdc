"""End-to-end acceptance checks, one per criterion, each under its time limit.

Under pytest the PASS/FAIL lines appear in an "acceptance criteria" summary
section; running this file as a script prints them directly.
"""

import random
import sys
import time

import pytest

from helpers import RULE_TOPS, rand_annotated, rand_jformula, rand_modal, rand_proof, rand_quasi, rand_term
from justlab import algebra, kripke
from justlab.calculus import IPCJ, check_proof, deduction, internalize, parse_logic
from justlab.realization import F, RULES, T, SignedFormula, certificate_goal, condense, real_member, realize
from justlab.substitution import JustSubstitution, apply_just, compose, jvar, lives_away, lives_on, meets_no_new_variables
from justlab.syntax import And, BoxVar, Const, Imp, Just, Or, Var, annotate, box_indices, parse_formula, parse_modal
from justlab.syntax import star_translate, star_untranslate

P = parse_formula
RESULTS = []  # one line per criterion, echoed in the pytest terminal summary


def report(number, title, limit, fn):
    """Run ``fn``; print one line; fail on a wrong answer or a blown limit."""
    start = time.perf_counter()
    detail = ""
    try:
        fn()
        ok = True
    except AssertionError as e:
        ok, detail = False, (str(e) or "assertion failed").splitlines()[0]
    except Exception as e:
        ok, detail = False, f"{type(e).__name__}: {e}"
    elapsed = time.perf_counter() - start
    if ok and elapsed > limit:
        ok, detail = False, f"time limit {limit}s exceeded"
    line = f"{'PASS' if ok else 'FAIL'} [{number:>2}] {title} ({elapsed:.2f}s / {limit}s){': ' + detail if detail else ''}"
    RESULTS.append(line)
    print(line)
    assert ok, line


# -- 1 -----------------------------------------------------------------------

GOLDEN = [
    ("#(p1->p2) -> (#p1 -> #p2)", "IPC-J", "x1:(p1->p2) -> (x2:p1 -> (x1.x2):p2)"),
    ("#p1 -> p1", "IPC-JT", "x1:p1 -> p1"),
    ("#p1 -> # #p1", "IPC-J4", "x1:p1 -> !x1:x1:p1"),
]


def _realized(modal, logic):
    L = parse_logic(logic)
    start = time.perf_counter()
    r = realize(parse_modal(modal), L)
    assert time.perf_counter() - start <= 1.0, f"{modal} took over 1s"
    assert r is not None, f"no realization for {modal}"
    assert check_proof(r.proof, L).valid and r.proof.conclusion == r.psi
    assert real_member(SignedFormula(F, r.psi), r.annotated)
    return r


def crit_realization_goldens():
    for modal, logic, expected in GOLDEN:
        assert _realized(modal, logic).psi == P(expected), modal
    r = _realized("#p1 -> #p1", "IPC-J")
    assert isinstance(r.psi, Imp) and r.psi.left == P("x1:p1")
    assert isinstance(r.psi.right, Just) and r.psi.right.body == P("p1")


# -- 2 -----------------------------------------------------------------------


def crit_condensation_rules():
    for rule in RULES:
        sign, kind = rule.split("-")
        pol = T if sign == "T" else F
        rng = random.Random(100 + RULES.index(rule))
        for _ in range(50):
            a = rand_annotated(rng, kind, depth=2)
            gamma = [rand_quasi(rng, pol, a, width=2) for _ in range(rng.randint(1, 3))]
            c = condense(gamma, pol, a)
            assert c.rule == rule, (rule, c.rule)
            assert check_proof(c.certificate, IPCJ).valid, rule
            assert c.certificate.conclusion == certificate_goal(gamma, pol, c), rule
            assert meets_no_new_variables(c.sigma) and lives_on(c.sigma, a), rule
            assert real_member(SignedFormula(pol, c.psi), a), rule


# -- 3 -----------------------------------------------------------------------


def crit_lifting():
    rng = random.Random(3)
    for i in range(200):
        proof = rand_proof(rng, IPCJ, premises=rng.randint(0, 3), depth=6)
        closed = i % 2 == 0
        terms = [Const(rng.randint(1, 3)) if closed else rand_term(rng, 2) for _ in proof.premises]
        t, lifted = internalize(proof, terms, IPCJ)
        assert check_proof(lifted, IPCJ).valid
        assert lifted.conclusion == Just(t, proof.conclusion)
        assert lifted.premises == tuple(Just(s, g) for s, g in zip(terms, proof.premises))
        allowed = frozenset().union(*(jvar(s) for s in terms))
        assert jvar(t) <= allowed
        if closed:
            assert not jvar(t)


# -- 4 -----------------------------------------------------------------------


def crit_deduction():
    rng = random.Random(4)
    for _ in range(200):
        proof = rand_proof(rng, IPCJ, premises=rng.randint(1, 3), depth=6)
        target = proof.conclusion
        for g in reversed(list(dict.fromkeys(proof.premises))):
            proof = deduction(proof, g, IPCJ)
            assert check_proof(proof, IPCJ).valid
            target = Imp(g, target)
            assert proof.conclusion == target
        assert proof.premises == ()


# -- 5 -----------------------------------------------------------------------

ALGEBRAS = [algebra.make_goedel_chain(n) for n in (2, 3, 4)] + list(algebra.enumerate_heyting(4))
ALG_LOGICS = ["IPC-J", "IPC-JT", "IPC-J4", "IPC-JT4"]


def _alg_worlds(m):
    if isinstance(m, algebra.AlgFittingModel):
        return m.worlds
    if isinstance(m, algebra.AlgSubsetModel):
        return m.base_worlds
    return (None,)


def crit_algebraic_soundness():
    rng = random.Random(5)
    makers = [algebra.random_mkrtychev_model, algebra.random_fitting_model, algebra.random_subset_model]
    for i in range(200):
        A = ALGEBRAS[i % len(ALGEBRAS)]
        logic = parse_logic(ALG_LOGICS[(i // 3) % len(ALG_LOGICS)])
        proof = rand_proof(rng, logic, premises=2, depth=4)
        m = makers[i % 3](A, algebra.proof_fragment(proof), logic, rng)
        assert algebra.validate_alg_model(m).valid, (i, A.name)
        for w in _alg_worlds(m):
            rep = algebra.local_soundness(proof, m, w)
            assert rep.sound, (i, A.name, w, rep)


# -- 6 -----------------------------------------------------------------------

INT_LOGICS = ["IPC-J", "IPC-JT", "IPC-J4", "IPC-JT4", "G-J", "KC-J", "C-JT4"]


def crit_kripke_soundness():
    rng = random.Random(6)
    families = ["fitting", "mkrtychev", "subset"]
    for i in range(200):
        logic = parse_logic(INT_LOGICS[i % len(INT_LOGICS)])
        proof = rand_proof(rng, logic, premises=2, depth=4)
        m = kripke.random_int_model(families[i % 3], algebra.proof_fragment(proof), logic, rng, max_worlds=3)
        assert kripke.validate_int_model(m).valid, i
        for w in m.frame.worlds:
            assert kripke.local_soundness(proof, m, w).sound, (i, w)
        for f in m.fragment:
            assert kripke.monotonicity_check(m, f), (i, f)


# -- 7 -----------------------------------------------------------------------


def crit_frame_audit():
    rep = kripke.frame_axiom_audit(4)
    assert rep.frames == 1 + 2 + 5 + 16
    assert rep.passed, rep.failures


# -- 8 -----------------------------------------------------------------------


def crit_countermodels():
    m, w = kripke.countermodel_search(P("p1 | ~p1"), IPCJ, max_worlds=2)
    assert m.frame.size == 2 and not kripke.eval_int(m, w, P("p1 | ~p1"))
    m, w = kripke.countermodel_search(P("x1:p1 -> p1"), IPCJ, max_worlds=1)
    assert m.frame.size == 1 and not kripke.eval_int(m, w, P("x1:p1 -> p1"))
    assert kripke.countermodel_search(P("x1:p1 -> p1"), parse_logic("IPC-JT"), max_worlds=3) is None
    m, w = kripke.countermodel_search(P("~~p1 | ~p1"), IPCJ, max_worlds=3)
    assert kripke.is_isomorphic(m.frame, kripke.v_frame())
    assert not kripke.eval_int(m, w, P("~~p1 | ~p1"))


# -- 9 -----------------------------------------------------------------------


def _commutes(phi, s):
    if isinstance(phi, Just):
        return s == BoxVar(phi.body, phi.term)
    if isinstance(phi, (And, Or, Imp)):
        return type(s) is type(phi) and _commutes(phi.left, s.left) and _commutes(phi.right, s.right)
    return s == phi


def crit_star():
    rng = random.Random(9)
    for _ in range(1000):
        phi = rand_jformula(rng, 4)
        s = star_translate(phi)
        assert star_untranslate(s) == phi
        assert _commutes(phi, s)


# -- 10 ----------------------------------------------------------------------


def _nnv_sub(rng, keys):
    out = {}
    for k in keys:
        t = rand_term(rng, 2)
        out[k] = apply_just(JustSubstitution({v: Var(k) for v in jvar(t)}), t)
    return JustSubstitution(out)


def crit_commutation():
    rng = random.Random(10)
    for _ in range(200):
        phi = annotate(rand_modal(rng, 3, top="imp"))
        on = sorted(set(box_indices(phi)))
        off = sorted({6, 7, 8, 9} - set(on))
        s0 = _nnv_sub(rng, rng.sample(on, min(len(on), 2)))
        s1 = _nnv_sub(rng, rng.sample(off, 2))
        assert meets_no_new_variables(s0) and meets_no_new_variables(s1)
        assert lives_on(s0, phi) and lives_away(s1, phi)
        for _ in range(100):
            t = rand_term(rng, 3)
            assert apply_just(compose(s0, s1), t) == apply_just(compose(s1, s0), t)


# -- 11 ----------------------------------------------------------------------

LIN = P("(p1->p2) | (p2->p1)")


def crit_heyting():
    three = list(algebra.enumerate_heyting(3))
    assert len(three) == 2
    assert algebra.is_isomorphic(three[0], algebra.make_goedel_chain(2))
    assert algebra.is_isomorphic(three[1], algebra.make_goedel_chain(3))
    for A in algebra.enumerate_heyting(6):
        assert algebra.validate_algebra(A).valid, A.name
    for n in range(2, 6):
        assert algebra.valid_in(algebra.make_goedel_chain(n), LIN) is None, n
    # The diamond is the four-element Boolean algebra, so this search comes back empty.
    witness = algebra.valid_in(algebra.diamond(), LIN)
    five = next(A for A in algebra.enumerate_heyting(5) if A.size == 5 and algebra.valid_in(A, LIN))
    assert witness is not None, (
        "no LIN-falsifying assignment on the diamond (it is Boolean); "
        f"smallest falsifier has 5 elements, e.g. {five.name} with {algebra.valid_in(five, LIN)}"
    )


CRITERIA = [
    (1, "realization goldens", 4.0, crit_realization_goldens),
    (2, "condensation rules, 10 x 50", 30.0, crit_condensation_rules),
    (3, "lifting lemma, 200 proofs", 30.0, crit_lifting),
    (4, "deduction theorem, 200 proofs", 30.0, crit_deduction),
    (5, "algebraic soundness, 200 triples", 120.0, crit_algebraic_soundness),
    (6, "Kripke soundness and monotonicity, 200 pairs", 120.0, crit_kripke_soundness),
    (7, "frame-axiom audit, posets up to 4", 300.0, crit_frame_audit),
    (8, "countermodel fixtures", 60.0, crit_countermodels),
    (9, "star translation, 1000 formulas", 5.0, crit_star),
    (10, "substitution commutation, 200 x 100", 10.0, crit_commutation),
    (11, "Heyting enumeration sanity", 30.0, crit_heyting),
]


@pytest.mark.parametrize("number, title, limit, fn", CRITERIA, ids=[f"criterion_{c[0]}" for c in CRITERIA])
def test_criterion(number, title, limit, fn):
    report(number, title, limit, fn)


def test_rule_tops_cover_all_rules():
    assert {f"{p}-{k}" for k in RULE_TOPS for p in "TF"} == set(RULES)


if __name__ == "__main__":
    failed = 0
    for c in CRITERIA:
        try:
            report(*c)
        except AssertionError:
            failed += 1
    sys.exit(1 if failed else 0)
