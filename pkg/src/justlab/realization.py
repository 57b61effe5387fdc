"""Realizations of annotated modal formulas.

``real_member`` and ``quasi_member`` decide the signed realization sets of an
annotated formula. ``condense`` turns a set of quasi-realizations into one
realization plus a justification substitution and an IPC-J certificate.
``realize`` runs the whole pipeline for a modal formula: it annotates the
formula, finds a quasi-realization with a certificate, condenses it and
glues the proofs together.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from enum import Enum
from functools import lru_cache
from typing import Iterator, Optional, Sequence

from . import calculus
from .calculus import (
    IPCJ,
    Axiom,
    CSInstance,
    LogicSpec,
    MP,
    Premise,
    Proof,
    ProofBuilder,
    _MF,
    _MT,
    check_proof,
    in_cs,
    internalize,
    subst_proof,
)
from .errors import AnnotationError, InvalidCertificate, NotQuasiMember, ShapeMismatch
from .substitution import (
    IDENTITY,
    JustSubstitution,
    apply_just,
    compose,
    lives_on,
    meets_no_new_variables,
)
from .syntax import (
    And,
    App,
    Atom,
    Bang,
    Bottom,
    Box,
    Const,
    Formula,
    Imp,
    Just,
    Or,
    Sum,
    Term,
    Var,
    annotate,
    big_and,
    big_or,
    big_sum,
    box_indices,
    print_formula,
    project,
    term_depth,
    uniquely_annotated,
)


class Polarity(str, Enum):
    T = "T"
    F = "F"

    @property
    def flip(self) -> "Polarity":
        return Polarity.F if self is Polarity.T else Polarity.T


T, F = Polarity.T, Polarity.F


@dataclass(frozen=True)
class SignedFormula:
    polarity: Polarity
    formula: Formula


def _require_annotated(a: Formula) -> None:
    if not uniquely_annotated(a):
        raise AnnotationError(f"{print_formula(a)} is not uniquely annotated")


# --------------------------------------------------------------------------
# Membership


def real_member(s: SignedFormula, a: Formula) -> bool:
    _require_annotated(a)
    return _real(Polarity(s.polarity), s.formula, a)


@lru_cache(maxsize=65536)
def _real(pol: Polarity, f: Formula, a: Formula) -> bool:
    if isinstance(a, (Atom, Bottom)):
        return f == a
    if isinstance(a, (And, Or)):
        return type(f) is type(a) and _real(pol, f.left, a.left) and _real(pol, f.right, a.right)
    if isinstance(a, Imp):
        return isinstance(f, Imp) and _real(pol.flip, f.left, a.left) and _real(pol, f.right, a.right)
    if isinstance(a, Box):
        if not isinstance(f, Just):
            return False
        if pol is T and f.term != Var(a.index):
            return False
        return _real(pol, f.body, a.body)
    return False


def quasi_member(s: SignedFormula, a: Formula) -> bool:
    _require_annotated(a)
    return _quasi(Polarity(s.polarity), s.formula, a)


def _decompositions(f: Formula, kind) -> Iterator[list]:
    """Ways to read ``f`` as a left fold over ``kind``, most items first."""
    spine = []
    g = f
    while isinstance(g, kind):
        spine.append(g.right)
        g = g.left
    spine.append(g)
    spine.reverse()
    m = len(spine)
    for k in range(m, 0, -1):
        head = spine[: m - k + 1]
        yield [big_and(head) if kind is And else big_or(head)] + spine[m - k + 1 :]


def _split(f: Formula, kind, pol: Polarity, a: Formula) -> Optional[list]:
    for items in _decompositions(f, kind):
        if all(_quasi(pol, x, a) for x in items):
            return items
    return None


@lru_cache(maxsize=65536)
def _quasi(pol: Polarity, f: Formula, a: Formula) -> bool:
    if isinstance(a, (Atom, Bottom)):
        return f == a
    if isinstance(a, (And, Or)):
        return type(f) is type(a) and _quasi(pol, f.left, a.left) and _quasi(pol, f.right, a.right)
    if isinstance(a, Imp):
        if not isinstance(f, Imp):
            return False
        if pol is T:
            return _quasi(F, f.left, a.left) and _quasi(T, f.right, a.right)
        return _split(f.left, And, T, a.left) is not None and _split(f.right, Or, F, a.right) is not None
    if isinstance(a, Box):
        if not isinstance(f, Just):
            return False
        if pol is T:
            return f.term == Var(a.index) and _quasi(T, f.body, a.body)
        return _split(f.body, Or, F, a.body) is not None
    return False


# --------------------------------------------------------------------------
# Condensation


@dataclass(frozen=True)
class Condensation:
    psi: Formula
    sigma: JustSubstitution
    certificate: Proof
    rule: str = ""


def rule_name(pol: Polarity, a: Formula) -> str:
    sign = Polarity(pol).value
    if isinstance(a, (Atom, Bottom)):
        return f"{sign}-atomic"
    sym = {And: "and", Or: "or", Imp: "imp", Box: "box"}[type(a)]
    return f"{sign}-{sym}"


RULES = tuple(f"{p}-{k}" for k in ("atomic", "and", "or", "imp", "box") for p in "TF")


def _dedupe(items) -> list:
    return list(dict.fromkeys(items))


def _cert_logic(logic: LogicSpec) -> LogicSpec:
    if logic.total:
        return IPCJ
    return LogicSpec("IPC", "J", cs=frozenset(f for f in logic.cs if calculus._cs_shape(f, IPCJ)))


def condense(gamma: Sequence[Formula], pol, a: Formula, logic: LogicSpec = IPCJ) -> Condensation:
    """Merge quasi-realizations ``gamma`` of ``a`` into a single realization."""
    _require_annotated(a)
    pol = Polarity(pol)
    items = _dedupe(gamma)
    if not items:
        raise NotQuasiMember("empty set of quasi-realizations")
    for g in items:
        if not _quasi(pol, g, a):
            raise NotQuasiMember(f"({pol.value}, {print_formula(g)}) is not a quasi-realization")
    L = _cert_logic(logic)
    psi, sigma, cert = _Condenser(L).run(items, pol, a)
    return Condensation(psi, sigma, cert, rule_name(pol, a))


def certificate_goal(gamma: Sequence[Formula], pol, c: Condensation) -> Formula:
    """The implication a condensation certificate has to prove."""
    items = [apply_just(c.sigma, g) for g in _dedupe(gamma)]
    if Polarity(pol) is T:
        return Imp(c.psi, big_and(items))
    return Imp(big_or(items), c.psi)


class _Condenser:
    def __init__(self, logic: LogicSpec):
        self.L = logic

    def run(self, items: list, pol: Polarity, a: Formula):
        if isinstance(a, (Atom, Bottom)):
            if items != [a]:
                raise NotQuasiMember("atomic quasi-realization must be the atom itself")
            b = ProofBuilder(self.L)
            return a, IDENTITY, b.build(b.self_imp(a))
        if isinstance(a, (And, Or)):
            return self._binary(items, pol, a)
        if isinstance(a, Imp):
            return self._imp_t(items, a) if pol is T else self._imp_f(items, a)
        if isinstance(a, Box):
            return self._box_t(items, a) if pol is T else self._box_f(items, a)
        raise NotQuasiMember(f"unexpected node {a!r}")

    def _sub(self, proof: Proof, sigma: JustSubstitution) -> Proof:
        return subst_proof(proof, sigma, self.L)

    @staticmethod
    def _merge(s1: JustSubstitution, s2: JustSubstitution) -> JustSubstitution:
        sigma = compose(s1, s2)
        if sigma != compose(s2, s1):
            raise AssertionError("substitutions living on disjoint parts must commute")
        return sigma

    def _binary(self, items, pol, a):
        conn = type(a)
        lefts = _dedupe(g.left for g in items)
        rights = _dedupe(g.right for g in items)
        chi, s1, p1 = self.run(lefts, pol, a.left)
        xi, s2, p2 = self.run(rights, pol, a.right)
        sigma = self._merge(s1, s2)
        q1, q2 = self._sub(p1, s2), self._sub(p2, s1)
        psi = conn(apply_just(s2, chi), apply_just(s1, xi))
        ls = [apply_just(sigma, x) for x in lefts]
        rs = [apply_just(sigma, x) for x in rights]
        gs = [apply_just(sigma, g) for g in items]
        b = ProofBuilder(self.L)
        l1, l2 = b.splice(q1), b.splice(q2)

        if pol is T and conn is And:
            # psi -> AND_i (l_i & r_i)
            def body(c, h):
                hl, hr = c.and_elims(h, 2)
                el = c.and_elims(c.mp(l1, hl), len(ls))
                er = c.and_elims(c.mp(l2, hr), len(rs))
                return c.and_fold(
                    [c.and_intro(el[lefts.index(g.left)], er[rights.index(g.right)]) for g in items]
                )

            top = b.implies(psi, body)
        elif pol is F and conn is And:
            # OR_i (l_i & r_i) -> psi
            def case(c, h, i):
                g = items[i]
                hl, hr = c.and_elims(h, 2)
                cl = c.mp(l1, c.or_inject(hl, ls, lefts.index(g.left)))
                cr = c.mp(l2, c.or_inject(hr, rs, rights.index(g.right)))
                return c.and_intro(cl, cr)

            top = b.implies(big_or(gs), lambda c, h: c.or_cases(h, gs, psi, case))
        elif pol is T:
            # (chi | xi) -> AND_i (l_i | r_i)
            goal = big_and(gs)

            def case(c, h, side):
                if side == 0:
                    el = c.and_elims(c.mp(l1, h), len(ls))
                    parts = [c.or_inject(el[lefts.index(g.left)], [x.left, x.right], 0) for x, g in zip(gs, items)]
                else:
                    er = c.and_elims(c.mp(l2, h), len(rs))
                    parts = [c.or_inject(er[rights.index(g.right)], [x.left, x.right], 1) for x, g in zip(gs, items)]
                return c.and_fold(parts)

            top = b.implies(psi, lambda c, h: c.or_cases(h, [psi.left, psi.right], goal, case))
        else:
            # OR_i (l_i | r_i) -> (chi | xi)
            def inner(c, h, side, g):
                if side == 0:
                    x = c.mp(l1, c.or_inject(h, ls, lefts.index(g.left)))
                else:
                    x = c.mp(l2, c.or_inject(h, rs, rights.index(g.right)))
                return c.or_inject(x, [psi.left, psi.right], side)

            def case(c, h, i):
                x = gs[i]
                return c.or_cases(h, [x.left, x.right], psi, lambda cc, hh, side: inner(cc, hh, side, items[i]))

            top = b.implies(big_or(gs), lambda c, h: c.or_cases(h, gs, psi, case))
        return psi, sigma, b.build(top)

    def _imp_t(self, items, a):
        ants = _dedupe(g.left for g in items)
        cons = _dedupe(g.right for g in items)
        chi, s1, p1 = self.run(ants, F, a.left)
        xi, s2, p2 = self.run(cons, T, a.right)
        sigma = self._merge(s1, s2)
        q1, q2 = self._sub(p1, s2), self._sub(p2, s1)
        psi = Imp(apply_just(s2, chi), apply_just(s1, xi))
        As = [apply_just(sigma, x) for x in ants]
        Bs = [apply_just(sigma, x) for x in cons]
        b = ProofBuilder(self.L)
        l1, l2 = b.splice(q1), b.splice(q2)

        def one(c, h, g):
            def inner(cc, ha):
                x = cc.mp(l1, cc.or_inject(ha, As, ants.index(g.left)))
                y = cc.mp(l2, cc.mp(h, x))
                return cc.and_elims(y, len(Bs))[cons.index(g.right)]

            return c.implies(As[ants.index(g.left)], inner)

        top = b.implies(psi, lambda c, h: c.and_fold([one(c, h, g) for g in items]))
        return psi, sigma, b.build(top)

    def _imp_f(self, items, a):
        splits = []
        for g in items:
            splits.append((calculus_split(g.left, And, T, a.left), calculus_split(g.right, Or, F, a.right)))
        G = _dedupe(x for gam, _ in splits for x in gam)
        D = _dedupe(x for _, dl in splits for x in dl)
        chi, s1, p1 = self.run(G, T, a.left)
        xi, s2, p2 = self.run(D, F, a.right)
        sigma = self._merge(s1, s2)
        q1, q2 = self._sub(p1, s2), self._sub(p2, s1)
        left, right = apply_just(s2, chi), apply_just(s1, xi)
        psi = Imp(left, right)
        Gs = [apply_just(sigma, x) for x in G]
        Ds = [apply_just(sigma, x) for x in D]
        gs = [apply_just(sigma, g) for g in items]
        b = ProofBuilder(self.L)
        l1, l2 = b.splice(q1), b.splice(q2)

        def with_chi(c, h1, h0):
            el = c.and_elims(c.mp(l1, h1), len(Gs))

            def case(cc, hj, j):
                gam, dl = splits[j]
                conj = cc.and_fold([el[G.index(x)] for x in gam])
                disj = cc.mp(hj, conj)
                dls = [apply_just(sigma, x) for x in dl]
                return cc.or_cases(
                    disj, dls, right, lambda c3, hd, m: c3.mp(l2, c3.or_inject(hd, Ds, D.index(dl[m])))
                )

            return c.or_cases(h0, gs, right, case)

        top = b.implies(big_or(gs), lambda c, h0: c.implies(left, lambda c2, h1: with_chi(c2, h1, h0)))
        return psi, sigma, b.build(top)

    def _box_t(self, items, a):
        n = a.index
        bodies = _dedupe(g.body for g in items)
        chi, s1, p1 = self.run(bodies, T, a.body)
        bs = [apply_just(s1, x) for x in bodies]
        if len(bs) == 1 and bs[0] == chi:
            psi = Just(Var(n), chi)
            b = ProofBuilder(self.L)
            return psi, s1, b.build(b.self_imp(psi))
        terms, lifts = [], []
        for i in range(len(bodies)):
            b = ProofBuilder(self.L)
            base = b.splice(p1)
            line = b.implies(chi, lambda c, h: c.and_elims(c.mp(base, h), len(bs))[i])
            t, proof = internalize(b.build(line), [], self.L)
            terms.append(t)
            lifts.append(proof)
        s = big_sum(terms)
        tau = JustSubstitution({n: App(s, Var(n))})
        sigma = compose(s1, tau)
        chi_t = apply_just(tau, chi)
        psi = Just(Var(n), chi_t)
        b = ProofBuilder(self.L)
        summed = []
        for i, proof in enumerate(lifts):
            line = b.splice(self._sub(proof, tau))
            summed.append(b.sum_inject(line, terms, i))
        top = b.implies(psi, lambda c, h: c.and_fold([c.j_apply(l, h) for l in summed]))
        return psi, sigma, b.build(top)

    def _box_f(self, items, a):
        splits = [calculus_split(g.body, Or, F, a.body) for g in items]
        G = _dedupe(x for dl in splits for x in dl)
        chi, s1, p1 = self.run(G, F, a.body)
        gs = [apply_just(s1, g) for g in items]
        if len(items) == 1 and gs[0].body == chi:
            b = ProofBuilder(self.L)
            return gs[0], s1, b.build(b.self_imp(gs[0]))
        Gs = [apply_just(s1, x) for x in G]
        us, lifts = [], []
        for dl in splits:
            dls = [apply_just(s1, x) for x in dl]
            b = ProofBuilder(self.L)
            base = b.splice(p1)
            line = b.implies(
                big_or(dls),
                lambda c, h, dl=dl, dls=dls: c.or_cases(
                    h, dls, chi, lambda cc, hh, m: cc.mp(base, cc.or_inject(hh, Gs, G.index(dl[m])))
                ),
            )
            u, proof = internalize(b.build(line), [], self.L)
            us.append(u)
            lifts.append(proof)
        summands = [App(u, g.term) for u, g in zip(us, gs)]
        psi = Just(big_sum(summands), chi)
        b = ProofBuilder(self.L)
        ulines = [b.splice(p) for p in lifts]

        def case(c, h, j):
            return c.sum_inject(c.j_apply(ulines[j], h), summands, j)

        top = b.implies(big_or(gs), lambda c, h: c.or_cases(h, gs, psi, case))
        return psi, s1, b.build(top)


def calculus_split(f: Formula, kind, pol: Polarity, a: Formula) -> list:
    items = _split(f, kind, pol, a)
    if items is None:
        raise NotQuasiMember(f"{print_formula(f)} does not split into quasi-realizations")
    return items


# --------------------------------------------------------------------------
# Quasi-realization discovery


@dataclass(frozen=True)
class Hole:
    """Placeholder for a term still to be chosen during discovery."""

    index: int


class _Env:
    """Hole bindings; copied on every choice point."""

    def __init__(self, binds=None):
        self.binds = dict(binds or {})

    def copy(self) -> "_Env":
        return _Env(self.binds)

    def term(self, t):
        while isinstance(t, Hole) and t.index in self.binds:
            t = self.binds[t.index]
        if isinstance(t, App):
            return App(self.term(t.left), self.term(t.right))
        if isinstance(t, Sum):
            return Sum(self.term(t.left), self.term(t.right))
        if isinstance(t, Bang):
            return Bang(self.term(t.term))
        return t

    def __call__(self, f):
        if isinstance(f, (Var, Const, App, Sum, Bang, Hole)):
            return self.term(f)
        if isinstance(f, (And, Or, Imp)):
            return type(f)(self(f.left), self(f.right))
        if isinstance(f, Just):
            return Just(self.term(f.term), self(f.body))
        return f


def _holes(x) -> set:
    if isinstance(x, Hole):
        return {x.index}
    if isinstance(x, (App, Sum, And, Or, Imp)):
        return _holes(x.left) | _holes(x.right)
    if isinstance(x, Bang):
        return _holes(x.term)
    if isinstance(x, Just):
        return _holes(x.term) | _holes(x.body)
    return set()


def _unify_term(s, t, env: _Env) -> bool:
    s, t = env.term(s), env.term(t)
    if s == t:
        return True
    if isinstance(s, Hole):
        if s.index in _holes(t):
            return False
        env.binds[s.index] = t
        return True
    if isinstance(t, Hole):
        return _unify_term(t, s, env)
    if type(s) is not type(t):
        return False
    if isinstance(s, (App, Sum)):
        return _unify_term(s.left, t.left, env) and _unify_term(s.right, t.right, env)
    if isinstance(s, Bang):
        return _unify_term(s.term, t.term, env)
    return False


def _unify(f, g, env: _Env) -> bool:
    if type(f) is not type(g):
        return False
    if isinstance(f, (And, Or, Imp)):
        return _unify(f.left, g.left, env) and _unify(f.right, g.right, env)
    if isinstance(f, Just):
        return _unify_term(f.term, g.term, env) and _unify(f.body, g.body, env)
    return f == g


def _instantiate(pat, menv: dict):
    if isinstance(pat, (_MF, _MT)):
        if pat.name not in menv:
            raise KeyError(pat.name)
        return menv[pat.name]
    if isinstance(pat, (App, Sum)):
        return type(pat)(_instantiate(pat.left, menv), _instantiate(pat.right, menv))
    if isinstance(pat, Bang):
        return Bang(_instantiate(pat.term, menv))
    return pat


def _match_pattern(pat, obj, menv: dict, env: _Env) -> bool:
    """Match an axiom pattern against a goal that may contain holes."""
    if isinstance(pat, _MF):
        if pat.name in menv:
            return _unify(menv[pat.name], obj, env)
        menv[pat.name] = obj
        return True
    if isinstance(pat, _MT):
        if pat.name in menv:
            return _unify_term(menv[pat.name], obj, env)
        menv[pat.name] = obj
        return True
    if isinstance(pat, (App, Sum, Bang)):
        obj = env.term(obj)
        if isinstance(obj, Hole):
            try:
                inst = _instantiate(pat, menv)
            except KeyError:
                return False
            return _unify_term(obj, inst, env)
        if type(obj) is not type(pat):
            return False
        if isinstance(pat, Bang):
            return _match_pattern(pat.term, obj.term, menv, env)
        return _match_pattern(pat.left, obj.left, menv, env) and _match_pattern(pat.right, obj.right, menv, env)
    if type(pat) is not type(obj):
        return False
    if isinstance(pat, (And, Or, Imp)):
        return _match_pattern(pat.left, obj.left, menv, env) and _match_pattern(pat.right, obj.right, menv, env)
    if isinstance(pat, Just):
        return _match_pattern(pat.term, obj.term, menv, env) and _match_pattern(pat.body, obj.body, menv, env)
    return pat == obj


def _template(pol: Polarity, a: Formula, fresh, width: int = 1, slot: bool = False) -> Formula:
    """The realization skeleton: T-boxes get their variable, F-boxes a hole.

    F-boxes in a disjunction slot (the consequent of an F-implication or the
    body of an F-box) become ``width`` copies joined by disjunction.
    """
    if isinstance(a, (Atom, Bottom)):
        return a
    if isinstance(a, (And, Or)):
        return type(a)(_template(pol, a.left, fresh, width), _template(pol, a.right, fresh, width))
    if isinstance(a, Imp):
        return Imp(
            _template(pol.flip, a.left, fresh, width),
            _template(pol, a.right, fresh, width, slot=pol is F),
        )
    if isinstance(a, Box):
        if pol is T:
            return Just(Var(a.index), _template(pol, a.body, fresh, width))
        copies = width if slot else 1
        return big_or(
            [Just(Hole(fresh(a.index)), _template(pol, a.body, fresh, width, slot=True)) for _ in range(copies)]
        )
    raise AnnotationError(f"unexpected node {a!r}")


class _Budget(Exception):
    pass


class _Prover:
    """Depth-bounded goal-directed search over a fixed library of moves.

    Moves: use a hypothesis, identity, an axiom instance (holes may be
    filled by the match), implication/conjunction/disjunction introduction,
    elimination of a hypothesis, and lifting a derivation under a hole by
    internalization. Every success carries a plan that replays the
    derivation on a ProofBuilder once all holes are fixed.
    """

    def __init__(self, logic: LogicSpec, max_term_depth: int, budget: int):
        self.logic = logic
        self.max_term_depth = max_term_depth
        self.budget = budget
        self.schemes = calculus._schemes(logic)

    def tick(self):
        self.budget -= 1
        if self.budget < 0:
            raise _Budget()

    def prove(self, hyps: tuple, goal, depth: int, env: _Env):
        """Yield (env, plan) pairs; ``plan(builder, env)`` returns a line."""
        self.tick()
        g = env(goal)
        for h in hyps:
            e = env.copy()
            if _unify(h, g, e):
                yield e, (lambda b, E, h=h: b.have(E(h)))
        if depth <= 0:
            return
        if isinstance(g, Imp):
            e = env.copy()
            if _unify(g.left, g.right, e):
                yield e, (lambda b, E: b.self_imp(E(g.left)))
        for name, pat in self.schemes:
            e = env.copy()
            if _match_pattern(pat, g, {}, e):
                yield e, (lambda b, E, name=name: b.axiom(name, E(g)))
        if isinstance(g, Imp):
            for e, p in self.prove(hyps + (g.left,), g.right, depth - 1, env):
                yield e, (lambda b, E, p=p: b.implies(E(g.left), lambda c, h: p(c, E)))
        if isinstance(g, And):
            for e1, p1 in self.prove(hyps, g.left, depth - 1, env):
                for e2, p2 in self.prove(hyps, g.right, depth - 1, e1):
                    yield e2, (lambda b, E, p1=p1, p2=p2: b.and_intro(p1(b, E), p2(b, E)))
        if isinstance(g, Or):
            for side, part in enumerate((g.left, g.right)):
                for e, p in self.prove(hyps, part, depth - 1, env):
                    yield e, (
                        lambda b, E, p=p, side=side: b.or_inject(p(b, E), [E(g.left), E(g.right)], side)
                    )
        if isinstance(g, Just):
            yield from self._just_goal(hyps, g, depth, env)
        yield from self._eliminate(hyps, g, depth, env)

    def _just_goal(self, hyps, g, depth, env):
        term = env.term(g.term)
        if isinstance(term, Hole):
            justified = [h for h in hyps if isinstance(h, Just) and not _holes(env(h))]
            bodies = tuple(env(h.body) for h in justified)
            for e, p in self.prove(bodies, g.body, depth - 1, env):
                b = ProofBuilder(self.logic, list(bodies))
                for x in bodies:
                    b.hyp(x)
                try:
                    line = p(b, e)
                except Exception:
                    continue
                t, lifted = internalize(b.build(line), [env.term(h.term) for h in justified], self.logic)
                if term_depth(t) > self.max_term_depth:
                    continue
                e2 = e.copy()
                if _unify_term(term, t, e2):
                    yield e2, (lambda b2, E, lifted=lifted: b2.splice(_fill_proof(lifted, E)))
        elif isinstance(term, App):
            for h in hyps:
                h = env(h)
                if isinstance(h, Just) and isinstance(h.body, Imp):
                    e = env.copy()
                    if _unify_term(h.term, term.left, e) and _unify(h.body.right, g.body, e):
                        sub = Just(term.right, h.body.left)
                        for e2, p in self.prove(hyps, sub, depth - 1, e):
                            yield e2, (lambda b, E, h=h, p=p: b.j_apply(b.have(E(h)), p(b, E)))
        elif isinstance(term, Sum):
            for side, part in enumerate((term.left, term.right)):
                for e, p in self.prove(hyps, Just(part, g.body), depth - 1, env):
                    yield e, (lambda b, E, p=p: b.sum_inject(p(b, E), [E(term.left), E(term.right)], side))
        elif isinstance(term, Bang) and self.logic.introspective and isinstance(g.body, Just):
            if env.term(g.body.term) == term.term:
                for e, p in self.prove(hyps, g.body, depth - 1, env):
                    yield e, (
                        lambda b, E, p=p: b.mp(
                            b.axiom("Introspection", Imp(E(g.body), E(g))), p(b, E)
                        )
                    )

    def _eliminate(self, hyps, g, depth, env):
        for i, h in enumerate(hyps):
            h = env(h)
            rest = hyps[:i] + hyps[i + 1 :]
            if isinstance(h, And):
                for e, p in self.prove(rest + (h.left, h.right), g, depth - 1, env):
                    yield e, (lambda b, E, h=h, p=p: (b.and_elims(b.have(E(h)), 2), p(b, E))[1])
            elif isinstance(h, Or):
                for e1, p1 in self.prove(rest + (h.left,), g, depth - 1, env):
                    for e2, p2 in self.prove(rest + (h.right,), g, depth - 1, e1):
                        yield e2, (
                            lambda b, E, h=h, p1=p1, p2=p2: b.or_cases(
                                b.have(E(h)),
                                [E(h.left), E(h.right)],
                                E(g),
                                lambda c, hh, side: (p1 if side == 0 else p2)(c, E),
                            )
                        )
            elif isinstance(h, Imp):
                for e1, p1 in self.prove(rest, h.left, depth - 1, env):
                    for e2, p2 in self.prove(rest + (h.right,), g, depth - 1, e1):
                        yield e2, (
                            lambda b, E, h=h, p1=p1, p2=p2: (b.mp(b.have(E(h)), p1(b, E)), p2(b, E))[1]
                        )
            elif isinstance(h, Bottom):
                yield env, (lambda b, E: b.mp(b.axiom("A9", Imp(Bottom(), E(g))), b.have(Bottom())))
            elif isinstance(h, Just) and self.logic.factive:
                for e, p in self.prove(rest + (h.body,), g, depth - 1, env):
                    yield e, (
                        lambda b, E, h=h, p=p: (
                            b.mp(b.axiom("Factivity", Imp(E(h), E(h.body))), b.have(E(h))),
                            p(b, E),
                        )[1]
                    )


def _fill(f, env: _Env, default: Term = Const(1)):
    f = env(f)
    holes = _holes(f)
    if holes:
        f = _Env({k: default for k in holes})(f)
    return f


def _fill_proof(proof: Proof, env: _Env) -> Proof:
    steps = []
    for s in proof.steps:
        f = _fill(s.formula, env)
        if isinstance(s, Premise):
            steps.append(Premise(s.index, f))
        elif isinstance(s, Axiom):
            steps.append(Axiom(s.name, f))
        elif isinstance(s, CSInstance):
            steps.append(CSInstance(f))
        else:
            steps.append(MP(s.imp, s.arg, f))
    return Proof(tuple(_fill(p, env) for p in proof.premises), tuple(steps))


@dataclass(frozen=True)
class QuasiRealization:
    disjuncts: tuple
    proof: Proof


def find_quasi(
    a: Formula,
    logic: LogicSpec,
    max_disjuncts: int = 2,
    max_term_depth: int = 6,
    certificate: Optional[Proof] = None,
    disjuncts: Optional[Sequence[Formula]] = None,
    max_depth: int = 6,
    budget: int = 20000,
) -> Optional[QuasiRealization]:
    """A quasi-realization of ``a`` with a proof of the disjunction.

    With ``certificate`` given, it and ``disjuncts`` are verified and
    returned. Otherwise a bounded search fills the F-box terms of the
    realization skeleton while building a proof; it may fail.
    """
    _require_annotated(a)
    if certificate is not None:
        if not disjuncts:
            raise InvalidCertificate("a certificate needs its list of disjuncts")
        for d in disjuncts:
            if not _quasi(F, d, a):
                raise InvalidCertificate(f"{print_formula(d)} is not a quasi-realization")
        rep = check_proof(certificate, logic)
        if not rep.valid:
            raise InvalidCertificate(f"certificate rejected at step {rep.step}: {rep.reason}")
        if certificate.premises:
            raise InvalidCertificate("certificate must not have premises")
        if rep.conclusion != big_or(list(disjuncts)):
            raise InvalidCertificate("certificate does not prove the disjunction")
        return QuasiRealization(tuple(disjuncts), certificate)

    prover = _Prover(logic, max_term_depth, budget)
    try:
        for width in range(1, max(1, max_disjuncts) + 1):
            counter = itertools.count(1)
            skeleton = _template(F, a, lambda _n: next(counter), width)
            found = _search(prover, skeleton, logic, max_depth, max_term_depth)
            if found is not None:
                return found
    except _Budget:
        return None
    return None


def _search(prover, skeleton, logic, max_depth, max_term_depth):
    for depth in range(1, max_depth + 1):
        for env, plan in prover.prove((), skeleton, depth, _Env()):
            psi = _fill(skeleton, env)
            b = ProofBuilder(logic)
            try:
                line = plan(b, env)
            except Exception:
                continue
            proof = _fill_proof(b.build(line), env)
            if proof.conclusion != psi or not check_proof(proof, logic).valid:
                continue
            if any(term_depth(t) > max_term_depth for t in _terms(psi)):
                continue
            return QuasiRealization((psi,), proof)
    return None


def _terms(f: Formula):
    if isinstance(f, Just):
        yield f.term
        yield from _terms(f.body)
    elif isinstance(f, (And, Or, Imp)):
        yield from _terms(f.left)
        yield from _terms(f.right)


# --------------------------------------------------------------------------
# Pipeline


@dataclass(frozen=True)
class Realization:
    psi: Formula
    proof: Proof
    sigma: JustSubstitution
    annotated: Formula
    quasi: QuasiRealization


def realize(
    phi: Formula,
    logic: LogicSpec,
    max_disjuncts: int = 2,
    max_term_depth: int = 6,
    certificate: Optional[Proof] = None,
    disjuncts: Optional[Sequence[Formula]] = None,
) -> Optional[Realization]:
    """Realize a modal formula, returning None when discovery fails."""
    a = phi if box_indices(phi) and uniquely_annotated(phi) else annotate(project(phi))
    q = find_quasi(a, logic, max_disjuncts, max_term_depth, certificate, disjuncts)
    if q is None:
        return None
    cond = condense(list(q.disjuncts), F, a, logic)
    b = ProofBuilder(logic)
    have = b.splice(subst_proof(q.proof, cond.sigma, logic))
    want = Imp(big_or(_dedupe(apply_just(cond.sigma, d) for d in q.disjuncts)), cond.psi)
    cert = b.splice(cond.certificate)
    if b.formula(cert) != want:
        raise AssertionError("condensation certificate has an unexpected shape")
    ds = [apply_just(cond.sigma, d) for d in q.disjuncts]
    uniq = _dedupe(ds)
    if big_or(ds) != big_or(uniq):
        have = b.or_cases(have, ds, big_or(uniq), lambda c, h, i: c.or_inject(h, uniq, uniq.index(ds[i])))
    line = b.mp(cert, have)
    proof = b.build(line)
    return Realization(cond.psi, proof, cond.sigma, a, q)
