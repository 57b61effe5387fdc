"""Finite Heyting algebras and the three algebraic model families.

Elements are integers ``0 .. size-1``. Models work on a finite fragment of
formulas closed under subformulas; a clause is checked only when every
formula it mentions lies in the fragment.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Optional

from . import _posets
from .calculus import LogicSpec, Proof, Axiom, CSInstance, MP, Premise, bc_formula, in_cs
from .errors import BoundExceeded, DomainError, ModelError, OutOfFragment, UnassignedAtom
from .syntax import (
    And,
    App,
    Atom,
    Bang,
    Bottom,
    BoxVar,
    Const,
    Formula,
    Imp,
    Just,
    Or,
    Sum,
    Term,
    Var,
    atoms,
    subformulas,
    formula_from_any,
    node_count,
    print_formula,
    print_term,
    parse_term,
    subterms,
    to_json,
)

MAX_ENUM_SIZE = 7


# --------------------------------------------------------------------------
# Heyting algebras


@dataclass(frozen=True)
class HeytingAlgebra:
    size: int
    meet: tuple
    join: tuple
    imp: tuple
    bot: int
    top: int
    name: str = ""

    def leq(self, x: int, y: int) -> bool:
        return self.meet[x][y] == x

    def neg(self, x: int) -> int:
        return self.imp[x][self.bot]

    def meet_all(self, xs: Iterable[int]) -> int:
        out = self.top
        for x in xs:
            out = self.meet[out][x]
        return out

    def join_all(self, xs: Iterable[int]) -> int:
        out = self.bot
        for x in xs:
            out = self.join[out][x]
        return out

    @property
    def is_chain(self) -> bool:
        return all(self.leq(x, y) or self.leq(y, x) for x in range(self.size) for y in range(self.size))

    def to_json(self) -> dict:
        return {
            "size": self.size,
            "meet": [list(r) for r in self.meet],
            "join": [list(r) for r in self.join],
            "imp": [list(r) for r in self.imp],
            "bot": self.bot,
            "top": self.top,
        }

    @classmethod
    def from_json(cls, d: dict) -> "HeytingAlgebra":
        t = lambda m: tuple(tuple(int(x) for x in r) for r in m)
        return cls(int(d["size"]), t(d["meet"]), t(d["join"]), t(d["imp"]), int(d["bot"]), int(d["top"]))


def make_goedel_chain(n: int) -> HeytingAlgebra:
    """The n-element Goedel chain 0 < 1 < ... < n-1."""
    if not isinstance(n, int) or n < 2:
        raise DomainError(f"a Goedel chain needs at least 2 elements, got {n}")
    r = range(n)
    meet = tuple(tuple(min(x, y) for y in r) for x in r)
    join = tuple(tuple(max(x, y) for y in r) for x in r)
    imp = tuple(tuple(n - 1 if x <= y else y for y in r) for x in r)
    return HeytingAlgebra(n, meet, join, imp, 0, n - 1, f"goedel:{n}")


def parse_algebra(text: str) -> HeytingAlgebra:
    """``goedel:N`` or ``diamond``."""
    if text.startswith("goedel:"):
        return make_goedel_chain(int(text.split(":", 1)[1]))
    if text == "diamond":
        return diamond()
    raise DomainError(f"unknown algebra {text!r}")


@dataclass(frozen=True)
class HeytingReport:
    valid: bool
    identity: Optional[str] = None
    witness: tuple = ()

    def __bool__(self):
        return self.valid

    def to_json(self) -> dict:
        return {"valid": self.valid, "identity": self.identity, "witness": list(self.witness)}


def validate_heyting(meet, join, imp, bot: int, top: int) -> HeytingReport:
    """Exhaustively check lattice, Heyting and residuation identities."""
    n = len(meet)
    shape_ok = (
        all(len(r) == n for tab in (meet, join, imp) for r in tab)
        and len(join) == n
        and len(imp) == n
        and 0 <= bot < n
        and 0 <= top < n
        and all(0 <= v < n for tab in (meet, join, imp) for r in tab for v in r)
    )
    if not shape_ok:
        return HeytingReport(False, "table shape", ())
    R = range(n)
    leq = lambda x, y: meet[x][y] == x

    def first(name, pred, arity):
        for w in itertools.product(R, repeat=arity):
            if not pred(*w):
                return HeytingReport(False, name, w)
        return None

    checks = [
        ("x & x = x", lambda x: meet[x][x] == x, 1),
        ("x | x = x", lambda x: join[x][x] == x, 1),
        ("x & y = y & x", lambda x, y: meet[x][y] == meet[y][x], 2),
        ("x | y = y | x", lambda x, y: join[x][y] == join[y][x], 2),
        ("x & (y & z) = (x & y) & z", lambda x, y, z: meet[x][meet[y][z]] == meet[meet[x][y]][z], 3),
        ("x | (y | z) = (x | y) | z", lambda x, y, z: join[x][join[y][z]] == join[join[x][y]][z], 3),
        ("x & (x | y) = x", lambda x, y: meet[x][join[x][y]] == x, 2),
        ("x | (x & y) = x", lambda x, y: join[x][meet[x][y]] == x, 2),
        ("0 <= x", lambda x: leq(bot, x), 1),
        ("x <= 1", lambda x: leq(x, top), 1),
        ("x -> x = 1", lambda x: imp[x][x] == top, 1),
        ("x & (x -> y) = x & y", lambda x, y: meet[x][imp[x][y]] == meet[x][y], 2),
        ("y & (x -> y) = y", lambda x, y: meet[y][imp[x][y]] == y, 2),
        ("x -> (y & z) = (x -> y) & (x -> z)", lambda x, y, z: imp[x][meet[y][z]] == meet[imp[x][y]][imp[x][z]], 3),
        ("x & y <= z iff x <= y -> z", lambda x, y, z: leq(meet[x][y], z) == leq(x, imp[y][z]), 3),
    ]
    for name, pred, arity in checks:
        bad = first(name, pred, arity)
        if bad is not None:
            return bad
    return HeytingReport(True)


def validate_algebra(A: HeytingAlgebra) -> HeytingReport:
    return validate_heyting(A.meet, A.join, A.imp, A.bot, A.top)


def _from_downsets(n: int, leq: frozenset, name: str = "") -> HeytingAlgebra:
    ds = sorted((frozenset(d) for d in _posets.downsets(n, leq)), key=lambda d: (len(d), sorted(d)))
    index = {d: i for i, d in enumerate(ds)}
    below = {x: {y for y in range(n) if (y, x) in leq} for x in range(n)}
    m = len(ds)

    def imp(a, b):
        return frozenset(x for x in range(n) if not ((below[x] & a) - b))

    meet = tuple(tuple(index[a & b] for b in ds) for a in ds)
    join = tuple(tuple(index[a | b] for b in ds) for a in ds)
    imps = tuple(tuple(index[imp(a, b)] for b in ds) for a in ds)
    return HeytingAlgebra(m, meet, join, imps, 0, m - 1, name)


def diamond() -> HeytingAlgebra:
    """The four-element Boolean algebra 2 x 2."""
    return _from_downsets(2, frozenset({(0, 0), (1, 1)}), "diamond")


def enumerate_heyting(max_size: int, include_trivial: bool = False) -> Iterator[HeytingAlgebra]:
    """All finite Heyting algebras with at most ``max_size`` elements, up to isomorphism.

    Finite Heyting algebras are the finite distributive lattices, which are
    the downset lattices of finite posets. Output is ordered by size and then
    by the canonical poset order. The one-element algebra is emitted only
    with ``include_trivial``.
    """
    if max_size > MAX_ENUM_SIZE:
        raise BoundExceeded(f"enumerate_heyting is guarded at size {MAX_ENUM_SIZE}")
    found = {}
    for k in range(0, max_size + 1):
        for leq in _posets.posets(k):
            A = _from_downsets(k, leq)
            if A.size <= max_size:
                found.setdefault(A.size, []).append(A)
    for size in sorted(found):
        if size == 1 and not include_trivial:
            continue
        for i, A in enumerate(found[size]):
            yield HeytingAlgebra(A.size, A.meet, A.join, A.imp, A.bot, A.top, f"heyting:{size}.{i}")


def is_isomorphic(A: HeytingAlgebra, B: HeytingAlgebra) -> bool:
    if A.size != B.size:
        return False
    n = A.size
    rank = lambda H: [sum(1 for y in range(n) if H.leq(y, x)) for x in range(n)]
    ra, rb = rank(A), rank(B)
    if sorted(ra) != sorted(rb):
        return False
    cands = [[y for y in range(n) if rb[y] == ra[x]] for x in range(n)]

    def extend(f):
        x = len(f)
        if x == n:
            return True
        for y in cands[x]:
            if y in f:
                continue
            if all(A.leq(x, x2) == B.leq(y, f[x2]) and A.leq(x2, x) == B.leq(f[x2], y) for x2 in range(x)):
                if extend(f + [y]):
                    return True
        return False

    return extend([])


# --------------------------------------------------------------------------
# Propositional evaluation


def eval_prop(A: HeytingAlgebra, assignment: dict, phi: Formula) -> int:
    """Homomorphic value; star formulas treat each ``{t:body}`` as an atom."""
    if isinstance(phi, Bottom):
        return A.bot
    if isinstance(phi, (Atom, BoxVar)):
        if phi in assignment:
            return assignment[phi]
        if isinstance(phi, Atom) and phi.index in assignment:
            return assignment[phi.index]
        raise UnassignedAtom(f"no value for {print_formula(phi)}")
    if isinstance(phi, And):
        return A.meet[eval_prop(A, assignment, phi.left)][eval_prop(A, assignment, phi.right)]
    if isinstance(phi, Or):
        return A.join[eval_prop(A, assignment, phi.left)][eval_prop(A, assignment, phi.right)]
    if isinstance(phi, Imp):
        return A.imp[eval_prop(A, assignment, phi.left)][eval_prop(A, assignment, phi.right)]
    raise UnassignedAtom(f"{print_formula(phi)} is not propositional")


def _letters(k: int) -> list:
    return [Atom(i) for i in range(1, k + 1)]


def _scheme_instances(base: str, n: Optional[int]) -> list:
    L = _letters(3)
    p, q = L[0], L[1]
    out = []
    if base in ("G", "Gn"):
        out.append(("LIN", Or(Imp(p, q), Imp(q, p))))
    if base == "Gn":
        out.append((f"BC{n - 1}", bc_formula(n - 1, _letters(n))))
    if base in ("KC", "C"):
        out.append(("WLEM", Or(Imp(p, Bottom()), Imp(Imp(p, Bottom()), Bottom()))))
    if base == "C":
        out.append(("LEM", Or(p, Imp(p, Bottom()))))
    return out


def valid_in(A: HeytingAlgebra, phi: Formula) -> Optional[dict]:
    """None when ``phi`` is top under every assignment, else a falsifying one."""
    letters = sorted(atoms(phi))
    for vals in itertools.product(range(A.size), repeat=len(letters)):
        asg = dict(zip(letters, vals))
        if eval_prop(A, asg, phi) != A.top:
            return asg
    return None


def algebra_validates_base(A: HeytingAlgebra, base: str, n: Optional[int] = None) -> bool:
    return all(valid_in(A, f) is None for _, f in _scheme_instances(base, n))


# --------------------------------------------------------------------------
# Model families


def _just_formulas(fragment) -> list:
    return [f for f in fragment if isinstance(f, Just)]


def _check_closed(fragment: frozenset) -> None:
    for f in fragment:
        for g in subformulas(f):
            if g not in fragment:
                raise ModelError(f"fragment not closed under subformulas: {print_formula(g)} missing")


@dataclass(frozen=True)
class ModelReport:
    valid: bool
    violations: tuple = ()

    def __bool__(self):
        return self.valid

    def to_json(self) -> dict:
        return {"valid": self.valid, "violations": list(self.violations)}


@dataclass(frozen=True)
class AlgMkrtychevModel:
    """Valuation on a fragment; compound non-justification entries are optional."""

    algebra: HeytingAlgebra
    fragment: frozenset
    valuation: dict = field(hash=False, compare=False)
    factive: bool = False
    introspective: bool = False
    cs: Optional[LogicSpec] = None


@dataclass(frozen=True)
class AlgFittingModel:
    algebra: HeytingAlgebra
    worlds: tuple
    R: dict = field(hash=False, compare=False)
    evidence: dict = field(hash=False, compare=False)
    valuation: dict = field(hash=False, compare=False)
    fragment: frozenset = frozenset()
    reflexive: bool = False
    transitive: bool = False
    monotone: bool = False
    introspective: bool = False
    crisp: bool = False
    cs: Optional[LogicSpec] = None


@dataclass(frozen=True)
class AlgSubsetModel:
    algebra: HeytingAlgebra
    worlds: tuple
    base_worlds: tuple
    evidence: dict = field(hash=False, compare=False)
    valuation: dict = field(hash=False, compare=False)
    fragment: frozenset = frozenset()
    reflexive: bool = False
    introspective: bool = False
    crisp: bool = False
    cs: Optional[LogicSpec] = None


def _in(m, phi):
    if phi not in m.fragment:
        raise OutOfFragment(f"{print_formula(phi)} is outside the fragment")


def eval_mkrtychev(m: AlgMkrtychevModel, phi: Formula) -> int:
    _in(m, phi)
    A = m.algebra
    if isinstance(phi, (Atom, Just)):
        if phi not in m.valuation:
            raise UnassignedAtom(f"no value for {print_formula(phi)}")
        return m.valuation[phi]
    if isinstance(phi, Bottom):
        return A.bot
    l, r = eval_mkrtychev(m, phi.left), eval_mkrtychev(m, phi.right)
    return {And: A.meet, Or: A.join, Imp: A.imp}[type(phi)][l][r]


def _ev(m: AlgFittingModel, w, t: Term, phi: Formula) -> int:
    try:
        return m.evidence[(w, t, phi)]
    except KeyError:
        raise ModelError(f"no evidence entry for world {w}, {print_term(t)}, {print_formula(phi)}") from None


def eval_fitting(m: AlgFittingModel, w, phi: Formula) -> int:
    _in(m, phi)
    A = m.algebra
    if isinstance(phi, Bottom):
        return A.bot
    if isinstance(phi, Atom):
        try:
            return m.valuation[(w, phi)]
        except KeyError:
            raise UnassignedAtom(f"no value for {print_formula(phi)} at {w}") from None
    if isinstance(phi, Just):
        box = A.meet_all(A.imp[m.R[(w, v)]][eval_fitting(m, v, phi.body)] for v in m.worlds)
        return A.meet[_ev(m, w, phi.term, phi.body)][box]
    l, r = eval_fitting(m, w, phi.left), eval_fitting(m, w, phi.right)
    return {And: A.meet, Or: A.join, Imp: A.imp}[type(phi)][l][r]


def _es(m: AlgSubsetModel, t: Term, w, v) -> int:
    try:
        return m.evidence[(t, w, v)]
    except KeyError:
        raise ModelError(f"no evidence entry for {print_term(t)} at ({w}, {v})") from None


def eval_subset(m: AlgSubsetModel, w, phi: Formula) -> int:
    _in(m, phi)
    A = m.algebra
    if w not in m.base_worlds:
        try:
            return m.valuation[(w, phi)]
        except KeyError:
            if isinstance(phi, Bottom):
                return A.bot
            raise UnassignedAtom(f"no value for {print_formula(phi)} at {w}") from None
    if isinstance(phi, Bottom):
        return A.bot
    if isinstance(phi, Atom):
        try:
            return m.valuation[(w, phi)]
        except KeyError:
            raise UnassignedAtom(f"no value for {print_formula(phi)} at {w}") from None
    if isinstance(phi, Just):
        return A.meet_all(A.imp[_es(m, phi.term, w, v)][eval_subset(m, v, phi.body)] for v in m.worlds)
    l, r = eval_subset(m, w, phi.left), eval_subset(m, w, phi.right)
    return {And: A.meet, Or: A.join, Imp: A.imp}[type(phi)][l][r]


def _fragment_terms(fragment) -> set:
    out = set()
    for f in _just_formulas(fragment):
        out |= set(subterms(f.term))
    return out


def _app_instances(fragment):
    """Triples (t:(a->b), s:a, (t.s):b) inside the fragment."""
    js = _just_formulas(fragment)
    for f in js:
        if isinstance(f.term, App):
            t, s = f.term.left, f.term.right
            for g in js:
                if g.term == t and isinstance(g.body, Imp) and g.body.right == f.body:
                    h = Just(s, g.body.left)
                    if h in fragment:
                        yield g, h, f


def _sum_instances(fragment):
    """Pairs (t:a, (t+s):a) and (s:a, (t+s):a) inside the fragment."""
    for f in _just_formulas(fragment):
        if isinstance(f.term, Sum):
            for part in (f.term.left, f.term.right):
                g = Just(part, f.body)
                if g in fragment:
                    yield g, f


def _bang_instances(fragment):
    for f in _just_formulas(fragment):
        if isinstance(f.term, Bang) and isinstance(f.body, Just) and f.body.term == f.term.term:
            yield f.body, f


def _cs_members(m) -> list:
    if m.cs is None:
        return []
    return [f for f in _just_formulas(m.fragment) if isinstance(f.term, Const) and in_cs(f, m.cs)]


def validate_alg_model(m) -> ModelReport:
    if isinstance(m, AlgMkrtychevModel):
        return _validate_mkrtychev(m)
    if isinstance(m, AlgFittingModel):
        return _validate_fitting(m)
    if isinstance(m, AlgSubsetModel):
        return _validate_subset(m)
    raise ModelError(f"not an algebraic model: {type(m).__name__}")


def _validate_mkrtychev(m: AlgMkrtychevModel) -> ModelReport:
    _check_closed(m.fragment)
    A, bad = m.algebra, []
    V = lambda f: eval_mkrtychev(m, f)
    for f in m.fragment:
        if isinstance(f, (Atom, Just)) and f not in m.valuation:
            bad.append(f"missing value for {print_formula(f)}")
    if bad:
        return ModelReport(False, tuple(bad))
    for f, given in m.valuation.items():
        if f not in m.fragment:
            bad.append(f"valuation outside fragment: {print_formula(f)}")
        elif not isinstance(f, (Atom, Just)) and given != V(f):
            bad.append(f"clause for {print_formula(f)}: table {given}, computed {V(f)}")
    for g, h, f in _app_instances(m.fragment):
        if not A.leq(A.meet[V(g)][V(h)], V(f)):
            bad.append(f"(i) {print_formula(g)}, {print_formula(h)} vs {print_formula(f)}")
    for g, f in _sum_instances(m.fragment):
        if not A.leq(V(g), V(f)):
            bad.append(f"(ii) {print_formula(g)} vs {print_formula(f)}")
    if m.factive:
        for f in _just_formulas(m.fragment):
            if not A.leq(V(f), V(f.body)):
                bad.append(f"factive {print_formula(f)}")
    if m.introspective:
        for g, f in _bang_instances(m.fragment):
            if not A.leq(V(g), V(f)):
                bad.append(f"introspective {print_formula(g)}")
    for f in _cs_members(m):
        if V(f) != A.top:
            bad.append(f"CS {print_formula(f)} not top")
    return ModelReport(not bad, tuple(bad))


def _validate_fitting(m: AlgFittingModel) -> ModelReport:
    _check_closed(m.fragment)
    A, W, bad = m.algebra, m.worlds, []
    if not W:
        return ModelReport(False, ("no worlds",))
    for w in W:
        for v in W:
            if (w, v) not in m.R:
                bad.append(f"R({w},{v}) missing")
        for f in m.fragment:
            if isinstance(f, Atom) and (w, f) not in m.valuation:
                bad.append(f"no value for {print_formula(f)} at {w}")
            if isinstance(f, Just) and (w, f.term, f.body) not in m.evidence:
                bad.append(f"no evidence for {print_formula(f)} at {w}")
    if bad:
        return ModelReport(False, tuple(bad))
    for (w, f), given in m.valuation.items():
        if f not in m.fragment or w not in W:
            bad.append(f"valuation outside the model: {w}, {print_formula(f)}")
        elif not isinstance(f, Atom) and given != eval_fitting(m, w, f):
            bad.append(f"clause for {print_formula(f)} at {w}: table {given}, computed {eval_fitting(m, w, f)}")
    E = lambda w, f: m.evidence[(w, f.term, f.body)]
    for w in W:
        for g, h, f in _app_instances(m.fragment):
            if not A.leq(A.meet[E(w, g)][E(w, h)], E(w, f)):
                bad.append(f"(i) at {w}: {print_formula(f)}")
        for g, f in _sum_instances(m.fragment):
            if not A.leq(E(w, g), E(w, f)):
                bad.append(f"(ii) at {w}: {print_formula(f)}")
    if m.reflexive:
        bad += [f"R({w},{w}) not top" for w in W if m.R[(w, w)] != A.top]
    if m.transitive or m.introspective:
        for w, v, u in itertools.product(W, repeat=3):
            if not A.leq(A.meet[m.R[(w, v)]][m.R[(v, u)]], m.R[(w, u)]):
                bad.append(f"transitivity at ({w},{v},{u})")
    if m.monotone or m.introspective:
        for f in _just_formulas(m.fragment):
            for w, v in itertools.product(W, repeat=2):
                if not A.leq(A.meet[E(w, f)][m.R[(w, v)]], E(v, f)):
                    bad.append(f"monotone {print_formula(f)} from {w} to {v}")
    if m.introspective:
        for g, f in _bang_instances(m.fragment):
            for w in W:
                if not A.leq(E(w, g), E(w, f)):
                    bad.append(f"introspective {print_formula(g)} at {w}")
    if m.crisp:
        bad += [f"R({w},{v}) not crisp" for (w, v), x in m.R.items() if x not in (A.bot, A.top)]
    for f in _cs_members(m):
        for w in W:
            if eval_fitting(m, w, f) != A.top:
                bad.append(f"CS {print_formula(f)} not top at {w}")
    return ModelReport(not bad, tuple(bad))


def _subset_bounds(m: AlgSubsetModel, w, v) -> dict:
    """Upper bounds on evidence entries at (w, v) imposed by regularity and flags."""
    A = m.algebra
    terms = _fragment_terms(m.fragment)
    js = _just_formulas(m.fragment)
    V = lambda x, f: eval_subset(m, x, f)
    out = {}

    def cap(t, x):
        out[t] = A.meet[out.get(t, A.top)][x]

    for t in terms:
        if isinstance(t, Sum):
            cap(t, A.meet[_es(m, t.left, w, v)][_es(m, t.right, w, v)])
        if isinstance(t, App):
            s, u = t.left, t.right
            sup = {}
            for g in js:
                if g.term == s and isinstance(g.body, Imp) and Just(u, g.body.left) in m.fragment:
                    psi = g.body.right
                    val = A.meet[V(w, g)][V(w, Just(u, g.body.left))]
                    sup[psi] = A.join[sup.get(psi, A.bot)][val]
            cap(t, A.meet_all(A.imp[x][V(v, psi)] for psi, x in sup.items()))
        if isinstance(t, Bang) and m.introspective:
            cap(t, A.meet_all(A.imp[V(w, g)][V(v, g)] for g in js if g.term == t.term))
    for f in _cs_members(m):
        cap(f.term, V(v, f.body))
    return out


def _validate_subset(m: AlgSubsetModel) -> ModelReport:
    _check_closed(m.fragment)
    A, W, bad = m.algebra, m.worlds, []
    if not W or not m.base_worlds or not set(m.base_worlds) <= set(W):
        return ModelReport(False, ("base worlds must be a nonempty subset of the worlds",))
    terms = _fragment_terms(m.fragment)
    for t in terms:
        for w in W:
            for v in W:
                if (t, w, v) not in m.evidence:
                    bad.append(f"no evidence for {print_term(t)} at ({w},{v})")
    for w in W:
        for f in m.fragment:
            need = isinstance(f, Atom) or w not in m.base_worlds
            if need and not isinstance(f, Bottom) and (w, f) not in m.valuation:
                bad.append(f"no value for {print_formula(f)} at {w}")
    if bad:
        return ModelReport(False, tuple(bad))
    for w in m.base_worlds:
        for (x, f), given in m.valuation.items():
            if x == w and not isinstance(f, Atom) and given != eval_subset(m, w, f):
                bad.append(f"clause for {print_formula(f)} at {w}")
        for v in W:
            for t, ub in _subset_bounds(m, w, v).items():
                if not A.leq(_es(m, t, w, v), ub):
                    bad.append(f"evidence {print_term(t)} at ({w},{v}) exceeds its bound")
        if m.reflexive:
            bad += [f"E_{print_term(t)}({w},{w}) not top" for t in terms if _es(m, t, w, w) != A.top]
    if m.crisp:
        for t in terms:
            for w, v in itertools.product(m.base_worlds, repeat=2):
                if _es(m, t, w, v) not in (A.bot, A.top):
                    bad.append(f"E_{print_term(t)}({w},{v}) not crisp")
    return ModelReport(not bad, tuple(bad))


# --------------------------------------------------------------------------
# Local soundness


@dataclass(frozen=True)
class SoundnessReport:
    sound: bool
    premises_hold: bool
    conclusion_value: int
    step: Optional[int] = None
    note: str = ""

    def __bool__(self):
        return self.sound

    def to_json(self) -> dict:
        return {
            "sound": self.sound,
            "premises_hold": self.premises_hold,
            "conclusion_value": self.conclusion_value,
            "step": self.step,
            "note": self.note,
        }


def evaluate(m, w, phi: Formula) -> int:
    if isinstance(m, AlgMkrtychevModel):
        return eval_mkrtychev(m, phi)
    if isinstance(m, AlgFittingModel):
        return eval_fitting(m, w, phi)
    if isinstance(m, AlgSubsetModel):
        return eval_subset(m, w, phi)
    raise ModelError(f"not an algebraic model: {type(m).__name__}")


def local_soundness(proof: Proof, m, w=None) -> SoundnessReport:
    """Check that ``proof`` cannot lead from true premises to a non-top conclusion at ``w``.

    Axiom and CS lines must evaluate to top in any model of the matching
    class; a line that does not is reported, as it means the model was not
    validated for this logic.
    """
    A = m.algebra
    vals = [evaluate(m, w, s.formula) for s in proof.steps]
    premises_hold = all(evaluate(m, w, p) == A.top for p in proof.premises)
    concl = vals[-1] if vals else A.top
    for i, s in enumerate(proof.steps):
        if isinstance(s, (Axiom, CSInstance)) and vals[i] != A.top:
            kind = "axiom" if isinstance(s, Axiom) else "CS instance"
            return SoundnessReport(
                False, premises_hold, concl, i, f"{kind} below top: model is not in the class of the logic"
            )
        if isinstance(s, MP) and vals[s.imp] == A.top and vals[s.arg] == A.top and vals[i] != A.top:
            return SoundnessReport(False, premises_hold, concl, i, "modus ponens did not preserve top")
        if isinstance(s, Premise) and premises_hold and vals[i] != A.top:
            return SoundnessReport(False, premises_hold, concl, i, "premise value mismatch")
    if premises_hold and concl != A.top:
        return SoundnessReport(False, premises_hold, concl, len(vals) - 1, "conclusion below top")
    return SoundnessReport(True, premises_hold, concl)


# --------------------------------------------------------------------------
# Random models


def proof_fragment(proof: Proof, extra: Iterable[Formula] = ()) -> frozenset:
    out = set()
    for f in list(proof.formulas()) + list(proof.premises) + list(extra):
        out |= subformulas(f)
    return frozenset(out)


def _fitting_flags(logic: LogicSpec) -> dict:
    return {
        "reflexive": logic.factive,
        "transitive": logic.introspective,
        "monotone": logic.introspective,
        "introspective": logic.introspective,
    }


def random_fitting_model(
    A: HeytingAlgebra, fragment: frozenset, logic: LogicSpec, rng: random.Random, worlds: int = 2, crisp: bool = False
) -> AlgFittingModel:
    """A random Fitting model of the class of ``logic``, closed up to satisfy the clauses."""
    W = tuple(range(worlds))
    pick = (lambda: rng.choice((A.bot, A.top))) if crisp else (lambda: rng.randrange(A.size))
    flags = _fitting_flags(logic)
    R = {(w, v): pick() for w in W for v in W}
    if flags["reflexive"]:
        for w in W:
            R[(w, w)] = A.top
    if flags["transitive"]:
        changed = True
        while changed:
            changed = False
            for w, v, u in itertools.product(W, repeat=3):
                x = A.join[R[(w, u)]][A.meet[R[(w, v)]][R[(v, u)]]]
                if x != R[(w, u)]:
                    R[(w, u)], changed = x, True
    js = _just_formulas(fragment)
    cs = [f for f in js if isinstance(f.term, Const) and in_cs(f, logic)]
    E = {(w, f.term, f.body): rng.randrange(A.size) for w in W for f in js}
    for w in W:
        for f in cs:
            E[(w, f.term, f.body)] = A.top
    apps = list(_app_instances(fragment))
    sums = list(_sum_instances(fragment))
    bangs = list(_bang_instances(fragment))
    key = lambda w, f: (w, f.term, f.body)
    changed = True
    while changed:
        changed = False

        def raise_to(k, x):
            nonlocal changed
            y = A.join[E[k]][x]
            if y != E[k]:
                E[k], changed = y, True

        for w in W:
            for g, h, f in apps:
                raise_to(key(w, f), A.meet[E[key(w, g)]][E[key(w, h)]])
            for g, f in sums:
                raise_to(key(w, f), E[key(w, g)])
            if flags["introspective"]:
                for g, f in bangs:
                    raise_to(key(w, f), E[key(w, g)])
        if flags["monotone"]:
            for f in js:
                for w, v in itertools.product(W, repeat=2):
                    raise_to(key(v, f), A.meet[E[key(w, f)]][R[(w, v)]])
    val = {(w, a): rng.randrange(A.size) for w in W for a in fragment if isinstance(a, Atom)}
    return AlgFittingModel(A, W, R, E, val, fragment, crisp=crisp, cs=logic, **flags)


def random_mkrtychev_model(
    A: HeytingAlgebra, fragment: frozenset, logic: LogicSpec, rng: random.Random
) -> AlgMkrtychevModel:
    """The valuation a random Fitting model induces at one of its worlds."""
    fm = random_fitting_model(A, fragment, logic, rng, worlds=rng.randint(1, 2))
    w = rng.choice(fm.worlds)
    val = {f: eval_fitting(fm, w, f) for f in fragment if isinstance(f, (Atom, Just))}
    return AlgMkrtychevModel(A, fragment, val, logic.factive, logic.introspective, logic)


def random_subset_model(
    A: HeytingAlgebra, fragment: frozenset, logic: LogicSpec, rng: random.Random, worlds: int = 2, base: int = 1
) -> AlgSubsetModel:
    """Random evidence lowered until regularity and the flags hold."""
    W = tuple(range(worlds))
    B = W[:base]
    terms = _fragment_terms(fragment)
    reflexive, introspective = logic.factive, logic.introspective
    E = {(t, w, v): rng.randrange(A.size) for t in terms for w in W for v in W}
    if reflexive:
        for t in terms:
            for w in B:
                E[(t, w, w)] = A.top
    val = {}
    for w in W:
        for f in fragment:
            if isinstance(f, Atom) or w not in B:
                val[(w, f)] = rng.randrange(A.size)
    m = AlgSubsetModel(A, W, B, E, val, fragment, reflexive, introspective, cs=logic)
    for _ in range(10 * (len(E) + 1)):
        changed = False
        for w in B:
            for v in W:
                for t, ub in _subset_bounds(m, w, v).items():
                    x = A.meet[E[(t, w, v)]][ub]
                    if x != E[(t, w, v)]:
                        E[(t, w, v)], changed = x, True
        if not changed:
            break
    return m


# --------------------------------------------------------------------------
# JSON


def _term_text(t: Term) -> str:
    return print_term(t)


def model_to_json(m) -> dict:
    if isinstance(m, AlgMkrtychevModel):
        return {
            "kind": "alg-mkrtychev",
            "algebra": m.algebra.to_json(),
            "fragment": sorted(print_formula(f) for f in m.fragment),
            "valuation": sorted(([print_formula(f), x] for f, x in m.valuation.items())),
            "factive": m.factive,
            "introspective": m.introspective,
        }
    if isinstance(m, AlgFittingModel):
        return {
            "kind": "alg-fitting",
            "algebra": m.algebra.to_json(),
            "worlds": list(m.worlds),
            "fragment": sorted(print_formula(f) for f in m.fragment),
            "R": sorted([w, v, x] for (w, v), x in m.R.items()),
            "evidence": sorted([w, _term_text(t), print_formula(f), x] for (w, t, f), x in m.evidence.items()),
            "valuation": sorted([w, print_formula(f), x] for (w, f), x in m.valuation.items()),
            "flags": sorted(k for k in ("reflexive", "transitive", "monotone", "introspective", "crisp") if getattr(m, k)),
        }
    if isinstance(m, AlgSubsetModel):
        return {
            "kind": "alg-subset",
            "algebra": m.algebra.to_json(),
            "worlds": list(m.worlds),
            "base_worlds": list(m.base_worlds),
            "fragment": sorted(print_formula(f) for f in m.fragment),
            "evidence": sorted([_term_text(t), w, v, x] for (t, w, v), x in m.evidence.items()),
            "valuation": sorted([w, print_formula(f), x] for (w, f), x in m.valuation.items()),
            "flags": sorted(k for k in ("reflexive", "introspective", "crisp") if getattr(m, k)),
        }
    raise ModelError(f"not an algebraic model: {type(m).__name__}")


def model_from_json(d: dict, logic: Optional[LogicSpec] = None):
    kind = d.get("kind")
    A = HeytingAlgebra.from_json(d["algebra"])
    frag = frozenset(formula_from_any(f) for f in d["fragment"])
    flags = set(d.get("flags", ()))
    if kind == "alg-mkrtychev":
        val = {formula_from_any(f): int(x) for f, x in d["valuation"]}
        return AlgMkrtychevModel(A, frag, val, bool(d.get("factive")), bool(d.get("introspective")), logic)
    if kind == "alg-fitting":
        W = tuple(d["worlds"])
        R = {(w, v): int(x) for w, v, x in d["R"]}
        E = {(w, parse_term(t), formula_from_any(f)): int(x) for w, t, f, x in d["evidence"]}
        val = {(w, formula_from_any(f)): int(x) for w, f, x in d["valuation"]}
        return AlgFittingModel(
            A, W, R, E, val, frag,
            reflexive="reflexive" in flags,
            transitive="transitive" in flags,
            monotone="monotone" in flags,
            introspective="introspective" in flags,
            crisp="crisp" in flags,
            cs=logic,
        )
    if kind == "alg-subset":
        W = tuple(d["worlds"])
        E = {(parse_term(t), w, v): int(x) for t, w, v, x in d["evidence"]}
        val = {(w, formula_from_any(f)): int(x) for w, f, x in d["valuation"]}
        return AlgSubsetModel(
            A, W, tuple(d["base_worlds"]), E, val, frag,
            reflexive="reflexive" in flags,
            introspective="introspective" in flags,
            crisp="crisp" in flags,
            cs=logic,
        )
    raise ModelError(f"unknown algebraic model kind {kind!r}")
