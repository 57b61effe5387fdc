"""Intuitionistic Kripke frames and the frame-based model families.

Worlds are ``0 .. size-1``. Valuations are sets of ``(world, atom index)``
pairs. Evidence for Mkrtychev and Fitting models maps ``(term, world)`` to a
set of formulas, with missing entries read as empty. Subset models store
their truth table over the fragment for every world.
"""

from __future__ import annotations

import itertools
import os
import random
from dataclasses import dataclass, field
from typing import Callable, Iterable, Optional

from pysat.formula import IDPool
from pysat.solvers import Solver

from . import _posets
from .algebra import ModelReport, SoundnessReport
from .calculus import IPCJ, MP, Axiom, CSInstance, LogicSpec, bc_formula, in_cs
from .errors import BoundExceeded, ModelError, OutOfFragment
from .syntax import (
    BOT,
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
    formula_from_any,
    language_of,
    neg,
    parse_term,
    print_formula,
    print_term,
    subformulas,
    subterms,
)

# --------------------------------------------------------------------------
# Frames


@dataclass(frozen=True)
class Frame:
    """A finite poset; ``leq`` holds the pairs ``(x, y)`` with ``x <= y``."""

    size: int
    leq: frozenset

    def __post_init__(self):
        object.__setattr__(self, "leq", frozenset(self.leq))
        if any(not (0 <= x < self.size and 0 <= y < self.size) for x, y in self.leq):
            raise ModelError("frame relation mentions a world outside the frame")
        if not _posets.is_partial_order(self.size, self.leq):
            raise ModelError("frame relation is not a partial order")

    @property
    def worlds(self) -> range:
        return range(self.size)

    def le(self, x: int, y: int) -> bool:
        return (x, y) in self.leq

    def up(self, x: int) -> list:
        return [y for y in self.worlds if (x, y) in self.leq]

    def matrix(self) -> list:
        return [[self.le(x, y) for y in self.worlds] for x in self.worlds]

    @classmethod
    def from_matrix(cls, rows) -> "Frame":
        return cls(len(rows), frozenset((x, y) for x, row in enumerate(rows) for y, b in enumerate(row) if b))

    @classmethod
    def chain(cls, n: int) -> "Frame":
        return cls(n, frozenset((x, y) for x in range(n) for y in range(x, n)))

    def to_json(self) -> dict:
        return {"size": self.size, "leq": self.matrix()}

    @classmethod
    def from_json(cls, d: dict) -> "Frame":
        return cls.from_matrix(d["leq"])


def v_frame() -> Frame:
    """One bottom below two incomparable tops."""
    return Frame(3, frozenset({(0, 0), (1, 1), (2, 2), (0, 1), (0, 2)}))


def diamond_frame() -> Frame:
    return Frame(4, frozenset({(x, x) for x in range(4)} | {(0, 1), (0, 2), (0, 3), (1, 3), (2, 3)}))


def _parse_property(p) -> tuple:
    if isinstance(p, tuple):
        return p
    p = p.strip()
    if p in ("connected", "directed"):
        return (p, None)
    if p.startswith("bounded(") and p.endswith(")"):
        return ("bounded", int(p[8:-1]))
    raise ValueError(f"unknown frame property {p!r}")


def frame_property(f: Frame, p) -> bool:
    """``connected``, ``directed`` or ``bounded(n)``; the last means every cone has at most n worlds."""
    name, n = _parse_property(p)
    W = f.worlds
    if name == "connected":
        return all(f.le(y, z) or f.le(z, y) for x in W for y in f.up(x) for z in f.up(x))
    if name == "directed":
        return all(
            any(f.le(y, w) and f.le(z, w) for w in W) for x in W for y in f.up(x) for z in f.up(x)
        )
    if n < 1:
        raise ValueError("bounded(n) needs n >= 1")
    return all(len(f.up(x)) <= n for x in W)


def in_frame_class(f: Frame, logic: LogicSpec) -> bool:
    base = logic.base
    if base == "IPC":
        return True
    if base == "G":
        return frame_property(f, "connected")
    if base == "Gn":
        return frame_property(f, "connected") and frame_property(f, ("bounded", logic.n - 1))
    if base == "KC":
        return frame_property(f, "directed")
    return frame_property(f, ("bounded", 1))


def enumerate_frames(max_size: int, min_size: int = 1) -> Iterable[Frame]:
    """All frames up to isomorphism, by size and then canonical matrix order."""
    for n in range(min_size, max_size + 1):
        for leq in _posets.posets(n):
            yield Frame(n, leq)


def is_isomorphic(f: Frame, g: Frame) -> bool:
    if f.size != g.size:
        return False
    return _posets.canonical(f.size, f.leq) == _posets.canonical(g.size, g.leq)


# --------------------------------------------------------------------------
# Models


def _has_const(t: Term) -> bool:
    return any(isinstance(s, Const) for s in subterms(t))


@dataclass(frozen=True)
class IntMkrtychevModel:
    """``t:phi`` holds at x iff phi is in ``E_t(x)``.

    With ``universal_constants`` every term containing a constant carries
    every formula as evidence.
    """

    frame: Frame
    evidence: dict = field(hash=False, compare=False)
    valuation: frozenset
    fragment: Optional[frozenset] = None
    factive: bool = False
    introspective: bool = False
    cs: Optional[LogicSpec] = None
    universal_constants: bool = False


@dataclass(frozen=True)
class IntFittingModel:
    frame: Frame
    R: frozenset
    evidence: dict = field(hash=False, compare=False)
    valuation: frozenset
    fragment: Optional[frozenset] = None
    reflexive: bool = False
    transitive: bool = False
    monotone: bool = False
    introspective: bool = False
    cs: Optional[LogicSpec] = None
    universal_constants: bool = False


@dataclass(frozen=True)
class IntSubsetModel:
    """Base worlds are ``0 .. frame.size-1``; worlds up to ``worlds-1`` are extra.

    ``evidence`` maps a term to pairs ``(x, y)`` meaning ``y in E_t[x]``;
    ``table`` holds the pairs ``(world, formula)`` that are forced.
    """

    frame: Frame
    worlds: int
    evidence: dict = field(hash=False, compare=False)
    table: frozenset
    fragment: frozenset
    reflexive: bool = False
    introspective: bool = False
    cs: Optional[LogicSpec] = None


@dataclass(frozen=True)
class IntModalModel:
    frame: Frame
    R: frozenset
    valuation: frozenset
    reflexive: bool = False
    transitive: bool = False


_MODELS = (IntMkrtychevModel, IntFittingModel, IntSubsetModel, IntModalModel)


def _check_kind(m) -> None:
    if not isinstance(m, _MODELS):
        raise ModelError(f"not an intuitionistic Kripke model: {type(m).__name__}")


def _worlds(m) -> range:
    return range(m.worlds) if isinstance(m, IntSubsetModel) else m.frame.worlds


def _universal(m, t: Term) -> bool:
    return getattr(m, "universal_constants", False) and _has_const(t)


def _ev(m, t: Term, x: int) -> frozenset:
    return m.evidence.get((t, x), frozenset())


def _has(m, t: Term, x: int, phi: Formula) -> bool:
    return _universal(m, t) or phi in _ev(m, t, x)


def _rel(m, t: Term) -> frozenset:
    return m.evidence.get(t, frozenset())


def _succ(m, x: int) -> list:
    return [y for y in m.frame.worlds if (x, y) in m.R]


def eval_int(m, w: int, phi: Formula) -> bool:
    _check_kind(m)
    phi = formula_from_any(phi)
    if w not in _worlds(m):
        raise ModelError(f"no world {w}")
    frag = getattr(m, "fragment", None)
    if frag is not None and phi not in frag:
        raise OutOfFragment(f"{print_formula(phi)} is not in the fragment")
    if isinstance(m, IntSubsetModel):
        return _eval_subset(m, w, phi)
    return _Eval(m).value(w, phi)


class _Eval:
    def __init__(self, m):
        self.m = m
        self.memo: dict = {}

    def value(self, x: int, phi: Formula) -> bool:
        key = (x, phi)
        if key not in self.memo:
            self.memo[key] = self._compute(x, phi)
        return self.memo[key]

    def _compute(self, x: int, phi: Formula) -> bool:
        m = self.m
        if isinstance(phi, Bottom):
            return False
        if isinstance(phi, Atom):
            return (x, phi.index) in m.valuation
        if isinstance(phi, And):
            return self.value(x, phi.left) and self.value(x, phi.right)
        if isinstance(phi, Or):
            return self.value(x, phi.left) or self.value(x, phi.right)
        if isinstance(phi, Imp):
            return all(not self.value(y, phi.left) or self.value(y, phi.right) for y in m.frame.up(x))
        if isinstance(phi, Just):
            if isinstance(m, IntModalModel):
                raise ModelError("modal models do not interpret justification formulas")
            if not _has(m, phi.term, x, phi.body):
                return False
            if isinstance(m, IntMkrtychevModel):
                return True
            return all(self.value(y, phi.body) for y in _succ(m, x))
        if isinstance(phi, Box):
            if not isinstance(m, IntModalModel):
                raise ModelError("only modal models interpret boxes")
            return all(self.value(y, phi.body) for y in _succ(m, x))
        raise ModelError(f"cannot evaluate {print_formula(phi)}")


def _subset_clause(m: IntSubsetModel, x: int, phi: Formula) -> bool:
    """What the defining clause says ``x`` forces, read off the stored table."""
    T = lambda w, f: (w, f) in m.table
    if isinstance(phi, Bottom):
        return False
    if isinstance(phi, Atom):
        return T(x, phi)
    if isinstance(phi, And):
        return T(x, phi.left) and T(x, phi.right)
    if isinstance(phi, Or):
        return T(x, phi.left) or T(x, phi.right)
    if isinstance(phi, Imp):
        return all(not T(y, phi.left) or T(y, phi.right) for y in m.frame.up(x))
    if isinstance(phi, Just):
        return all(T(y, phi.body) for xx, y in _rel(m, phi.term) if xx == x)
    raise ModelError(f"subset models do not interpret {print_formula(phi)}")


def _eval_subset(m: IntSubsetModel, w: int, phi: Formula) -> bool:
    stored = (w, phi) in m.table
    if w < m.frame.size and _subset_clause(m, w, phi) != stored:
        raise ModelError(f"stored table disagrees with the clause for {print_formula(phi)} at world {w}")
    return stored


# --------------------------------------------------------------------------
# Validation


def _fragment_formulas(m) -> list:
    return sorted(m.fragment, key=print_formula) if m.fragment is not None else []


def _model_terms(m) -> list:
    terms = set()
    for f in m.fragment or ():
        if isinstance(f, Just):
            terms |= set(subterms(f.term))
    keys = m.evidence.keys() if not isinstance(m, IntSubsetModel) else m.evidence.keys()
    for k in keys:
        t = k[0] if isinstance(k, tuple) else k
        terms |= set(subterms(t))
    return sorted(terms, key=print_term)


def _closure_violations(m, worlds, bad: list) -> None:
    """Clauses (i), (ii), introspection and CS for Mkrtychev and Fitting models."""
    frag = m.fragment or frozenset()
    for t in _model_terms(m):
        if _universal(m, t):
            continue
        for x in worlds:
            have = _ev(m, t, x)
            if isinstance(t, App):
                a, b = t.left, t.right
                src = [f for f in frag if isinstance(f, Imp)] if _universal(m, a) else _ev(m, a, x)
                for g in src:
                    if isinstance(g, Imp) and g.right in frag and g.right not in have and _has(m, b, x, g.left):
                        bad.append(f"application closure fails at world {x}: {print_formula(g.right)} missing from E[{print_term(t)}]")
            if isinstance(t, Sum):
                for part in (t.left, t.right):
                    src = frag if _universal(m, part) else _ev(m, part, x)
                    for f in src:
                        if f in frag and f not in have:
                            bad.append(f"sum closure fails at world {x}: {print_formula(f)} missing from E[{print_term(t)}]")
            if isinstance(t, Bang) and m.introspective:
                inner = t.term
                for f in frag:
                    if isinstance(f, Just) and f.term == inner and _has(m, inner, x, f.body) and f not in have:
                        bad.append(f"introspection fails at world {x}: {print_formula(f)} missing from E[{print_term(t)}]")
    if m.cs is not None and not m.universal_constants:
        for f in frag:
            if isinstance(f, Just) and isinstance(f.term, Const) and in_cs(f, m.cs):
                for x in worlds:
                    if f.body not in _ev(m, f.term, x):
                        bad.append(f"constant specification not respected at world {x}: {print_formula(f)}")


def _atom_monotone(m, bad: list) -> None:
    for x, i in sorted(m.valuation):
        for y in m.frame.up(x):
            if (y, i) not in m.valuation:
                bad.append(f"atom p{i} true at {x} but not at {y} above it")


def _evidence_monotone(m, pairs, what: str, bad: list) -> None:
    for (t, x), s in sorted(m.evidence.items(), key=lambda kv: (print_term(kv[0][0]), kv[0][1])):
        for y in pairs(x):
            missing = s - _ev(m, t, y)
            if missing and not _universal(m, t):
                f = min(missing, key=print_formula)
                bad.append(f"evidence for {print_term(t)} shrinks {what} from {x} to {y}: {print_formula(f)}")


def _relation_checks(m, bad: list) -> None:
    W = m.frame.worlds
    for x, y in m.R:
        if not (0 <= x < m.frame.size and 0 <= y < m.frame.size):
            bad.append(f"R mentions a world outside the frame: ({x}, {y})")
    for x, y in sorted(m.frame.leq):
        for z in _succ(m, y):
            if (x, z) not in m.R:
                bad.append(f"R[{y}] not included in R[{x}] although {x} <= {y}: world {z}")
    if m.reflexive:
        for x in W:
            if (x, x) not in m.R:
                bad.append(f"R is not reflexive at {x}")
    if m.transitive:
        for x, y in sorted(m.R):
            for z in _succ(m, y):
                if (x, z) not in m.R:
                    bad.append(f"R is not transitive: ({x}, {y}), ({y}, {z})")


def validate_int_model(m) -> ModelReport:
    _check_kind(m)
    bad: list = []
    if isinstance(m, IntSubsetModel):
        _validate_subset(m, bad)
        return ModelReport(not bad, tuple(bad))
    _atom_monotone(m, bad)
    if isinstance(m, IntModalModel):
        _relation_checks(m, bad)
        return ModelReport(not bad, tuple(bad))
    for f in m.fragment or ():
        for g in subformulas(f):
            if g not in m.fragment:
                bad.append(f"fragment not closed under subformulas: {print_formula(g)} missing")
    W = m.frame.worlds
    for (t, x) in m.evidence:
        if x not in W:
            bad.append(f"evidence at a world outside the frame: {x}")
    if bad:
        return ModelReport(False, tuple(bad))
    _evidence_monotone(m, lambda x: [y for y in m.frame.up(x) if y != x], "along <=", bad)
    _closure_violations(m, W, bad)
    if isinstance(m, IntFittingModel):
        _relation_checks(m, bad)
        if m.monotone:
            _evidence_monotone(m, lambda x: [y for y in _succ(m, x) if y != x], "along R", bad)
        if m.introspective and not (m.transitive and m.monotone):
            bad.append("introspective flag needs the transitive and monotone flags")
    elif m.factive and m.fragment is not None:
        ev = _Eval(m)
        for (t, x), s in sorted(m.evidence.items(), key=lambda kv: (print_term(kv[0][0]), kv[0][1])):
            for f in sorted(s & m.fragment, key=print_formula):
                if not ev.value(x, f):
                    bad.append(f"factivity fails at world {x}: {print_formula(f)} in E[{print_term(t)}] is false")
        if m.universal_constants and any(_has_const(t) for t in _model_terms(m)):
            bad.append("factive models cannot give constants universal evidence")
    return ModelReport(not bad, tuple(bad))


def _validate_subset(m: IntSubsetModel, bad: list) -> None:
    F0 = m.frame
    base = F0.worlds
    worlds = range(m.worlds)
    frag = m.fragment
    if m.worlds < F0.size:
        bad.append("fewer worlds than base worlds")
        return
    for w, f in m.table:
        if w not in worlds or f not in frag:
            bad.append(f"table entry outside the model: ({w}, {print_formula(f)})")
    for f in frag:
        for g in subformulas(f):
            if g not in frag:
                bad.append(f"fragment not closed under subformulas: {print_formula(g)} missing")
    for t, pairs in m.evidence.items():
        for x, y in pairs:
            if x not in base or y not in worlds:
                bad.append(f"E[{print_term(t)}] pair outside the model: ({x}, {y})")
    if bad:
        return
    T = lambda w, f: (w, f) in m.table
    atoms = sorted((f for f in frag if isinstance(f, Atom)), key=print_formula)
    for x in base:
        for p in atoms:
            for y in F0.up(x):
                if T(x, p) and not T(y, p):
                    bad.append(f"atom {print_formula(p)} forced at {x} but not at {y} above it")
    terms = _model_terms(m)
    E = lambda t, x: {y for xx, y in _rel(m, t) if xx == x}
    for t in terms:
        for x in base:
            for y in F0.up(x):
                extra = E(t, y) - E(t, x)
                if extra:
                    bad.append(f"E[{print_term(t)}][{y}] not included in E[{print_term(t)}][{x}]: world {min(extra)}")
    for x in base:
        for f in sorted(frag, key=print_formula):
            if _subset_clause(m, x, f) != T(x, f):
                bad.append(f"stored table disagrees with the clause for {print_formula(f)} at base world {x}")
    for t in terms:
        for x in base:
            if isinstance(t, Sum):
                extra = E(t, x) - (E(t.left, x) & E(t.right, x))
                if extra:
                    bad.append(f"E[{print_term(t)}][{x}] exceeds the intersection of its summands: world {min(extra)}")
            if isinstance(t, App):
                M = _subset_app_targets(m, t, x)
                for y in sorted(E(t, x)):
                    for f in M:
                        if not T(y, f):
                            bad.append(f"E[{print_term(t)}][{x}] contains {y} where {print_formula(f)} fails")
            if m.reflexive and x not in E(t, x):
                bad.append(f"reflexivity fails: {x} not in E[{print_term(t)}][{x}]")
            if m.introspective and isinstance(t, Bang):
                inner = [f for f in frag if isinstance(f, Just) and f.term == t.term and T(x, f)]
                for y in sorted(E(t, x)):
                    for f in inner:
                        if not T(y, f):
                            bad.append(f"introspection fails: {print_formula(f)} forced at {x} but not at {y}")
    if m.cs is not None:
        for f in frag:
            if isinstance(f, Just) and isinstance(f.term, Const) and in_cs(f, m.cs):
                for x in base:
                    if not T(x, f):
                        bad.append(f"constant specification not respected at world {x}: {print_formula(f)}")


def _subset_app_targets(m: IntSubsetModel, t: App, x: int) -> list:
    """The formulas every world in ``E_{t.s}[x]`` must force."""
    T = lambda w, f: (w, f) in m.table
    out = []
    for f in m.fragment:
        if isinstance(f, Just) and f.term == t.left and isinstance(f.body, Imp) and T(x, f):
            g = Just(t.right, f.body.left)
            if g in m.fragment and T(x, g):
                out.append(f.body.right)
    return sorted(set(out), key=print_formula)


def monotonicity_check(m, phi: Formula) -> bool:
    """Whether forcing of ``phi`` is upward closed along the frame order."""
    phi = formula_from_any(phi)
    for x in m.frame.worlds:
        if eval_int(m, x, phi):
            if not all(eval_int(m, y, phi) for y in m.frame.up(x)):
                return False
    return True


def generated_submodel(m, x: int):
    """Restriction to the worlds reachable from ``x`` by the order and R; returns ``(model, new x)``."""
    _check_kind(m)
    if isinstance(m, IntSubsetModel):
        keep = set(m.frame.up(x))
        reach = set(keep)
        for pairs in m.evidence.values():
            reach |= {y for w, y in pairs if w in keep}
        base = sorted(keep)
        extra = sorted(reach - keep)
        order = base + extra
        pos = {w: i for i, w in enumerate(order)}
        frame = Frame(len(base), frozenset((pos[a], pos[b]) for a, b in m.frame.leq if a in keep and b in keep))
        ev = {t: frozenset((pos[a], pos[b]) for a, b in pairs if a in keep) for t, pairs in m.evidence.items()}
        table = frozenset((pos[w], f) for w, f in m.table if w in pos)
        return IntSubsetModel(frame, len(order), ev, table, m.fragment, m.reflexive, m.introspective, m.cs), pos[x]
    R = getattr(m, "R", frozenset())
    reach, todo = {x}, [x]
    while todo:
        w = todo.pop()
        for y in list(m.frame.up(w)) + [b for a, b in R if a == w]:
            if y not in reach:
                reach.add(y)
                todo.append(y)
    order = sorted(reach)
    pos = {w: i for i, w in enumerate(order)}
    frame = Frame(len(order), frozenset((pos[a], pos[b]) for a, b in m.frame.leq if a in reach and b in reach))
    val = frozenset((pos[w], i) for w, i in m.valuation if w in reach)
    newR = frozenset((pos[a], pos[b]) for a, b in R if a in reach and b in reach)
    if isinstance(m, IntModalModel):
        return IntModalModel(frame, newR, val, m.reflexive, m.transitive), pos[x]
    ev = {(t, pos[w]): s for (t, w), s in m.evidence.items() if w in reach}
    if isinstance(m, IntMkrtychevModel):
        return (
            IntMkrtychevModel(frame, ev, val, m.fragment, m.factive, m.introspective, m.cs, m.universal_constants),
            pos[x],
        )
    return (
        IntFittingModel(
            frame, newR, ev, val, m.fragment, m.reflexive, m.transitive, m.monotone, m.introspective,
            m.cs, m.universal_constants,
        ),
        pos[x],
    )


def local_soundness(proof, m, w: int) -> SoundnessReport:
    """Check that ``proof`` cannot lead from premises forced at ``w`` to an unforced conclusion."""
    vals = [eval_int(m, w, s.formula) for s in proof.steps]
    premises_hold = all(eval_int(m, w, p) for p in proof.premises)
    concl = vals[-1] if vals else True
    for i, s in enumerate(proof.steps):
        if isinstance(s, (Axiom, CSInstance)) and not vals[i]:
            kind = "axiom" if isinstance(s, Axiom) else "CS instance"
            return SoundnessReport(False, premises_hold, concl, i, f"{kind} not forced: model is not in the class of the logic")
        if isinstance(s, MP) and vals[s.imp] and vals[s.arg] and not vals[i]:
            return SoundnessReport(False, premises_hold, concl, i, "modus ponens did not preserve forcing")
    if premises_hold and not concl:
        return SoundnessReport(False, premises_hold, concl, len(vals) - 1, "conclusion not forced")
    return SoundnessReport(True, premises_hold, concl)


# --------------------------------------------------------------------------
# Countermodel search


def max_worlds_guard() -> int:
    return int(os.environ.get("JUSTLAB_MAX_WORLDS", "4"))


def _fitting_flags(logic: LogicSpec) -> dict:
    return {
        "reflexive": logic.factive,
        "transitive": logic.introspective,
        "monotone": logic.introspective,
        "introspective": logic.introspective,
    }


def _size(t: Term) -> int:
    return sum(1 for _ in subterms(t))


def _evidence_universe(frag: frozenset, introspective: bool) -> dict:
    """For each constant-free term of the fragment, the formulas its evidence may contain.

    Seeds flow from a term to its parts (the antecedents an application may
    use come from the fragment); forced consequences then flow back up, so
    the closure of any choice stays inside the universe.
    """
    just = [f for f in frag if isinstance(f, Just)]
    terms = set()
    for f in just:
        terms |= {s for s in subterms(f.term) if not _has_const(s)}
    U = {t: set() for t in terms}
    for f in just:
        if f.term in U:
            U[f.term].add(f.body)
    theta = sorted(frag, key=print_formula)
    for t in sorted(terms, key=lambda s: (-_size(s), print_term(s))):
        if isinstance(t, App):
            for psi in list(U[t]):
                for th in theta:
                    U[t.left].add(Imp(th, psi))
                    U[t.right].add(th)
        elif isinstance(t, Sum):
            U[t.left] |= U[t]
            U[t.right] |= U[t]
        elif isinstance(t, Bang):
            for psi in U[t]:
                if isinstance(psi, Just) and psi.term == t.term:
                    U[t.term].add(psi.body)
    for t in sorted(terms, key=lambda s: (_size(s), print_term(s))):
        if isinstance(t, App):
            U[t] |= {g.right for g in U[t.left] if isinstance(g, Imp) and g.left in U[t.right]}
        elif isinstance(t, Sum):
            U[t] |= U[t.left] | U[t.right]
        elif isinstance(t, Bang) and introspective:
            U[t] |= {Just(t.term, g) for g in U[t.term]}
    return {t: sorted(s, key=print_formula) for t, s in U.items()}


class _Encoder:
    def __init__(self, frame: Frame, phi: Formula, frag: frozenset, family: str, logic: LogicSpec):
        self.frame, self.phi, self.family, self.logic = frame, phi, family, logic
        self.pool = IDPool()
        self.clauses: list = []
        self.W = list(frame.worlds)
        self.flags = _fitting_flags(logic) if family != "mkrtychev" else {
            "factive": logic.factive, "introspective": logic.introspective,
        }
        modal = family == "modal"
        self.U = {} if modal else _evidence_universe(frag, logic.introspective)
        truth = set(frag)
        if family == "mkrtychev" and logic.factive:
            for s in self.U.values():
                for g in s:
                    truth |= subformulas(g)
        self.truth = sorted(truth, key=lambda f: (len(print_formula(f)), print_formula(f)))
        self.atoms = sorted({f.index for f in self.truth if isinstance(f, Atom)})
        self.order: list = []
        if family in ("fitting", "modal"):
            self.order += [self.R(x, y) for x in self.W for y in self.W]
        self.order += [self.p(x, i) for x in self.W for i in self.atoms]
        for t in sorted(self.U, key=lambda s: (_size(s), print_term(s))):
            self.order += [self.e(t, x, g) for x in self.W for g in self.U[t]]

    def R(self, x, y):
        return self.pool.id(("R", x, y))

    def p(self, x, i):
        return self.pool.id(("p", x, i))

    def e(self, t, x, g):
        return self.pool.id(("e", t, x, g))

    def tv(self, x, f):
        return self.pool.id(("t", x, f))

    def aux(self, *key):
        return self.pool.id(("aux",) + key)

    def add(self, *cl):
        self.clauses.append(list(cl))

    def encode(self) -> None:
        f, W = self.frame, self.W
        for x, i in itertools.product(W, self.atoms):
            for y in f.up(x):
                if y != x:
                    self.add(-self.p(x, i), self.p(y, i))
        if self.family in ("fitting", "modal"):
            for x, y in f.leq:
                for z in W:
                    self.add(-self.R(y, z), self.R(x, z))
            if self.flags["reflexive"]:
                for x in W:
                    self.add(self.R(x, x))
            if self.flags["transitive"]:
                for x, y, z in itertools.product(W, repeat=3):
                    self.add(-self.R(x, y), -self.R(y, z), self.R(x, z))
        self._encode_evidence()
        for x in W:
            for phi in self.truth:
                self._encode_truth(x, phi)
        self.add(*[-self.tv(x, self.phi) for x in W])

    def _encode_evidence(self) -> None:
        f, W, U = self.frame, self.W, self.U
        members = {t: set(s) for t, s in U.items()}
        for t, s in U.items():
            for x in W:
                for g in s:
                    for y in f.up(x):
                        if y != x:
                            self.add(-self.e(t, x, g), self.e(t, y, g))
                    if self.family == "fitting" and self.flags["monotone"]:
                        for y in W:
                            if y != x:
                                self.add(-self.e(t, x, g), -self.R(x, y), self.e(t, y, g))
            if isinstance(t, App):
                a, b = t.left, t.right
                for g in U[a]:
                    if isinstance(g, Imp) and g.left in members[b]:
                        for x in W:
                            self.add(-self.e(a, x, g), -self.e(b, x, g.left), self.e(t, x, g.right))
            elif isinstance(t, Sum):
                for part in (t.left, t.right):
                    for g in U[part]:
                        for x in W:
                            self.add(-self.e(part, x, g), self.e(t, x, g))
            elif isinstance(t, Bang) and self.logic.introspective:
                for g in U[t.term]:
                    for x in W:
                        self.add(-self.e(t.term, x, g), self.e(t, x, Just(t.term, g)))
        if self.family == "mkrtychev" and self.logic.factive:
            for t, s in U.items():
                for x in W:
                    for g in s:
                        self.add(-self.e(t, x, g), self.tv(x, g))

    def _encode_truth(self, x: int, phi: Formula) -> None:
        v = self.tv(x, phi)
        if isinstance(phi, Bottom):
            self.add(-v)
        elif isinstance(phi, Atom):
            self.add(-v, self.p(x, phi.index))
            self.add(v, -self.p(x, phi.index))
        elif isinstance(phi, And):
            a, b = self.tv(x, phi.left), self.tv(x, phi.right)
            self.add(-v, a)
            self.add(-v, b)
            self.add(v, -a, -b)
        elif isinstance(phi, Or):
            a, b = self.tv(x, phi.left), self.tv(x, phi.right)
            self.add(-v, a, b)
            self.add(v, -a)
            self.add(v, -b)
        elif isinstance(phi, Imp):
            back = [v]
            for y in self.frame.up(x):
                a, b = self.tv(y, phi.left), self.tv(y, phi.right)
                self.add(-v, -a, b)
                d = self.aux("imp", x, phi, y)
                self.add(-d, a)
                self.add(-d, -b)
                back.append(d)
            self.add(*back)
        elif isinstance(phi, (Just, Box)):
            has_e = isinstance(phi, Just) and not _has_const(phi.term)
            back = [v]
            if has_e:
                ev = self.e(phi.term, x, phi.body)
                self.add(-v, ev)
                back.append(-ev)
            if self.family == "mkrtychev":
                self.add(*back)
                return
            for y in self.W:
                r, b = self.R(x, y), self.tv(y, phi.body)
                self.add(-v, -r, b)
                d = self.aux("box", x, phi, y)
                self.add(-d, r)
                self.add(-d, -b)
                back.append(d)
            self.add(*back)
        else:
            raise ModelError(f"cannot encode {print_formula(phi)}")

    def decode(self, model: set, frag: frozenset):
        W = self.W
        val = frozenset((x, i) for x in W for i in self.atoms if self.p(x, i) in model)
        if self.family == "modal":
            R = frozenset((x, y) for x in W for y in W if self.R(x, y) in model)
            return IntModalModel(self.frame, R, val, **{k: self.flags[k] for k in ("reflexive", "transitive")})
        ev = {}
        for t, s in self.U.items():
            for x in W:
                chosen = frozenset(g for g in s if self.e(t, x, g) in model)
                if chosen:
                    ev[(t, x)] = chosen
        if self.family == "mkrtychev":
            fragment = frozenset(self.truth)
            return IntMkrtychevModel(
                self.frame, ev, val, fragment, self.flags["factive"], self.flags["introspective"],
                self.logic, universal_constants=True,
            )
        R = frozenset((x, y) for x in W for y in W if self.R(x, y) in model)
        return IntFittingModel(self.frame, R, ev, val, frag, cs=self.logic, universal_constants=True, **self.flags)


def _lexmin(solver, order: list) -> Optional[set]:
    """Greedy lexicographically least model over ``order`` (false before true)."""
    if not solver.solve():
        return None
    model = set(solver.get_model())
    fixed: list = []
    for v in order:
        if -v in model:
            fixed.append(-v)
        elif solver.solve(assumptions=fixed + [-v]):
            model = set(solver.get_model())
            fixed.append(-v)
        else:
            fixed.append(v)
    return model


def countermodel_search(
    phi,
    logic: LogicSpec = IPCJ,
    max_worlds: int = 3,
    max_extra_worlds: int = 0,
    fragment: Iterable = (),
    family: str = "fitting",
    frame_class: Optional[Callable[[Frame], bool]] = None,
):
    """Smallest countermodel to ``phi`` in the frame class of ``logic``, or None.

    Frames are tried by size and canonical order; within a frame the least
    model in the fixed variable order is returned together with the least
    world refuting ``phi``. Terms containing a constant get universal
    evidence and all other evidence is closed over every formula, so a
    returned model extends to the whole language. ``max_extra_worlds`` is
    accepted for interface symmetry; subset models are not searched.
    """
    phi = formula_from_any(phi)
    if max_worlds > max_worlds_guard():
        raise BoundExceeded(f"max_worlds {max_worlds} exceeds the guard {max_worlds_guard()} (JUSTLAB_MAX_WORLDS)")
    kinds = language_of(phi)
    if "star" in kinds:
        raise ModelError("star formulas have no Kripke semantics here")
    if "box" in kinds and "just" in kinds:
        raise ModelError("mixed modal and justification formula")
    if "box" in kinds:
        family = "modal"
    elif family not in ("fitting", "mkrtychev"):
        raise ValueError(f"unsupported search family {family!r}")
    frag = set(subformulas(phi))
    for g in fragment:
        frag |= subformulas(formula_from_any(g))
    frag = frozenset(frag)
    if family == "mkrtychev" and logic.factive and any(
        isinstance(f, Just) and _has_const(f.term) for f in frag
    ):
        raise ModelError("factive Mkrtychev search does not support constants")
    accept = frame_class or (lambda fr: in_frame_class(fr, logic))
    for frame in enumerate_frames(max_worlds):
        if not accept(frame):
            continue
        enc = _Encoder(frame, phi, frag, family, logic)
        enc.encode()
        with Solver(name="minisat22", bootstrap_with=enc.clauses) as s:
            model = _lexmin(s, enc.order)
        if model is None:
            continue
        m = enc.decode(model, frag)
        report = validate_int_model(m)
        if not report.valid:
            raise ModelError("search produced an invalid model: " + report.violations[0])
        for w in frame.worlds:
            if not eval_int(m, w, phi):
                return m, w
        raise ModelError("search model does not refute the formula")
    return None


# --------------------------------------------------------------------------
# Frame-axiom audit


def _upsets(f: Frame) -> list:
    out = []
    for mask in range(1 << f.size):
        s = frozenset(x for x in f.worlds if mask >> x & 1)
        if all(y in s for x in s for y in f.up(x)):
            out.append(s)
    return out


def frame_countermodel(f: Frame, phi: Formula) -> Optional[tuple]:
    """A valuation of upsets refuting a propositional ``phi`` on ``f``, as ``(model, world)``."""
    idx = sorted({g.index for g in subformulas(phi) if isinstance(g, Atom)})
    ups = _upsets(f)
    for choice in itertools.product(ups, repeat=len(idx)):
        val = frozenset((x, i) for i, s in zip(idx, choice) for x in s)
        m = IntModalModel(f, frozenset(), val)
        ev = _Eval(m)
        for w in f.worlds:
            if not ev.value(w, phi):
                return m, w
    return None


def _p(i: int) -> Atom:
    return Atom(i)


AUDIT_SCHEMES = {
    "LIN": (lambda: Or(Imp(_p(1), _p(2)), Imp(_p(2), _p(1)))),
    "LEM": (lambda: Or(_p(1), neg(_p(1)))),
    "WLEM": (lambda: Or(neg(neg(_p(1))), neg(_p(1)))),
}


@dataclass(frozen=True)
class AuditReport:
    passed: bool
    frames: int
    failures: tuple = ()

    def __bool__(self):
        return self.passed

    def to_json(self) -> dict:
        return {"passed": self.passed, "frames": self.frames, "failures": list(self.failures)}


def audit_rows(bound: int) -> list:
    """``(scheme name, property, formula)`` rows checked by the audit.

    BC_k is only audited for k <= 2: from k = 3 on the scheme holds on
    non-connected frames of bounded cardinality too (the V poset validates
    BC_3), so the connected-and-bounded reading has no countermodel there.
    """
    rows = [
        ("LIN", "connected", AUDIT_SCHEMES["LIN"]()),
        ("LEM", ("bounded", 1), AUDIT_SCHEMES["LEM"]()),
        ("WLEM", "directed", AUDIT_SCHEMES["WLEM"]()),
    ]
    for k in range(1, min(bound, 3)):
        rows.append((f"BC{k}", ("connected", ("bounded", k)), bc_formula(k, [_p(i) for i in range(1, k + 2)])))
    return rows


def _holds(f: Frame, prop) -> bool:
    if isinstance(prop, tuple) and prop and prop[0] == "connected":
        return frame_property(f, "connected") and frame_property(f, prop[1])
    return frame_property(f, prop)


def frame_axiom_audit(bound: int = 4) -> AuditReport:
    """Frames with the property validate the scheme; frames without it refute it."""
    if bound > 4:
        raise BoundExceeded("the frame audit is limited to 4 worlds")
    failures = []
    frames = list(enumerate_frames(bound))
    for f in frames:
        for name, prop, phi in audit_rows(bound):
            cm = frame_countermodel(f, phi)
            has = _holds(f, prop)
            if has and cm is not None:
                failures.append(f"{name}: countermodel on a frame with the property: {f.matrix()}")
            if not has and cm is None:
                failures.append(f"{name}: no countermodel on a frame lacking the property: {f.matrix()}")
    return AuditReport(not failures, len(frames), tuple(failures))


# --------------------------------------------------------------------------
# Random valid models


def _random_frame(rng: random.Random, logic: LogicSpec, max_worlds: int) -> Frame:
    frames = [f for f in enumerate_frames(max_worlds) if in_frame_class(f, logic)]
    return rng.choice(frames)


def _random_upset_valuation(rng: random.Random, f: Frame, atoms: list) -> frozenset:
    ups = _upsets(f)
    return frozenset((x, i) for i in atoms for x in rng.choice(ups))


def _random_R(rng: random.Random, f: Frame, flags: dict, density: float = 0.4) -> frozenset:
    W = f.worlds
    R = {(x, y) for x in W for y in W if rng.random() < density}
    if flags.get("reflexive"):
        R |= {(x, x) for x in W}
    changed = True
    while changed:
        changed = False
        new = {(x, z) for x, y in f.leq for (yy, z) in R if yy == y}
        if flags.get("transitive"):
            new |= {(x, z) for x, y in R for (yy, z) in R if yy == y}
        if not new <= R:
            R |= new
            changed = True
    return frozenset(R)


def _close_evidence(m, worlds) -> dict:
    """Least fragment-level closure of the evidence of a Mkrtychev or Fitting model."""
    frag = m.fragment
    E = {k: set(v) for k, v in m.evidence.items()}
    get = lambda t, x: E.setdefault((t, x), set())
    terms = _model_terms(m)
    cs = [f for f in frag if isinstance(f, Just) and isinstance(f.term, Const) and m.cs is not None and in_cs(f, m.cs)]
    changed = True
    while changed:
        changed = False

        def put(t, x, g):
            nonlocal changed
            if g not in get(t, x):
                get(t, x).add(g)
                changed = True

        for x in worlds:
            for f in cs:
                put(f.term, x, f.body)
            for t in terms:
                if isinstance(t, App):
                    for g in list(get(t.left, x)):
                        if isinstance(g, Imp) and g.right in frag and g.left in get(t.right, x):
                            put(t, x, g.right)
                elif isinstance(t, Sum):
                    for part in (t.left, t.right):
                        for g in list(get(part, x)):
                            if g in frag:
                                put(t, x, g)
                elif isinstance(t, Bang) and m.introspective:
                    for g in list(get(t.term, x)):
                        if Just(t.term, g) in frag:
                            put(t, x, Just(t.term, g))
        for (t, x), s in list(E.items()):
            ups = list(m.frame.up(x))
            if isinstance(m, IntFittingModel) and m.monotone:
                ups += _succ(m, x)
            for y in ups:
                for g in list(s):
                    put(t, y, g)
    return {k: frozenset(v) for k, v in E.items() if v}


def _random_base_evidence(rng: random.Random, frag: frozenset, worlds, density: float) -> dict:
    E: dict = {}
    for f in sorted((g for g in frag if isinstance(g, Just)), key=print_formula):
        for x in worlds:
            if rng.random() < density:
                E.setdefault((f.term, x), set()).add(f.body)
    return {k: frozenset(v) for k, v in E.items()}


def random_int_model(
    family: str, fragment: frozenset, logic: LogicSpec, rng: random.Random, max_worlds: int = 3
):
    """A random validated model of ``family`` for the class of ``logic``."""
    frame = _random_frame(rng, logic, max_worlds)
    atoms = sorted({f.index for f in fragment if isinstance(f, Atom)})
    val = _random_upset_valuation(rng, frame, atoms)
    if family == "fitting":
        flags = _fitting_flags(logic)
        R = _random_R(rng, frame, flags)
        m = IntFittingModel(frame, R, _random_base_evidence(rng, fragment, frame.worlds, 0.5), val, fragment, cs=logic, **flags)
        return _with_evidence(m, _close_evidence(m, frame.worlds))
    if family == "mkrtychev":
        m = IntMkrtychevModel(frame, {}, val, fragment, logic.factive, logic.introspective, logic)
        m = _with_evidence(m, _close_evidence(m, frame.worlds))
        if not logic.factive:
            return _with_evidence(m, _close_evidence(_with_evidence(m, _random_base_evidence(rng, fragment, frame.worlds, 0.5)), frame.worlds))
        return _grow_factive(m, rng)
    if family == "subset":
        return _random_subset(rng, frame, fragment, logic, val)
    raise ValueError(f"unknown family {family!r}")


def _with_evidence(m, ev: dict):
    kw = {k: getattr(m, k) for k in m.__dataclass_fields__}
    kw["evidence"] = ev
    return type(m)(**kw)


def _grow_factive(m: IntMkrtychevModel, rng: random.Random) -> IntMkrtychevModel:
    """Add random evidence one item at a time, keeping only additions that stay valid."""
    cands = [
        (f.term, x, f.body)
        for f in sorted((g for g in m.fragment if isinstance(g, Just)), key=print_formula)
        for x in m.frame.worlds
    ]
    rng.shuffle(cands)
    for t, x, g in cands[: max(1, len(cands) // 2)]:
        ev = dict(m.evidence)
        ev[(t, x)] = ev.get((t, x), frozenset()) | {g}
        trial = _with_evidence(m, ev)
        trial = _with_evidence(trial, _close_evidence(trial, m.frame.worlds))
        if validate_int_model(trial).valid:
            m = trial
    return m


def _subset_table(F0: Frame, n: int, E: dict, frag: frozenset, val: frozenset, extra: dict) -> frozenset:
    """Truth table: base worlds by the clauses, extra worlds from ``extra``."""
    order = sorted(frag, key=lambda f: (len(print_formula(f)), print_formula(f)))
    T = set()
    for w in range(F0.size, n):
        T |= {(w, f) for f in frag if extra.get((w, f))}
    for f in order:
        for x in F0.worlds:
            if isinstance(f, Bottom):
                ok = False
            elif isinstance(f, Atom):
                ok = (x, f.index) in val
            elif isinstance(f, And):
                ok = (x, f.left) in T and (x, f.right) in T
            elif isinstance(f, Or):
                ok = (x, f.left) in T or (x, f.right) in T
            elif isinstance(f, Imp):
                ok = all((y, f.left) not in T or (y, f.right) in T for y in F0.up(x))
            else:
                ok = all((y, f.body) in T for xx, y in E.get(f.term, ()) if xx == x)
            if ok:
                T.add((x, f))
    return frozenset(T)


def _random_subset(rng: random.Random, F0: Frame, frag: frozenset, logic: LogicSpec, val: frozenset) -> IntSubsetModel:
    n = F0.size + rng.randint(0, 1)
    terms = set()
    for f in frag:
        if isinstance(f, Just):
            terms |= set(subterms(f.term))
    terms = sorted(terms, key=print_term)
    extra = {(w, f): rng.random() < 0.5 for w in range(F0.size, n) for f in frag if not isinstance(f, Bottom)}
    forced = {t: set() for t in terms}
    if logic.factive:
        for t in terms:
            forced[t] = {(x, y) for x in F0.worlds for y in F0.up(x)}
    E = {t: {(x, y) for x in F0.worlds for y in range(n) if rng.random() < 0.5} | forced[t] for t in terms}
    for _ in range(50):
        # downward condition: E_t[y] must sit inside E_t[x] for x <= y
        for t in terms:
            for x, y in F0.leq:
                E[t] -= {(y, z) for (yy, z) in E[t] if yy == y and (x, z) not in E[t]} - forced[t]
        table = _subset_table(F0, n, E, frag, val, extra)
        m = IntSubsetModel(F0, n, {t: frozenset(s) for t, s in E.items()}, table, frag, logic.factive, logic.introspective, logic)
        drop = _subset_excess(m)
        if not drop:
            break
        for t, pair in drop:
            if pair not in forced[t]:
                E[t].discard(pair)
        if all(pair in forced[t] for t, pair in drop):
            break
    if validate_int_model(m).valid:
        return m
    E = {t: set(forced[t]) for t in terms}
    table = _subset_table(F0, n, E, frag, val, extra)
    return IntSubsetModel(F0, n, {t: frozenset(s) for t, s in E.items()}, table, frag, logic.factive, logic.introspective, logic)


def _subset_excess(m: IntSubsetModel) -> list:
    """Evidence pairs that break an upper-bound clause."""
    T = lambda w, f: (w, f) in m.table
    out = []
    for t, pairs in m.evidence.items():
        for x, y in sorted(pairs):
            if isinstance(t, Sum) and not ((x, y) in m.evidence.get(t.left, ()) and (x, y) in m.evidence.get(t.right, ())):
                out.append((t, (x, y)))
            elif isinstance(t, App) and not all(T(y, f) for f in _subset_app_targets(m, t, x)):
                out.append((t, (x, y)))
            elif isinstance(t, Bang) and m.introspective:
                if not all(T(y, f) for f in m.fragment if isinstance(f, Just) and f.term == t.term and T(x, f)):
                    out.append((t, (x, y)))
            elif isinstance(t, Const) and m.cs is not None:
                if not all(T(y, f.body) for f in m.fragment if isinstance(f, Just) and f.term == t and in_cs(f, m.cs)):
                    out.append((t, (x, y)))
    return out


# --------------------------------------------------------------------------
# JSON


def _sorted_evidence(ev: dict) -> list:
    return sorted(
        [print_term(t), x, print_formula(g)] for (t, x), s in ev.items() for g in s
    )


def model_to_json(m) -> dict:
    _check_kind(m)
    frag = lambda: sorted(print_formula(f) for f in m.fragment) if m.fragment is not None else None
    if isinstance(m, IntModalModel):
        return {
            "kind": "int-modal",
            "frame": m.frame.to_json(),
            "R": sorted([x, y] for x, y in m.R),
            "valuation": sorted([x, i] for x, i in m.valuation),
            "flags": sorted(k for k in ("reflexive", "transitive") if getattr(m, k)),
        }
    if isinstance(m, IntSubsetModel):
        return {
            "kind": "int-subset",
            "frame": m.frame.to_json(),
            "worlds": m.worlds,
            "evidence": sorted([print_term(t), x, y] for t, s in m.evidence.items() for x, y in s),
            "table": sorted([w, print_formula(f)] for w, f in m.table),
            "fragment": frag(),
            "flags": sorted(k for k in ("reflexive", "introspective") if getattr(m, k)),
        }
    out = {
        "kind": "int-mkrtychev" if isinstance(m, IntMkrtychevModel) else "int-fitting",
        "frame": m.frame.to_json(),
        "evidence": _sorted_evidence(m.evidence),
        "valuation": sorted([x, i] for x, i in m.valuation),
        "fragment": frag(),
    }
    if isinstance(m, IntMkrtychevModel):
        names = ("factive", "introspective", "universal_constants")
    else:
        out["R"] = sorted([x, y] for x, y in m.R)
        names = ("reflexive", "transitive", "monotone", "introspective", "universal_constants")
    out["flags"] = sorted(k for k in names if getattr(m, k))
    return out


def model_from_json(d: dict, logic: Optional[LogicSpec] = None):
    kind = d.get("kind")
    frame = Frame.from_json(d["frame"])
    flags = {k: True for k in d.get("flags", ())}
    frag = d.get("fragment")
    frag = frozenset(formula_from_any(f) for f in frag) if frag is not None else None
    val = frozenset((int(x), int(i)) for x, i in d.get("valuation", ()))
    if kind == "int-modal":
        return IntModalModel(frame, frozenset((x, y) for x, y in d["R"]), val, **flags)
    if kind == "int-subset":
        ev: dict = {}
        for t, x, y in d["evidence"]:
            ev.setdefault(parse_term(t), set()).add((int(x), int(y)))
        table = frozenset((int(w), formula_from_any(f)) for w, f in d["table"])
        return IntSubsetModel(
            frame, int(d["worlds"]), {t: frozenset(s) for t, s in ev.items()}, table, frag or frozenset(),
            cs=logic, **flags,
        )
    ev = {}
    for t, x, g in d.get("evidence", ()):
        ev.setdefault((parse_term(t), int(x)), set()).add(formula_from_any(g))
    ev = {k: frozenset(v) for k, v in ev.items()}
    if kind == "int-mkrtychev":
        return IntMkrtychevModel(frame, ev, val, frag, cs=logic, **flags)
    if kind == "int-fitting":
        R = frozenset((int(x), int(y)) for x, y in d.get("R", ()))
        return IntFittingModel(frame, R, ev, val, frag, cs=logic, **flags)
    raise ModelError(f"unknown model kind {kind!r}")
