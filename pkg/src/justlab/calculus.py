"""Hilbert-style proofs for justification logics over intermediate bases.

A ``LogicSpec`` names a propositional base (IPC, G, Gn, KC, C), a
justification part (J, JT, J4, JT4) and a constant specification, either
total or an explicit list. Proofs are flat lists of steps. Every step
records its formula, so a proof can be checked without replaying anything.

``ProofBuilder`` is the workhorse for constructing proofs. It keeps one line
per formula, supports hypothetical reasoning by discharging assumptions
through the deduction transform, and prunes unused lines on output.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field, fields
from functools import lru_cache
from typing import Callable, Iterable, Optional, Sequence, Union

from .errors import NotTotalCS, PremiseNotFound, ShapeMismatch
from .substitution import JustSubstitution, apply_just
from .syntax import (
    BOT,
    And,
    App,
    Bang,
    Bottom,
    Const,
    Formula,
    Imp,
    Just,
    Or,
    Sum,
    Term,
    big_and,
    big_or,
    big_sum,
    formula_from_any,
    print_formula,
)

# --------------------------------------------------------------------------
# Logics

BASES = ("IPC", "G", "Gn", "KC", "C")
JUSTIFICATIONS = ("J", "JT", "J4", "JT4")


@dataclass(frozen=True)
class LogicSpec:
    base: str = "IPC"
    justification: str = "J"
    n: Optional[int] = None
    cs: Optional[frozenset] = None  # None means the total constant specification

    def __post_init__(self):
        if self.base not in BASES:
            raise ValueError(f"unknown base {self.base!r}")
        if self.justification not in JUSTIFICATIONS:
            raise ValueError(f"unknown justification part {self.justification!r}")
        if (self.base == "Gn") != (self.n is not None):
            raise ValueError("the base Gn needs n and only Gn takes one")
        if self.n is not None and self.n < 2:
            raise ValueError("Gn needs n >= 2")
        if self.cs is not None:
            for phi in self.cs:
                if not _cs_shape(phi, self):
                    raise ValueError(f"not a constant specification formula: {print_formula(phi)}")

    @property
    def factive(self) -> bool:
        return "T" in self.justification

    @property
    def introspective(self) -> bool:
        return "4" in self.justification

    @property
    def total(self) -> bool:
        return self.cs is None

    @property
    def base_name(self) -> str:
        return f"G{self.n}" if self.base == "Gn" else self.base

    @property
    def name(self) -> str:
        return f"{self.base_name}-{self.justification}"

    def with_total_cs(self) -> "LogicSpec":
        return LogicSpec(self.base, self.justification, self.n)

    def __str__(self):
        return self.name


IPCJ = LogicSpec("IPC", "J")

_LOGIC_RE = re.compile(r"^(IPC|KC|C|G)(\d*)-(JT4|JT|J4|J)(?:@cs=(.+))?$")


def parse_logic(text: str) -> LogicSpec:
    """Parse ``BASE-JL`` with an optional ``@cs=<path>`` suffix.

    The CS file is a JSON list of formulas (concrete syntax or AST).
    """
    m = _LOGIC_RE.match(text.strip())
    if not m:
        raise ValueError(f"bad logic string {text!r}")
    base, num, just, path = m.groups()
    n = None
    if num:
        if base != "G":
            raise ValueError(f"only G takes a numeric suffix: {text!r}")
        base, n = "Gn", int(num)
    cs = None
    if path:
        with open(path) as fh:
            cs = frozenset(formula_from_any(x) for x in json.load(fh))
    return LogicSpec(base, just, n, cs)


# --------------------------------------------------------------------------
# Axiom schemes


@dataclass(frozen=True)
class _MF:
    """Formula metavariable."""

    name: str


@dataclass(frozen=True)
class _MT:
    """Term metavariable."""

    name: str


def _match(pat, obj, env: dict) -> bool:
    if isinstance(pat, (_MF, _MT)):
        if pat.name in env:
            return env[pat.name] == obj
        env[pat.name] = obj
        return True
    if type(pat) is not type(obj):
        return False
    for f in fields(pat):
        if not _match(getattr(pat, f.name), getattr(obj, f.name), env):
            return False
    return True


A, B, C = _MF("A"), _MF("B"), _MF("C")
T, S = _MT("t"), _MT("s")


def _neg(x):
    return Imp(x, BOT)


_PROP = {
    "A1": Imp(A, Imp(B, A)),
    "A2": Imp(Imp(A, Imp(C, B)), Imp(Imp(A, C), Imp(A, B))),
    "A3": Imp(And(A, B), A),
    "A4": Imp(And(A, B), B),
    "A5": Imp(A, Imp(B, And(A, B))),
    "A6": Imp(A, Or(A, B)),
    "A7": Imp(B, Or(A, B)),
    "A8": Imp(Imp(A, B), Imp(Imp(C, B), Imp(Or(A, C), B))),
    "A9": Imp(BOT, A),
}

_JUST = {
    "J": Imp(Just(T, Imp(A, B)), Imp(Just(S, A), Just(App(T, S), B))),
    "PlusL": Imp(Just(T, A), Just(Sum(T, S), A)),
    "PlusR": Imp(Just(T, A), Just(Sum(S, T), A)),
    "Factivity": Imp(Just(T, A), A),
    "Introspection": Imp(Just(T, A), Just(Bang(T), Just(T, A))),
}

_BASE = {
    "LIN": Or(Imp(A, B), Imp(B, A)),
    "LEM": Or(A, _neg(A)),
    "WLEM": Or(_neg(_neg(A)), _neg(A)),
}


def bc_formula(n: int, letters: Sequence[Formula]) -> Formula:
    """The bounded-cardinality disjunction over ``letters[0..n]``.

    The i = 0 disjunct has an empty antecedent and is the bare letter.
    Conjunctions and the outer disjunction fold left.
    """
    parts = [letters[0]]
    for i in range(1, n + 1):
        parts.append(Imp(big_and(letters[:i]), letters[i]))
    return big_or(parts)


def bc_scheme(n: int) -> Formula:
    return bc_formula(n, [_MF(f"P{i}") for i in range(n + 1)])


@lru_cache(maxsize=None)
def schemes(base: str, justification: str, n: Optional[int]) -> tuple:
    """(name, pattern) pairs in the fixed matching order."""
    out = list(_PROP.items())
    out += [("J", _JUST["J"]), ("PlusL", _JUST["PlusL"]), ("PlusR", _JUST["PlusR"])]
    if "T" in justification:
        out.append(("Factivity", _JUST["Factivity"]))
    if "4" in justification:
        out.append(("Introspection", _JUST["Introspection"]))
    if base in ("G", "Gn"):
        out.append(("LIN", _BASE["LIN"]))
    if base == "Gn":
        out.append((f"BC{n - 1}", bc_scheme(n - 1)))
    if base == "KC":
        out.append(("WLEM", _BASE["WLEM"]))
    if base == "C":
        out.append(("LEM", _BASE["LEM"]))
    return tuple(out)


def _schemes(logic: LogicSpec) -> tuple:
    return schemes(logic.base, logic.justification, logic.n)


def is_axiom(phi: Formula, logic: LogicSpec) -> Optional[str]:
    for name, pat in _schemes(logic):
        if _match(pat, phi, {}):
            return name
    return None


def matches_scheme(name: str, phi: Formula, logic: LogicSpec) -> bool:
    for n, pat in _schemes(logic):
        if n == name:
            return _match(pat, phi, {})
    return False


def axiom_names(logic: LogicSpec) -> list:
    return [n for n, _ in _schemes(logic)]


def _cs_shape(phi: Formula, logic: LogicSpec) -> bool:
    """``c:...:c:axiom`` with at least one constant prefix."""
    while isinstance(phi, Just) and isinstance(phi.term, Const):
        phi = phi.body
        if is_axiom(phi, logic):
            return True
    return False


def in_cs(phi: Formula, logic: LogicSpec) -> bool:
    if logic.cs is None:
        return _cs_shape(phi, logic)
    return phi in logic.cs


# --------------------------------------------------------------------------
# Proofs


@dataclass(frozen=True)
class Premise:
    index: int
    formula: Formula


@dataclass(frozen=True)
class Axiom:
    name: Optional[str]
    formula: Formula


@dataclass(frozen=True)
class CSInstance:
    formula: Formula


@dataclass(frozen=True)
class MP:
    imp: int
    arg: int
    formula: Formula


Step = Union[Premise, Axiom, CSInstance, MP]


@dataclass(frozen=True)
class Proof:
    premises: tuple
    steps: tuple

    @property
    def conclusion(self) -> Formula:
        if not self.steps:
            raise ValueError("empty proof")
        return self.steps[-1].formula

    def __len__(self):
        return len(self.steps)

    def formulas(self) -> list:
        return list(self.premises) + [s.formula for s in self.steps]

    def to_json(self) -> dict:
        steps = []
        for s in self.steps:
            f = print_formula(s.formula)
            if isinstance(s, Premise):
                steps.append({"rule": "premise", "index": s.index, "formula": f})
            elif isinstance(s, Axiom):
                steps.append({"rule": "axiom", "name": s.name, "formula": f})
            elif isinstance(s, CSInstance):
                steps.append({"rule": "cs", "formula": f})
            else:
                steps.append({"rule": "mp", "imp": s.imp, "arg": s.arg, "formula": f})
        return {"premises": [print_formula(p) for p in self.premises], "steps": steps}

    @classmethod
    def from_json(cls, d: dict) -> "Proof":
        steps = []
        for s in d["steps"]:
            f = formula_from_any(s["formula"])
            rule = s["rule"]
            if rule == "premise":
                steps.append(Premise(int(s["index"]), f))
            elif rule == "axiom":
                steps.append(Axiom(s.get("name"), f))
            elif rule == "cs":
                steps.append(CSInstance(f))
            elif rule == "mp":
                steps.append(MP(int(s["imp"]), int(s["arg"]), f))
            else:
                raise ValueError(f"unknown rule {rule!r}")
        return cls(tuple(formula_from_any(p) for p in d.get("premises", [])), tuple(steps))


@dataclass(frozen=True)
class ProofReport:
    valid: bool
    conclusion: Optional[Formula] = None
    step: Optional[int] = None
    reason: Optional[str] = None
    detail: str = ""

    def __bool__(self):
        return self.valid

    def to_json(self) -> dict:
        return {
            "valid": self.valid,
            "conclusion": None if self.conclusion is None else print_formula(self.conclusion),
            "step": self.step,
            "reason": self.reason,
            "detail": self.detail,
        }


def check_proof(proof: Proof, logic: LogicSpec) -> ProofReport:
    if not proof.steps:
        return ProofReport(False, None, None, "EmptyProof", "a proof needs at least one step")
    for i, s in enumerate(proof.steps):
        if isinstance(s, Premise):
            if not (0 <= s.index < len(proof.premises)) or proof.premises[s.index] != s.formula:
                return ProofReport(False, None, i, "BadPremiseIndex", f"premise {s.index}")
        elif isinstance(s, Axiom):
            ok = is_axiom(s.formula, logic) if s.name is None else matches_scheme(s.name, s.formula, logic)
            if not ok:
                return ProofReport(False, None, i, "NotAxiom", f"not an instance of {s.name or 'any scheme'}")
        elif isinstance(s, CSInstance):
            if not in_cs(s.formula, logic):
                return ProofReport(False, None, i, "NotCS", "not in the constant specification")
        elif isinstance(s, MP):
            if not (0 <= s.imp < i and 0 <= s.arg < i):
                return ProofReport(False, None, i, "BadMP", "modus ponens must cite earlier steps")
            want = Imp(proof.steps[s.arg].formula, s.formula)
            if proof.steps[s.imp].formula != want:
                return ProofReport(False, None, i, "BadMP", "major premise has the wrong shape")
        else:
            return ProofReport(False, None, i, "BadStep", f"unknown step {s!r}")
    return ProofReport(True, proof.conclusion)


# --------------------------------------------------------------------------
# Building proofs


class ProofBuilder:
    """Accumulates proof lines, at most one per formula."""

    def __init__(self, logic: LogicSpec, premises: Iterable[Formula] = ()):
        self.logic = logic
        self.premises = list(premises)
        self.steps: list = []
        self.lines: dict = {}

    # raw lines -----------------------------------------------------------

    def _add(self, step) -> int:
        hit = self.lines.get(step.formula)
        if hit is not None:
            return hit
        self.steps.append(step)
        self.lines[step.formula] = len(self.steps) - 1
        return len(self.steps) - 1

    def formula(self, line: int) -> Formula:
        return self.steps[line].formula

    def hyp(self, phi: Formula) -> int:
        if phi in self.lines:
            return self.lines[phi]
        if phi not in self.premises:
            self.premises.append(phi)
        return self._add(Premise(self.premises.index(phi), phi))

    def premise(self, i: int) -> int:
        return self._add(Premise(i, self.premises[i]))

    def axiom(self, name: str, phi: Formula) -> int:
        if not matches_scheme(name, phi, self.logic):
            raise ShapeMismatch(f"{print_formula(phi)} is not an instance of {name}")
        return self._add(Axiom(name, phi))

    def cs(self, phi: Formula) -> int:
        if not in_cs(phi, self.logic):
            raise NotTotalCS(f"{print_formula(phi)} is not in the constant specification")
        return self._add(CSInstance(phi))

    def mp(self, imp: int, arg: int) -> int:
        f = self.formula(imp)
        if not (isinstance(f, Imp) and f.left == self.formula(arg)):
            raise ShapeMismatch(
                f"cannot apply {print_formula(f)} to {print_formula(self.formula(arg))}"
            )
        return self._add(MP(imp, arg, f.right))

    def have(self, phi: Formula) -> Optional[int]:
        return self.lines.get(phi)

    def splice(self, proof: Proof) -> int:
        """Copy ``proof`` in; its premises become hypotheses here."""
        remap = {}
        for i, s in enumerate(proof.steps):
            if isinstance(s, Premise):
                remap[i] = self.hyp(proof.premises[s.index])
            elif isinstance(s, Axiom):
                remap[i] = self._add(Axiom(s.name or is_axiom(s.formula, self.logic), s.formula))
            elif isinstance(s, CSInstance):
                remap[i] = self.cs(s.formula)
            else:
                remap[i] = self._add(MP(remap[s.imp], remap[s.arg], s.formula))
        return remap[len(proof.steps) - 1]

    def build(self, line: Optional[int] = None) -> Proof:
        """The lines needed for ``line`` (default: the last one), renumbered."""
        if line is None:
            line = len(self.steps) - 1
        need = set()
        stack = [line]
        while stack:
            i = stack.pop()
            if i in need:
                continue
            need.add(i)
            s = self.steps[i]
            if isinstance(s, MP):
                stack += [s.imp, s.arg]
        order = sorted(need)
        pos = {old: new for new, old in enumerate(order)}
        out = []
        for old in order:
            s = self.steps[old]
            if isinstance(s, MP):
                s = MP(pos[s.imp], pos[s.arg], s.formula)
            out.append(s)
        return Proof(tuple(self.premises), tuple(out))

    def copy(self) -> "ProofBuilder":
        b = ProofBuilder(self.logic, self.premises)
        b.steps = list(self.steps)
        b.lines = dict(self.lines)
        return b

    # derived rules ---------------------------------------------------------

    def implies(self, hyp: Formula, body: Callable[["ProofBuilder", int], int]) -> int:
        """Prove ``hyp -> X`` where ``body`` derives X from ``hyp`` in a child context."""
        if hyp in self.lines:
            g = body(self, self.lines[hyp])
            x = self.formula(g)
            return self.mp(self.axiom("A1", Imp(x, Imp(hyp, x))), g)
        child = self.copy()
        g = body(child, child.hyp(hyp))
        return self.splice(deduction(child.build(g), hyp, self.logic))

    def self_imp(self, a: Formula) -> int:
        aa = Imp(a, a)
        if aa in self.lines:
            return self.lines[aa]
        s1 = self.axiom("A1", Imp(a, Imp(aa, a)))
        s2 = self.axiom("A2", Imp(Imp(a, Imp(aa, a)), Imp(Imp(a, aa), aa)))
        s3 = self.mp(s2, s1)
        s4 = self.axiom("A1", Imp(a, aa))
        return self.mp(s3, s4)

    def chain(self, line: int, *imps: int) -> int:
        for i in imps:
            line = self.mp(i, line)
        return line

    def and_intro(self, left: int, right: int) -> int:
        a, b = self.formula(left), self.formula(right)
        ax = self.axiom("A5", Imp(a, Imp(b, And(a, b))))
        return self.mp(self.mp(ax, left), right)

    def and_fold(self, lines: Sequence[int]) -> int:
        acc = lines[0]
        for l in lines[1:]:
            acc = self.and_intro(acc, l)
        return acc

    def and_elims(self, line: int, count: int) -> list:
        """Lines for each item of a left-folded conjunction of ``count`` items."""
        if count == 1:
            return [line]
        f = self.formula(line)
        if not isinstance(f, And):
            raise ShapeMismatch(f"expected a conjunction, got {print_formula(f)}")
        left = self.mp(self.axiom("A3", Imp(f, f.left)), line)
        right = self.mp(self.axiom("A4", Imp(f, f.right)), line)
        return self.and_elims(left, count - 1) + [right]

    def or_inject(self, line: int, items: Sequence[Formula], pos: int) -> int:
        """From a line proving ``items[pos]`` derive the left-folded disjunction."""
        if self.formula(line) != items[pos]:
            raise ShapeMismatch("line does not prove the selected disjunct")
        if len(items) == 1:
            return line
        prefix = big_or(items[:-1])
        last = items[-1]
        if pos == len(items) - 1:
            return self.mp(self.axiom("A7", Imp(last, Or(prefix, last))), line)
        inner = self.or_inject(line, items[:-1], pos)
        return self.mp(self.axiom("A6", Imp(prefix, Or(prefix, last))), inner)

    def or_cases(
        self,
        line: int,
        items: Sequence[Formula],
        goal: Formula,
        handler: Callable[["ProofBuilder", int, int], int],
    ) -> int:
        """Eliminate a left-folded disjunction; ``handler(child, hyp_line, i)`` proves ``goal``."""

        def case(i):
            return self.implies(items[i], lambda c, h: handler(c, h, i))

        acc = case(0)
        for i in range(1, len(items)):
            prefix = big_or(items[:i])
            nxt = case(i)
            ax = self.axiom(
                "A8", Imp(Imp(prefix, goal), Imp(Imp(items[i], goal), Imp(Or(prefix, items[i]), goal)))
            )
            acc = self.mp(self.mp(ax, acc), nxt)
        if self.formula(acc) != Imp(big_or(items), goal):
            raise ShapeMismatch("case split did not reach the goal")
        return self.mp(acc, line)

    def sum_inject(self, line: int, terms: Sequence[Term], pos: int) -> int:
        """From ``terms[pos]:X`` derive ``(t1 + ... + tk):X`` with the sum folded left."""
        f = self.formula(line)
        if not (isinstance(f, Just) and f.term == terms[pos]):
            raise ShapeMismatch("line does not justify with the selected term")
        if len(terms) == 1:
            return line
        body = f.body
        prefix = big_sum(terms[:-1])
        last = terms[-1]
        if pos == len(terms) - 1:
            ax = self.axiom("PlusR", Imp(Just(last, body), Just(Sum(prefix, last), body)))
            return self.mp(ax, line)
        inner = self.sum_inject(line, terms[:-1], pos)
        ax = self.axiom("PlusL", Imp(Just(prefix, body), Just(Sum(prefix, last), body)))
        return self.mp(ax, inner)

    def j_apply(self, imp_line: int, arg_line: int) -> int:
        """From ``t:(A -> B)`` and ``s:A`` derive ``(t . s):B``."""
        f, g = self.formula(imp_line), self.formula(arg_line)
        if not (isinstance(f, Just) and isinstance(f.body, Imp) and isinstance(g, Just)):
            raise ShapeMismatch("j_apply needs t:(A -> B) and s:A")
        ax = Imp(f, Imp(g, Just(App(f.term, g.term), f.body.right)))
        return self.mp(self.mp(self.axiom("J", ax), imp_line), arg_line)


# --------------------------------------------------------------------------
# Proof transformations


def deduction(proof: Proof, gamma: Formula, logic: LogicSpec) -> Proof:
    """Discharge every occurrence of the premise ``gamma``."""
    if gamma not in proof.premises:
        raise PremiseNotFound(print_formula(gamma))
    rest = [p for p in proof.premises if p != gamma]
    b = ProofBuilder(logic, rest)
    plain: dict = {}  # step -> line proving the step formula
    lifted: dict = {}  # step -> line proving gamma -> step formula

    def lift(i: int) -> int:
        if i not in lifted:
            f = proof.steps[i].formula
            lifted[i] = b.mp(b.axiom("A1", Imp(f, Imp(gamma, f))), plain[i])
        return lifted[i]

    for i, s in enumerate(proof.steps):
        if isinstance(s, Premise):
            if s.formula == gamma:
                lifted[i] = b.self_imp(gamma)
            else:
                plain[i] = b.premise(rest.index(s.formula))
        elif isinstance(s, Axiom):
            plain[i] = b.axiom(s.name or is_axiom(s.formula, logic), s.formula)
        elif isinstance(s, CSInstance):
            plain[i] = b.cs(s.formula)
        else:
            j, k = s.imp, s.arg
            if j in plain and k in plain:
                plain[i] = b.mp(plain[j], plain[k])
                continue
            lj, lk = lift(j), lift(k)
            a_k = proof.steps[k].formula
            ax = Imp(Imp(gamma, Imp(a_k, s.formula)), Imp(Imp(gamma, a_k), Imp(gamma, s.formula)))
            lifted[i] = b.mp(b.mp(b.axiom("A2", ax), lj), lk)
    last = len(proof.steps) - 1
    return b.build(lifted[last] if last in lifted else lift(last))


def internalize(proof: Proof, terms: Sequence[Term], logic: LogicSpec) -> tuple:
    """Lift a proof of ``phi`` from ``g_i`` to a proof of ``t:phi`` from ``s_i:g_i``."""
    if len(terms) != len(proof.premises):
        raise ShapeMismatch("one term per premise is required")
    b = ProofBuilder(logic, [Just(s, g) for s, g in zip(terms, proof.premises)])
    term_of: list = []
    line_of: list = []
    for s in proof.steps:
        if isinstance(s, Premise):
            t = terms[s.index]
            line = b.premise(s.index)
        elif isinstance(s, (Axiom, CSInstance)):
            t = Const(1)
            line = b.cs(Just(t, s.formula))
        else:
            tj, tk = term_of[s.imp], term_of[s.arg]
            line = b.j_apply(line_of[s.imp], line_of[s.arg])
            t = App(tj, tk)
        term_of.append(t)
        line_of.append(line)
    return term_of[-1], b.build(line_of[-1])


def subst_proof(proof: Proof, sigma: JustSubstitution, logic: LogicSpec) -> Proof:
    """Image of a premise-free proof under a justification substitution."""
    if proof.premises:
        raise ShapeMismatch("subst_proof needs a premise-free proof")
    b = ProofBuilder(logic)
    line: list = []
    for s in proof.steps:
        f = apply_just(sigma, s.formula)
        if isinstance(s, Axiom):
            line.append(b.axiom(s.name or is_axiom(s.formula, logic), f))
        elif isinstance(s, CSInstance):
            line.append(b.cs(f))
        elif isinstance(s, MP):
            line.append(b.mp(line[s.imp], line[s.arg]))
        else:
            raise ShapeMismatch("unexpected premise step")
    return b.build(line[-1])


def modus_ponens(major: Proof, minor: Proof, logic: LogicSpec) -> Proof:
    b = ProofBuilder(logic)
    return b.build(b.mp(b.splice(major), b.splice(minor)))


# --------------------------------------------------------------------------
# Combinators on premise-free proofs


def _imp_parts(proof: Proof) -> tuple:
    f = proof.conclusion
    if not isinstance(f, Imp):
        raise ShapeMismatch(f"expected an implication, got {print_formula(f)}")
    return f.left, f.right


def self_implication(a: Formula, logic: LogicSpec = IPCJ) -> Proof:
    b = ProofBuilder(logic)
    return b.build(b.self_imp(a))


def syllogism(ab: Proof, bc: Proof, logic: LogicSpec = IPCJ) -> Proof:
    a, b1 = _imp_parts(ab)
    b2, _ = _imp_parts(bc)
    if b1 != b2:
        raise ShapeMismatch("middle formulas differ")
    pb = ProofBuilder(logic)
    l_ab, l_bc = pb.splice(ab), pb.splice(bc)
    return pb.build(pb.implies(a, lambda c, h: c.mp(l_bc, c.mp(l_ab, h))))


def _spine(f: Formula, kind) -> int:
    n = 1
    while isinstance(f, kind):
        f = f.left
        n += 1
    return n


def conj_elim_k(proof: Proof, k: int, count: Optional[int] = None, logic: LogicSpec = IPCJ) -> Proof:
    """From ``x -> (a1 & ... & an)`` derive ``x -> ak`` (1-based)."""
    x, conj = _imp_parts(proof)
    count = count or _spine(conj, And)
    if not 1 <= k <= count:
        raise ShapeMismatch(f"no conjunct {k} among {count}")
    b = ProofBuilder(logic)
    base = b.splice(proof)
    return b.build(b.implies(x, lambda c, h: c.and_elims(c.mp(base, h), count)[k - 1]))


def conj_intro(proofs: Sequence[Proof], logic: LogicSpec = IPCJ) -> Proof:
    """From ``x -> a_i`` for each i derive ``x -> a1 & ... & an``."""
    xs = {_imp_parts(p)[0] for p in proofs}
    if len(xs) != 1:
        raise ShapeMismatch("antecedents differ")
    (x,) = xs
    b = ProofBuilder(logic)
    lines = [b.splice(p) for p in proofs]
    return b.build(b.implies(x, lambda c, h: c.and_fold([c.mp(l, h) for l in lines])))


def disj_intro(proof: Proof, items: Sequence[Formula], pos: int, logic: LogicSpec = IPCJ) -> Proof:
    """From ``x -> items[pos]`` derive ``x -> items[0] | ... | items[-1]``."""
    x, a = _imp_parts(proof)
    if items[pos] != a:
        raise ShapeMismatch("selected disjunct differs from the consequent")
    b = ProofBuilder(logic)
    base = b.splice(proof)
    return b.build(b.implies(x, lambda c, h: c.or_inject(c.mp(base, h), items, pos)))


def case_glue(proofs: Sequence[Proof], logic: LogicSpec = IPCJ) -> Proof:
    """From ``a_i -> g`` for each i derive ``(a1 | ... | an) -> g`` via A8."""
    parts = [_imp_parts(p) for p in proofs]
    goals = {g for _, g in parts}
    if len(goals) != 1:
        raise ShapeMismatch("consequents differ")
    (goal,) = goals
    items = [a for a, _ in parts]
    b = ProofBuilder(logic)
    lines = [b.splice(p) for p in proofs]
    whole = big_or(items)
    return b.build(
        b.implies(whole, lambda c, h: c.or_cases(h, items, goal, lambda cc, hh, i: cc.mp(lines[i], hh)))
    )
