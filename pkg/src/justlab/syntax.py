"""Formulas and terms for justification, modal and star languages.

All four languages share the propositional node types (``Bottom``, ``Atom``,
``And``, ``Or``, ``Imp``). Justification formulas add ``Just``, modal
formulas add ``Box`` (with an optional index once annotated), and star
formulas add the opaque atom ``BoxVar`` standing for a justified formula.

Concrete syntax::

    p3  x2  c1  bot  ~A  A & B  A | B  A -> B
    t:A  (t . s)  (t + s)  !t  #A  #4 A  {t:A}

``~`` and ``t:`` bind tightest, then ``&``, ``|`` and finally ``->`` which
associates to the right. ``&`` and ``|`` associate to the left.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterable, Iterator, Optional, Union

from .errors import FormulaSyntaxError

# --------------------------------------------------------------------------
# Terms


@dataclass(frozen=True)
class Var:
    index: int


@dataclass(frozen=True)
class Const:
    index: int


@dataclass(frozen=True)
class App:
    left: "Term"
    right: "Term"


@dataclass(frozen=True)
class Sum:
    left: "Term"
    right: "Term"


@dataclass(frozen=True)
class Bang:
    term: "Term"


Term = Union[Var, Const, App, Sum, Bang]

# --------------------------------------------------------------------------
# Formulas


@dataclass(frozen=True)
class Bottom:
    pass


@dataclass(frozen=True)
class Atom:
    index: int


@dataclass(frozen=True)
class And:
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True)
class Or:
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True)
class Imp:
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True)
class Just:
    term: Term
    body: "Formula"


@dataclass(frozen=True)
class Box:
    body: "Formula"
    index: Optional[int] = None


@dataclass(frozen=True)
class BoxVar:
    """Star-language atom standing for the justified formula ``term:body``."""

    body: "Formula"
    term: Term


Formula = Union[Bottom, Atom, And, Or, Imp, Just, Box, BoxVar]
PlainVar = Atom

BOT = Bottom()

BINARY = (And, Or, Imp)


def neg(phi: Formula) -> Formula:
    return Imp(phi, BOT)


def big_and(items: Iterable[Formula]) -> Formula:
    """Left-folded conjunction; a singleton is returned bare."""
    items = list(items)
    if not items:
        raise ValueError("empty conjunction")
    out = items[0]
    for item in items[1:]:
        out = And(out, item)
    return out


def big_or(items: Iterable[Formula]) -> Formula:
    """Left-folded disjunction; a singleton is returned bare."""
    items = list(items)
    if not items:
        raise ValueError("empty disjunction")
    out = items[0]
    for item in items[1:]:
        out = Or(out, item)
    return out


def big_sum(terms: Iterable[Term]) -> Term:
    terms = list(terms)
    if not terms:
        raise ValueError("empty sum")
    out = terms[0]
    for t in terms[1:]:
        out = Sum(out, t)
    return out


# --------------------------------------------------------------------------
# Traversals


def children(phi: Formula) -> tuple:
    if isinstance(phi, BINARY):
        return (phi.left, phi.right)
    if isinstance(phi, (Just, Box)):
        return (phi.body,)
    if isinstance(phi, BoxVar):
        # the body of a star atom is opaque at the propositional level
        return ()
    return ()


def subformulas(phi: Formula) -> frozenset:
    """Smallest set containing ``phi`` closed under immediate subformulas."""
    seen: set = set()
    stack = [phi]
    while stack:
        f = stack.pop()
        if f in seen:
            continue
        seen.add(f)
        stack.extend(children(f))
    return frozenset(seen)


def closure(formulas: Iterable[Formula]) -> frozenset:
    out: set = set()
    for f in formulas:
        out |= subformulas(f)
    return frozenset(out)


def node_count(phi: Formula) -> int:
    return 1 + sum(node_count(c) for c in children(phi))


def atoms(phi: Formula) -> frozenset:
    """Propositional atoms, including those under justifications and boxes."""
    if isinstance(phi, Atom):
        return frozenset({phi.index})
    if isinstance(phi, BoxVar):
        return atoms(phi.body)
    out: frozenset = frozenset()
    for c in children(phi):
        out |= atoms(c)
    return out


def subterms(t: Term) -> Iterator[Term]:
    yield t
    if isinstance(t, (App, Sum)):
        yield from subterms(t.left)
        yield from subterms(t.right)
    elif isinstance(t, Bang):
        yield from subterms(t.term)


def term_depth(t: Term) -> int:
    if isinstance(t, (App, Sum)):
        return 1 + max(term_depth(t.left), term_depth(t.right))
    if isinstance(t, Bang):
        return 1 + term_depth(t.term)
    return 0


def terms_of(phi: Formula) -> frozenset:
    """All justification terms heading a ``Just`` node, with their subterms."""
    out: set = set()
    for f in subformulas(phi):
        if isinstance(f, Just):
            out.update(subterms(f.term))
    return frozenset(out)


def box_indices(phi: Formula) -> list:
    """Indices of ``Box`` nodes in left-to-right preorder (None for bare boxes)."""
    out: list = []

    def walk(f: Formula) -> None:
        if isinstance(f, Box):
            out.append(f.index)
        for c in children(f):
            walk(c)

    walk(phi)
    return out


def uniquely_annotated(phi: Formula) -> bool:
    idx = box_indices(phi)
    return None not in idx and all(i >= 1 for i in idx) and len(set(idx)) == len(idx)


def annotate(phi: Formula) -> Formula:
    """Number boxes 1, 2, ... in left-to-right depth-first preorder."""
    counter = [0]

    def walk(f: Formula) -> Formula:
        if isinstance(f, Box):
            counter[0] += 1
            n = counter[0]
            return Box(walk(f.body), n)
        if isinstance(f, BINARY):
            return type(f)(walk(f.left), walk(f.right))
        if isinstance(f, Just):
            return Just(f.term, walk(f.body))
        return f

    return walk(phi)


def project(phi: Formula) -> Formula:
    """Drop all box indices."""
    if isinstance(phi, Box):
        return Box(project(phi.body))
    if isinstance(phi, BINARY):
        return type(phi)(project(phi.left), project(phi.right))
    if isinstance(phi, Just):
        return Just(phi.term, project(phi.body))
    return phi


def star_translate(phi: Formula) -> Formula:
    if isinstance(phi, Just):
        return BoxVar(phi.body, phi.term)
    if isinstance(phi, BINARY):
        return type(phi)(star_translate(phi.left), star_translate(phi.right))
    return phi


def star_untranslate(psi: Formula) -> Formula:
    if isinstance(psi, BoxVar):
        return Just(psi.term, psi.body)
    if isinstance(psi, BINARY):
        return type(psi)(star_untranslate(psi.left), star_untranslate(psi.right))
    return psi


def language_of(phi: Formula) -> set:
    """Which extension node kinds occur: a subset of {'just', 'box', 'star'}."""
    kinds: set = set()
    stack = [phi]
    while stack:
        f = stack.pop()
        if isinstance(f, Just):
            kinds.add("just")
        elif isinstance(f, Box):
            kinds.add("box")
        elif isinstance(f, BoxVar):
            kinds.add("star")
            kinds |= language_of(f.body) & {"box", "star"}
            continue
        stack.extend(children(f))
    return kinds


# --------------------------------------------------------------------------
# Printing


def print_term(t: Term) -> str:
    if isinstance(t, Var):
        return f"x{t.index}"
    if isinstance(t, Const):
        return f"c{t.index}"
    if isinstance(t, App):
        return f"({print_term(t.left)} . {print_term(t.right)})"
    if isinstance(t, Sum):
        return f"({print_term(t.left)} + {print_term(t.right)})"
    if isinstance(t, Bang):
        return f"!{print_term(t.term)}"
    raise TypeError(f"not a term: {t!r}")


_PREC = {Imp: 1, Or: 2, And: 3}
_UNARY = 4


def _prec(phi: Formula) -> int:
    if isinstance(phi, Imp) and phi.right == BOT:
        return _UNARY
    return _PREC.get(type(phi), _UNARY)


def print_formula(phi: Formula) -> str:
    """Render with the fewest parentheses that still parse back to ``phi``."""

    def wrap(f: Formula, need: int) -> str:
        s = render(f)
        return f"({s})" if _prec(f) < need else s

    def render(f: Formula) -> str:
        if isinstance(f, Bottom):
            return "bot"
        if isinstance(f, Atom):
            return f"p{f.index}"
        if isinstance(f, Imp) and f.right == BOT:
            return "~" + wrap(f.left, _UNARY)
        if isinstance(f, Imp):
            return f"{wrap(f.left, 2)} -> {wrap(f.right, 1)}"
        if isinstance(f, Or):
            return f"{wrap(f.left, 2)} | {wrap(f.right, 3)}"
        if isinstance(f, And):
            return f"{wrap(f.left, 3)} & {wrap(f.right, _UNARY)}"
        if isinstance(f, Just):
            return f"{print_term(f.term)}:{wrap(f.body, _UNARY)}"
        if isinstance(f, Box):
            body = wrap(f.body, _UNARY)
            if f.index is None:
                return "#" + body
            return f"#{f.index} {body}"
        if isinstance(f, BoxVar):
            return "{" + f"{print_term(f.term)}:{wrap(f.body, _UNARY)}" + "}"
        raise TypeError(f"not a formula: {f!r}")

    return render(phi)


def show(x: Union[Term, Formula]) -> str:
    if isinstance(x, (Var, Const, App, Sum, Bang)):
        return print_term(x)
    return print_formula(x)


# --------------------------------------------------------------------------
# Parsing

_TOKEN = re.compile(
    r"\s*(?:"
    r"(?P<arrow>->)|(?P<boxn>#\d+)|(?P<atom>p\d+)|(?P<var>x\d+)|(?P<const>c\d+)"
    r"|(?P<bot>bot\b)|(?P<sym>[&|~:().+!#{}])"
    r")"
)


_SPACE = re.compile(r"\s*")


def _tokenize(text: str) -> list:
    tokens = []
    pos = 0
    while True:
        m = _SPACE.match(text, pos)
        pos = m.end()
        if pos >= len(text):
            break
        m = _TOKEN.match(text, pos)
        if m is None or m.end() == pos:
            raise FormulaSyntaxError("unexpected character", text, _byte(text, pos))
        kind = m.lastgroup
        start = m.start(kind)
        tokens.append((kind, m.group(kind), start))
        pos = m.end()
    tokens.append(("eof", "", len(text)))
    return tokens


def _byte(text: str, pos: int) -> int:
    return len(text[:pos].encode("utf-8"))


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.toks = _tokenize(text)
        self.i = 0

    def peek(self):
        return self.toks[self.i]

    def fail(self, message: str, tok=None):
        tok = tok or self.peek()
        raise FormulaSyntaxError(message, self.text, _byte(self.text, tok[2]))

    def eat(self, value: str):
        tok = self.peek()
        if tok[1] != value:
            self.fail(f"expected {value!r}")
        self.i += 1
        return tok

    def formula(self) -> Formula:
        left = self.disj()
        if self.peek()[0] == "arrow":
            self.i += 1
            return Imp(left, self.formula())
        return left

    def disj(self) -> Formula:
        out = self.conj()
        while self.peek()[1] == "|":
            self.i += 1
            out = Or(out, self.conj())
        return out

    def conj(self) -> Formula:
        out = self.unary()
        while self.peek()[1] == "&":
            self.i += 1
            out = And(out, self.unary())
        return out

    def unary(self) -> Formula:
        kind, value, _ = self.peek()
        if value == "~":
            self.i += 1
            return Imp(self.unary(), BOT)
        if kind == "boxn":
            self.i += 1
            return Box(self.unary(), int(value[1:]))
        if value == "#":
            self.i += 1
            return Box(self.unary())
        if kind in ("var", "const") or value == "!":
            t = self.term()
            self.eat(":")
            return Just(t, self.unary())
        if value == "(":
            save = self.i
            try:
                t = self.term()
            except FormulaSyntaxError:
                t = None
            if t is not None and self.peek()[1] == ":":
                self.i += 1
                return Just(t, self.unary())
            self.i = save + 1
            inner = self.formula()
            self.eat(")")
            return inner
        if value == "{":
            self.i += 1
            t = self.term()
            self.eat(":")
            body = self.unary()
            self.eat("}")
            return BoxVar(body, t)
        if kind == "atom":
            self.i += 1
            return Atom(int(value[1:]))
        if kind == "bot":
            self.i += 1
            return BOT
        self.fail("expected a formula")

    def term(self) -> Term:
        kind, value, _ = self.peek()
        if kind == "var":
            self.i += 1
            return Var(int(value[1:]))
        if kind == "const":
            self.i += 1
            return Const(int(value[1:]))
        if value == "!":
            self.i += 1
            return Bang(self.term())
        if value == "(":
            self.i += 1
            left = self.term()
            op = self.peek()[1]
            if op not in (".", "+"):
                self.fail("expected '.' or '+'")
            self.i += 1
            right = self.term()
            self.eat(")")
            return App(left, right) if op == "." else Sum(left, right)
        self.fail("expected a term")


LANGS = ("j", "modal", "star", "any")


def parse_formula(text: str, lang: str = "any") -> Formula:
    """Parse ``text``; ``lang`` restricts which extension nodes may occur."""
    if lang not in LANGS:
        raise ValueError(f"unknown language {lang!r}")
    p = _Parser(text)
    phi = p.formula()
    if p.peek()[0] != "eof":
        p.fail("trailing input")
    forbidden = {"j": {"box", "star"}, "modal": {"just", "star"}, "star": {"box"}, "any": set()}[lang]
    bad = language_of(phi) & forbidden
    if lang == "star" and _has_bare_just(phi):
        bad.add("just")
    if bad:
        raise FormulaSyntaxError(f"{sorted(bad)[0]} not allowed in language {lang!r}", text, 0)
    return phi


def _has_bare_just(phi: Formula) -> bool:
    """A ``Just`` outside any star atom."""
    if isinstance(phi, Just):
        return True
    if isinstance(phi, BoxVar):
        return False
    return any(_has_bare_just(c) for c in children(phi))


def parse_jformula(text: str) -> Formula:
    return parse_formula(text, "j")


def parse_modal(text: str) -> Formula:
    return parse_formula(text, "modal")


def parse_term(text: str) -> Term:
    p = _Parser(text)
    t = p.term()
    if p.peek()[0] != "eof":
        p.fail("trailing input")
    return t


# --------------------------------------------------------------------------
# JSON


def term_to_json(t: Term) -> dict:
    if isinstance(t, Var):
        return {"kind": "var", "index": t.index}
    if isinstance(t, Const):
        return {"kind": "const", "index": t.index}
    if isinstance(t, App):
        return {"kind": "app", "left": term_to_json(t.left), "right": term_to_json(t.right)}
    if isinstance(t, Sum):
        return {"kind": "sum", "left": term_to_json(t.left), "right": term_to_json(t.right)}
    if isinstance(t, Bang):
        return {"kind": "bang", "term": term_to_json(t.term)}
    raise TypeError(f"not a term: {t!r}")


def term_from_json(d: dict) -> Term:
    kind = d["kind"]
    if kind == "var":
        return Var(int(d["index"]))
    if kind == "const":
        return Const(int(d["index"]))
    if kind == "app":
        return App(term_from_json(d["left"]), term_from_json(d["right"]))
    if kind == "sum":
        return Sum(term_from_json(d["left"]), term_from_json(d["right"]))
    if kind == "bang":
        return Bang(term_from_json(d["term"]))
    raise ValueError(f"unknown term kind {kind!r}")


_BIN_KIND = {And: "and", Or: "or", Imp: "imp"}
_KIND_BIN = {v: k for k, v in _BIN_KIND.items()}


def to_json(phi: Formula) -> dict:
    if isinstance(phi, Bottom):
        return {"kind": "bot"}
    if isinstance(phi, Atom):
        return {"kind": "atom", "index": phi.index}
    if isinstance(phi, BINARY):
        return {"kind": _BIN_KIND[type(phi)], "left": to_json(phi.left), "right": to_json(phi.right)}
    if isinstance(phi, Just):
        return {"kind": "just", "term": term_to_json(phi.term), "body": to_json(phi.body)}
    if isinstance(phi, Box):
        return {"kind": "box", "index": phi.index, "body": to_json(phi.body)}
    if isinstance(phi, BoxVar):
        return {"kind": "boxvar", "term": term_to_json(phi.term), "body": to_json(phi.body)}
    raise TypeError(f"not a formula: {phi!r}")


def from_json(d: dict) -> Formula:
    kind = d["kind"]
    if kind == "bot":
        return BOT
    if kind == "atom":
        return Atom(int(d["index"]))
    if kind in _KIND_BIN:
        return _KIND_BIN[kind](from_json(d["left"]), from_json(d["right"]))
    if kind == "just":
        return Just(term_from_json(d["term"]), from_json(d["body"]))
    if kind == "box":
        return Box(from_json(d["body"]), d.get("index"))
    if kind == "boxvar":
        return BoxVar(from_json(d["body"]), term_from_json(d["term"]))
    raise ValueError(f"unknown formula kind {kind!r}")


def formula_from_any(x) -> Formula:
    """Accept either concrete syntax or a JSON AST dictionary."""
    if isinstance(x, str):
        return parse_formula(x)
    if isinstance(x, dict):
        return from_json(x)
    return x
