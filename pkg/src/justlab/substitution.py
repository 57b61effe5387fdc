"""Propositional and justification substitutions."""

from __future__ import annotations

from typing import Iterable, Mapping, Union

from .errors import AnnotationError
from .syntax import (
    App,
    Atom,
    Bang,
    BINARY,
    Box,
    BoxVar,
    Const,
    Formula,
    Just,
    Sum,
    Term,
    Var,
    box_indices,
    children,
    print_term,
    term_from_json,
    term_to_json,
    uniquely_annotated,
)


class PropSubstitution:
    """Atom index -> formula; identity on atoms outside the map."""

    def __init__(self, mapping: Mapping[int, Formula] | None = None):
        self._map = {k: v for k, v in (mapping or {}).items() if v != Atom(k)}

    def __call__(self, phi: Formula) -> Formula:
        return apply_prop(self, phi)

    def get(self, k: int) -> Formula:
        return self._map.get(k, Atom(k))

    def __eq__(self, other):
        return isinstance(other, PropSubstitution) and self._map == other._map

    def __hash__(self):
        return hash(frozenset(self._map.items()))


def apply_prop(sigma: PropSubstitution, phi: Formula) -> Formula:
    if isinstance(phi, Atom):
        return sigma.get(phi.index)
    if isinstance(phi, BINARY):
        return type(phi)(apply_prop(sigma, phi.left), apply_prop(sigma, phi.right))
    if isinstance(phi, Just):
        return Just(phi.term, apply_prop(sigma, phi.body))
    if isinstance(phi, Box):
        return Box(apply_prop(sigma, phi.body), phi.index)
    return phi


class JustSubstitution:
    """Term-variable index -> term; identity outside the map.

    Entries mapping ``x_k`` to itself are dropped, so the keys are exactly
    the domain.
    """

    __slots__ = ("_map",)

    def __init__(self, mapping: Mapping[int, Term] | None = None):
        self._map = {k: v for k, v in sorted((mapping or {}).items()) if v != Var(k)}

    @property
    def domain(self) -> frozenset:
        return frozenset(self._map)

    def image(self, k: int) -> Term:
        return self._map.get(k, Var(k))

    def items(self):
        return self._map.items()

    def __call__(self, x):
        return apply_just(self, x)

    def __eq__(self, other):
        return isinstance(other, JustSubstitution) and self._map == other._map

    def __hash__(self):
        return hash(frozenset(self._map.items()))

    def __bool__(self):
        return bool(self._map)

    def __repr__(self):
        inner = ", ".join(f"x{k} -> {print_term(v)}" for k, v in self._map.items())
        return f"JustSubstitution({{{inner}}})"

    def to_json(self) -> dict:
        return {"just_subst": [{"var": k, "term": term_to_json(v)} for k, v in self._map.items()]}

    @classmethod
    def from_json(cls, d: dict) -> "JustSubstitution":
        return cls({int(e["var"]): term_from_json(e["term"]) for e in d["just_subst"]})


IDENTITY = JustSubstitution()


def apply_just(sigma: JustSubstitution, x: Union[Term, Formula]):
    if not sigma._map:
        return x
    return _apply(sigma, x)


def _apply(sigma, x):
    if isinstance(x, Var):
        return sigma.image(x.index)
    if isinstance(x, Const):
        return x
    if isinstance(x, App):
        return App(_apply(sigma, x.left), _apply(sigma, x.right))
    if isinstance(x, Sum):
        return Sum(_apply(sigma, x.left), _apply(sigma, x.right))
    if isinstance(x, Bang):
        return Bang(_apply(sigma, x.term))
    if isinstance(x, BINARY):
        return type(x)(_apply(sigma, x.left), _apply(sigma, x.right))
    if isinstance(x, Just):
        return Just(_apply(sigma, x.term), _apply(sigma, x.body))
    if isinstance(x, Box):
        return Box(_apply(sigma, x.body), x.index)
    if isinstance(x, BoxVar):
        return BoxVar(_apply(sigma, x.body), _apply(sigma, x.term))
    return x


def compose(sigma: JustSubstitution, tau: JustSubstitution) -> JustSubstitution:
    """``sigma`` first, then ``tau``: x |-> tau(sigma(x))."""
    keys = set(sigma.domain) | set(tau.domain)
    return JustSubstitution({k: apply_just(tau, sigma.image(k)) for k in keys})


def compose_all(sigmas: Iterable[JustSubstitution]) -> JustSubstitution:
    out = IDENTITY
    for s in sigmas:
        out = compose(out, s)
    return out


def jvar(x: Union[Term, Formula]) -> frozenset:
    """Indices of the justification variables occurring in a term or formula."""
    out: set = set()
    stack = [x]
    while stack:
        y = stack.pop()
        if isinstance(y, Var):
            out.add(y.index)
        elif isinstance(y, (App, Sum)):
            stack += [y.left, y.right]
        elif isinstance(y, Bang):
            stack.append(y.term)
        elif isinstance(y, Just):
            stack += [y.term, y.body]
        elif isinstance(y, BoxVar):
            stack += [y.term, y.body]
        elif not isinstance(y, Const):
            stack.extend(children(y))
    return frozenset(out)


def meets_no_new_variables(sigma: JustSubstitution) -> bool:
    return all(jvar(t) <= {k} for k, t in sigma.items())


def _indices(phi: Formula) -> set:
    if not uniquely_annotated(phi):
        raise AnnotationError("formula is not uniquely annotated")
    return set(box_indices(phi))


def lives_on(sigma: JustSubstitution, phi: Formula) -> bool:
    return sigma.domain <= _indices(phi)


def lives_away(sigma: JustSubstitution, phi: Formula) -> bool:
    return not (sigma.domain & _indices(phi))
