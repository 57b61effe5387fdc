"""Finite posets up to isomorphism.

A poset on ``range(n)`` is a frozenset of pairs ``(x, y)`` meaning ``x <= y``
(reflexive pairs included). Enumeration grows naturally labelled posets one
maximal element at a time and keeps one canonical representative per
isomorphism class.
"""

from __future__ import annotations

import itertools
from functools import lru_cache


def downsets(n: int, leq: frozenset) -> list:
    """All downward closed subsets of a poset, as sorted tuples."""
    out = []
    for mask in range(1 << n):
        members = [x for x in range(n) if mask >> x & 1]
        ok = all(mask >> y & 1 for x in members for y in range(n) if (y, x) in leq)
        if ok:
            out.append(tuple(members))
    return out


def _key(n: int, leq: frozenset, perm) -> tuple:
    # position i of the relabelled poset holds element perm[i]
    return tuple(
        1 if (perm[i], perm[j]) in leq else 0 for i in range(n) for j in range(n)
    )


def canonical(n: int, leq: frozenset) -> frozenset:
    """Lexicographically greatest relabelling among degree-respecting ones."""
    below = [sum(1 for y in range(n) if (y, x) in leq) for x in range(n)]
    above = [sum(1 for y in range(n) if (x, y) in leq) for x in range(n)]
    sig = sorted(range(n), key=lambda x: (below[x], -above[x]))
    blocks = [list(g) for _, g in itertools.groupby(sig, key=lambda x: (below[x], -above[x]))]
    best = None
    best_perm = None
    for choice in itertools.product(*(itertools.permutations(b) for b in blocks)):
        perm = [x for block in choice for x in block]
        k = _key(n, leq, perm)
        if best is None or k > best:
            best, best_perm = k, perm
    pos = {x: i for i, x in enumerate(best_perm)}
    return frozenset((pos[x], pos[y]) for x, y in leq)


@lru_cache(maxsize=None)
def posets(n: int) -> tuple:
    """Representatives of all posets with ``n`` elements, in a fixed order."""
    if n == 0:
        return (frozenset(),)
    seen = {}
    for base in posets(n - 1):
        for down in downsets(n - 1, base):
            leq = set(base)
            leq.add((n - 1, n - 1))
            for x in down:
                leq.add((x, n - 1))
            c = canonical(n, frozenset(leq))
            seen.setdefault(_key(n, c, list(range(n))), c)
    return tuple(seen[k] for k in sorted(seen, reverse=True))


def is_partial_order(n: int, leq) -> bool:
    leq = set(leq)
    if any((x, x) not in leq for x in range(n)):
        return False
    if any((y, x) in leq and x != y for x, y in leq):
        return False
    return all((x, z) in leq for x, y in leq for y2, z in leq if y == y2)
