"""Free Lie algebra on letters 0..n-1, graded by letter multidegree.

Basis: Lyndon words with their standard bracketings.  Elements are handled
in two forms: noncommutative polynomials (dict word -> coefficient) and
coordinate vectors over the lex-sorted Lyndon words of one multidegree.
The expansion of a standard bracketing is unitriangular against lex order,
which `to_lyndon_coords` exploits.
"""

from __future__ import annotations

from fractions import Fraction as Q
from functools import lru_cache
from itertools import permutations


def is_lyndon(w) -> bool:
    if not w:
        return False
    n = len(w)
    for k in range(1, n):
        if w[k:] + w[:k] <= w:
            return False
    return True


@lru_cache(maxsize=None)
def lyndon_words(content) -> tuple:
    """Lex-sorted Lyndon words with the given letter multidegree."""
    letters = []
    for i, c in enumerate(content):
        letters.extend([i] * c)
    seen = sorted(set(p for p in permutations(letters) if is_lyndon(p)))
    return tuple(seen)


@lru_cache(maxsize=None)
def standard_bracketing(w):
    """Right-normed standard factorization tree of a Lyndon word.
    Leaves are letters; nodes are (left, right) pairs."""
    if len(w) == 1:
        return w[0]
    for k in range(1, len(w)):
        if is_lyndon(w[k:]):
            return (standard_bracketing(w[:k]), standard_bracketing(w[k:]))
    raise ValueError(f"not a Lyndon word: {w}")


def tree_word(tree):
    if isinstance(tree, int):
        return (tree,)
    return tree_word(tree[0]) + tree_word(tree[1])


def tree_content(tree, n):
    c = [0] * n
    for letter in tree_word(tree):
        c[letter] += 1
    return tuple(c)


def poly_add(p, q, c=Q(1)):
    out = dict(p)
    for w, v in q.items():
        nv = out.get(w, Q(0)) + c * v
        if nv:
            out[w] = nv
        else:
            out.pop(w, None)
    return out


def poly_scale(p, c):
    c = Q(c)
    if c == 0:
        return {}
    return {w: c * v for w, v in p.items()}


def poly_mul(p, q):
    out = {}
    for w1, v1 in p.items():
        for w2, v2 in q.items():
            w = w1 + w2
            nv = out.get(w, Q(0)) + v1 * v2
            if nv:
                out[w] = nv
            else:
                out.pop(w, None)
    return out


def poly_bracket(p, q):
    return poly_add(poly_mul(p, q), poly_mul(q, p), Q(-1))


@lru_cache(maxsize=None)
def expand_tree(tree):
    """Noncommutative-polynomial expansion of a bracketing tree."""
    if isinstance(tree, int):
        return {(tree,): Q(1)}
    return poly_bracket(expand_tree(tree[0]), expand_tree(tree[1]))


@lru_cache(maxsize=None)
def lyndon_basis_expansions(content):
    """For each Lyndon word at `content`: its bracketing's expansion."""
    return tuple(expand_tree(standard_bracketing(w)) for w in lyndon_words(content))


def to_lyndon_coords(poly, content):
    """Coordinates of a Lie element (given as a polynomial) over the Lyndon
    basis at `content`.  Raises if the input is not a Lie element."""
    words = lyndon_words(content)
    pos = {w: k for k, w in enumerate(words)}
    expansions = lyndon_basis_expansions(content)
    coords = [Q(0)] * len(words)
    rest = dict(poly)
    while rest:
        w = min(rest)
        k = pos.get(w)
        if k is None:
            raise ValueError(f"polynomial is not a Lie element (stray word {w})")
        c = rest[w]
        coords[k] = c
        rest = poly_add(rest, expansions[k], -c)
    return coords


def coords_to_poly(coords, content):
    expansions = lyndon_basis_expansions(content)
    out = {}
    for c, e in zip(coords, expansions):
        if c:
            out = poly_add(out, e, c)
    return out


def ad_letter(i, poly):
    """[f_i, poly] in the free algebra."""
    fi = {(i,): Q(1)}
    return poly_bracket(fi, poly)
