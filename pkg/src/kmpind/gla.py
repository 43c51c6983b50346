"""The lower triangular half of a symmetrizable Kac-Moody algebra up to a
height cutoff, as the free Lie algebra on f_1..f_n modulo the Serre ideal.

Per multidegree beta the Serre ideal piece is spanned by iterated ad-f
applications to the Serre elements (ad f_i)^(1-A[i][j]) f_j, row-reduced in
the Lyndon basis; the surviving (non-pivot) Lyndon bracketings are the
chosen basis of the root space g_{-beta}.  Raising operators e_i act via
the standard derivation formulas, computed on representatives and projected.
"""

from __future__ import annotations

import json
from fractions import Fraction as Q
from math import factorial

from . import freelie as fl
from .cartan import CartanDatum, ParabolicType, offset_key, enumerate_root_candidates, q_to_str, q_from_str
from .errors import BudgetExceeded, TruncationOverflow

TABLE_FORMAT = "kmpind-tables"
TABLE_VERSION = 1


def _word_count(content) -> int:
    h = sum(content)
    c = factorial(h)
    for x in content:
        c //= factorial(x)
    return c


class SerreContext:
    """Memoized Serre-ideal reductions for one Cartan datum."""

    def __init__(self, datum: CartanDatum):
        self.datum = datum
        self.n = datum.n
        self._ideal = {}
        self._gens = {}
        for i in range(self.n):
            for j in range(self.n):
                if i == j:
                    continue
                m = 1 - datum.a[i][j]
                content = tuple(m if k == i else (1 if k == j else 0) for k in range(self.n))
                poly = {(j,): Q(1)}
                for _ in range(m):
                    poly = fl.ad_letter(i, poly)
                self._gens.setdefault(content, []).append(poly)

    def ideal_reduction(self, content):
        """(rref rows over Lyndon coordinates, pivot positions) at `content`."""
        if content in self._ideal:
            return self._ideal[content]
        words = fl.lyndon_words(content)
        rows = []
        for i in range(self.n):
            if content[i] == 0:
                continue
            sub = tuple(c - (1 if k == i else 0) for k, c in enumerate(content))
            if sum(sub) == 0:
                continue
            sub_rows, _ = self.ideal_reduction(sub)
            for r in sub_rows:
                poly = fl.coords_to_poly(r, sub)
                rows.append(fl.to_lyndon_coords(fl.ad_letter(i, poly), content))
        for poly in self._gens.get(content, []):
            rows.append(fl.to_lyndon_coords(poly, content))
        if rows:
            from .linalg import Mat

            red, pivots = Mat(rows, nc=len(words)).rref()
            result = ([list(r) for r in red.rows], list(pivots))
        else:
            result = ([], [])
        self._ideal[content] = result
        return result

    def surviving_words(self, content):
        words = fl.lyndon_words(content)
        _, pivots = self.ideal_reduction(content)
        piv = set(pivots)
        return tuple(w for k, w in enumerate(words) if k not in piv)

    def project(self, poly, content):
        """Coordinates of `poly` mod the ideal, over the surviving basis."""
        words = fl.lyndon_words(content)
        coords = fl.to_lyndon_coords(poly, content)
        rows, pivots = self.ideal_reduction(content)
        for row, p in zip(rows, pivots):
            c = coords[p]
            if c:
                coords = [a - c * b for a, b in zip(coords, row)]
        piv = set(pivots)
        return [coords[k] for k in range(len(words)) if k not in piv]


def serre_ideal_basis(datum: CartanDatum, content):
    """Row-reduced basis of the Serre ideal's graded piece, as Lyndon
    coordinate vectors at `content`."""
    ctx = SerreContext(datum)
    rows, _ = ctx.ideal_reduction(tuple(content))
    return rows


class GradedLie:
    """Root-space bases and structure-constant tables up to height H."""

    def __init__(self, datum: CartanDatum, height: int):
        self.datum = datum
        self.height = height
        self.mdegs = []          # contents with positive multiplicity, in order
        self.words = {}          # content -> tuple of basis words
        self.ids = []            # global id -> (content, word)
        self._id_at = {}         # (content, local index) -> id
        self._ids_at = {}        # content -> tuple of ids
        self.bracket_tab = {}    # (id1,id2) id1<id2 -> dict id -> Q
        self.e_tab = {}          # (i, id) -> ("h", coroot tuple) | dict id -> Q
        self.context: SerreContext | None = None

    # -- bookkeeping -------------------------------------------------------

    def _register(self, content, basis_words):
        if not basis_words:
            return
        self.mdegs.append(content)
        self.words[content] = tuple(basis_words)
        ids = []
        for a, w in enumerate(basis_words):
            gid = len(self.ids)
            self.ids.append((content, w))
            self._id_at[(content, a)] = gid
            ids.append(gid)
        self._ids_at[content] = tuple(ids)

    def mult(self, content) -> int:
        return len(self.words.get(tuple(content), ()))

    def ids_at(self, content):
        return self._ids_at.get(tuple(content), ())

    def mdeg_of(self, gid):
        return self.ids[gid][0]

    def word_of(self, gid):
        return self.ids[gid][1]

    def tree_of(self, gid):
        return fl.standard_bracketing(self.ids[gid][1])

    def tau_sign(self, gid) -> int:
        return -1 if (sum(self.ids[gid][0]) - 1) % 2 else 1

    def ht(self, gid) -> int:
        return sum(self.ids[gid][0])

    def simple_id(self, i) -> int:
        content = tuple(1 if k == i else 0 for k in range(self.datum.n))
        ids = self.ids_at(content)
        if not ids:
            raise TruncationOverflow("height cutoff below 1")
        return ids[0]

    def root_mdegs(self):
        return list(self.mdegs)

    def multiplicity_table(self):
        return {m: len(self.words[m]) for m in self.mdegs}

    # -- structure constants -----------------------------------------------

    def bracket_lower(self, id1: int, id2: int):
        """[F_id1, F_id2] as a sparse dict over basis ids."""
        if id1 == id2:
            return {}
        ht = self.ht(id1) + self.ht(id2)
        if ht > self.height:
            raise TruncationOverflow(f"bracket result at height {ht} exceeds cutoff {self.height}")
        if id1 < id2:
            return self.bracket_tab.get((id1, id2), {})
        return {k: -v for k, v in self.bracket_tab.get((id2, id1), {}).items()}

    def e_bracket(self, i: int, gid: int):
        """[e_i, F_gid]: a coroot combination when F_gid = f_i, otherwise a
        sparse dict over basis ids at the lowered multidegree."""
        return self.e_tab.get((i, gid), {})

    # -- parabolic filters and PBW monomials ---------------------------------

    def all_ids(self):
        return tuple(range(len(self.ids)))

    def u_minus_ids(self, xi: ParabolicType):
        return tuple(g for g in range(len(self.ids)) if not xi.supports(self.ids[g][0]))

    def levi_ids(self, xi: ParabolicType):
        return tuple(g for g in range(len(self.ids)) if xi.supports(self.ids[g][0]))

    def pbw_monomials(self, content, allowed):
        """Non-decreasing tuples of allowed ids with multidegrees summing to
        `content`, in lexicographic order."""
        content = tuple(content)
        n = len(content)
        if any(c < 0 for c in content):
            return []
        out = []
        allowed = tuple(allowed)

        def rec(pos, remaining, acc):
            if not any(remaining):
                out.append(tuple(acc))
                return
            for k in range(pos, len(allowed)):
                m = self.ids[allowed[k]][0]
                if all(r >= x for r, x in zip(remaining, m)):
                    acc.append(allowed[k])
                    rec(k, tuple(r - x for r, x in zip(remaining, m)), acc)
                    acc.pop()

        rec(0, content, [])
        return out

    def monoid_mdegs(self, allowed, max_height):
        """All multidegrees expressible from the allowed ids' multidegrees,
        with height <= max_height, including 0, in height-then-lex order."""
        gens = sorted(set(self.ids[g][0] for g in allowed), key=offset_key)
        reach = {(0,) * self.datum.n}
        frontier = list(reach)
        while frontier:
            nxt = []
            for v in frontier:
                for g in gens:
                    w = tuple(a + b for a, b in zip(v, g))
                    if sum(w) <= max_height and w not in reach:
                        reach.add(w)
                        nxt.append(w)
            frontier = nxt
        return sorted(reach, key=offset_key)


def build_graded_lie(datum: CartanDatum, height: int, budget: int = 2_000_000) -> GradedLie:
    """Construct root-space bases and full bracket tables up to `height`."""
    if height < 1:
        raise ValueError("height must be >= 1")
    ctx = SerreContext(datum)
    g = GradedLie(datum, height)
    g.context = ctx
    spent = 0
    for content in enumerate_root_candidates(datum.n, height):
        spent += _word_count(content)
        if spent > budget:
            raise BudgetExceeded(f"candidate words {spent} exceed budget {budget}")
        g._register(content, ctx.surviving_words(content))

    # lower-lower bracket table
    for i1, (c1, w1) in enumerate(g.ids):
        for i2 in range(i1 + 1, len(g.ids)):
            c2, w2 = g.ids[i2]
            target = tuple(a + b for a, b in zip(c1, c2))
            if sum(target) > height:
                continue
            poly = fl.poly_bracket(fl.expand_tree(fl.standard_bracketing(w1)),
                                   fl.expand_tree(fl.standard_bracketing(w2)))
            coords = ctx.project(poly, target)
            entry = {g._id_at[(target, a)]: v for a, v in enumerate(coords) if v}
            if entry:
                g.bracket_tab[(i1, i2)] = entry

    # raising table
    n = datum.n
    for gid, (content, w) in enumerate(g.ids):
        tree = fl.standard_bracketing(w)
        for i in range(n):
            if sum(content) == 1:
                j = content.index(1)
                if i == j:
                    g.e_tab[(i, gid)] = ("h", tuple(Q(int(k == i)) for k in range(n)))
                continue
            if content[i] == 0:
                continue
            poly = _ad_e_tree(datum, i, tree)[0]
            target = tuple(c - (1 if k == i else 0) for k, c in enumerate(content))
            coords = ctx.project(poly, target)
            entry = {g._id_at[(target, a)]: v for a, v in enumerate(coords) if v}
            if entry:
                g.e_tab[(i, gid)] = entry
    return g


def _ad_e_tree(datum: CartanDatum, i: int, tree):
    """[e_i, tree] split into (polynomial part at content - e_i, coefficient
    of alpha_i^vee).  The coroot part is nonzero only for the leaf f_i."""
    a = datum.a
    n = datum.n
    if isinstance(tree, int):
        return {}, Q(1) if tree == i else Q(0)
    x, y = tree
    cx = fl.tree_content(x, n)
    cy = fl.tree_content(y, n)
    out = {}
    px, hx = _ad_e_tree(datum, i, x)
    if px:
        out = fl.poly_add(out, fl.poly_bracket(px, fl.expand_tree(y)))
    if hx:
        scal = -sum(cy[j] * a[i][j] for j in range(n))
        out = fl.poly_add(out, fl.expand_tree(y), hx * scal)
    py, hy = _ad_e_tree(datum, i, y)
    if py:
        out = fl.poly_add(out, fl.poly_bracket(fl.expand_tree(x), py))
    if hy:
        scal = sum(cx[j] * a[i][j] for j in range(n))
        out = fl.poly_add(out, fl.expand_tree(x), hy * scal)
    return out, Q(0)


# --- serialization ---------------------------------------------------------

def dump_tables(g: GradedLie) -> dict:
    basis = [{"mdeg": list(m), "words": [list(w) for w in g.words[m]]} for m in g.mdegs]
    brackets = [
        [i1, i2, sorted([gid, q_to_str(v)] for gid, v in entry.items())]
        for (i1, i2), entry in sorted(g.bracket_tab.items())
    ]
    raising = []
    for (i, gid), entry in sorted(g.e_tab.items()):
        if isinstance(entry, tuple) and entry[0] == "h":
            raising.append([i, gid, {"h": [q_to_str(v) for v in entry[1]]}])
        else:
            raising.append([i, gid, sorted([g2, q_to_str(v)] for g2, v in entry.items())])
    return {
        "format": TABLE_FORMAT,
        "version": TABLE_VERSION,
        "cartan": [list(r) for r in g.datum.a],
        "labels": list(g.datum.labels),
        "height": g.height,
        "basis": basis,
        "brackets": brackets,
        "raising": raising,
    }


def load_tables(data, datum: CartanDatum | None = None) -> GradedLie:
    if isinstance(data, str):
        data = json.loads(data)
    if data.get("format") != TABLE_FORMAT or data.get("version") != TABLE_VERSION:
        raise ValueError("unrecognized table format")
    from .cartan import load_cartan

    loaded = load_cartan(data["cartan"], data.get("labels"))
    if datum is not None and loaded != datum:
        raise ValueError("table dump does not match the requested Cartan datum")
    g = GradedLie(loaded, int(data["height"]))
    for item in data["basis"]:
        g._register(tuple(item["mdeg"]), [tuple(w) for w in item["words"]])
    for i1, i2, entry in data["brackets"]:
        g.bracket_tab[(i1, i2)] = {int(gid): q_from_str(v) for gid, v in entry}
    for i, gid, entry in data["raising"]:
        if isinstance(entry, dict):
            g.e_tab[(i, gid)] = ("h", tuple(q_from_str(v) for v in entry["h"]))
        else:
            g.e_tab[(i, gid)] = {int(g2): q_from_str(v) for g2, v in entry}
    return g


def rederive_bracket(g: GradedLie, id1: int, id2: int):
    """Recompute one lower-lower table entry from scratch (used to audit
    cached tables)."""
    ctx = g.context or SerreContext(g.datum)
    c1, w1 = g.ids[id1]
    c2, w2 = g.ids[id2]
    target = tuple(a + b for a, b in zip(c1, c2))
    poly = fl.poly_bracket(fl.expand_tree(fl.standard_bracketing(w1)),
                           fl.expand_tree(fl.standard_bracketing(w2)))
    coords = ctx.project(poly, target)
    words = ctx.surviving_words(target)
    if words != g.words.get(target, ()):
        raise ValueError("basis mismatch against rederivation")
    return {g._id_at[(target, a)]: v for a, v in enumerate(coords) if v}
