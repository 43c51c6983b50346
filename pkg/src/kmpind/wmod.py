"""Windowed weight modules with exact generator-action matrices.

A module stores, per offset beta in a finite window, a based Q-vector space
and sparse actions act_e[i]: V_beta -> V_{beta-e_i}, act_f[i]: V_beta ->
V_{beta+e_i}; the Cartan part acts diagonally through the base weight.  A
SupportCone over-approximates the true support so that offsets outside the
window can be classified as "surely zero" (exact) or "truncated" (unknown);
all relation and exactness claims are restricted to offsets whose operator
paths never touch the unknown region.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction as Q

from . import freelie as fl
from .cartan import CartanDatum, ParabolicType, Weight, offset_key
from .errors import NegativeMultiplicity, NotActionClosed, TruncationOverflow
from .gla import GradedLie
from .linalg import Mat


class SupportCone:
    """tips + Z_{>=0}-combinations of gens; a superset of the true support."""

    def __init__(self, tips, gens):
        self.tips = tuple(sorted(set(tuple(t) for t in tips)))
        self.gens = tuple(sorted(set(tuple(g) for g in gens if any(g))))
        if any(x < 0 for g in self.gens for x in g):
            raise ValueError("cone generators must be nonnegative")
        self._memo = {}

    def _reach(self, v):
        if v in self._memo:
            return self._memo[v]
        if all(x == 0 for x in v):
            self._memo[v] = True
            return True
        if any(x < 0 for x in v):
            self._memo[v] = False
            return False
        ok = any(
            self._reach(tuple(a - b for a, b in zip(v, g)))
            for g in self.gens
            if all(a >= b for a, b in zip(v, g))
        )
        self._memo[v] = ok
        return ok

    def contains(self, o) -> bool:
        o = tuple(o)
        return any(self._reach(tuple(a - b for a, b in zip(o, t))) for t in self.tips)

    def elements_below(self, corner):
        """All cone elements <= corner componentwise, height-then-lex sorted."""
        out = set()
        corner = tuple(corner)
        for t in self.tips:
            if not all(a <= b for a, b in zip(t, corner)):
                continue
            frontier = {t}
            while frontier:
                out |= frontier
                nxt = set()
                for v in frontier:
                    for g in self.gens:
                        w = tuple(a + b for a, b in zip(v, g))
                        if all(a <= b for a, b in zip(w, corner)) and w not in out:
                            nxt.add(w)
                frontier = nxt
        return sorted(out, key=offset_key)


def unit_vec(n, i):
    return tuple(1 if k == i else 0 for k in range(n))


def simplex_window(n, depth, support=None):
    """Offsets beta >= 0 with ht(beta) <= depth, optionally supported on a
    given index set, including 0."""
    idx = tuple(range(n)) if support is None else tuple(support)
    out = []

    def rec(prefix_map, pos, left):
        if pos == len(idx):
            v = [0] * n
            for i, c in prefix_map:
                v[i] = c
            out.append(tuple(v))
            return
        for c in range(left + 1):
            rec(prefix_map + ((idx[pos], c),), pos + 1, left - c)

    rec((), 0, depth)
    return frozenset(out)


class WeightModule:
    def __init__(self, glie, base, acting, window, dims, e_mats, f_mats, cone, labels=None,
                 unknown_ops=()):
        self.glie: GradedLie = glie
        self.base: Weight = base
        self.acting = tuple(acting)
        self.window = frozenset(tuple(o) for o in window)
        self.dims = {tuple(o): int(d) for o, d in dims.items()}
        self.e_mats = e_mats
        self.f_mats = f_mats
        self.cone: SupportCone = cone
        self.labels = labels
        self.unknown_ops = set(unknown_ops)  # (kind, i, offset) slots with no exact matrix
        self._treeop_memo = {}

    @property
    def n(self):
        return self.glie.datum.n

    def dim(self, o) -> int:
        return self.dims.get(tuple(o), 0)

    def dim_or_none(self, o):
        o = tuple(o)
        if o in self.window:
            return self.dims.get(o, 0)
        if not self.cone.contains(o):
            return 0
        return None

    def weight_at(self, o) -> Weight:
        return self.base.shifted(o)

    def character(self):
        return {o: d for o, d in sorted(self.dims.items(), key=lambda kv: offset_key(kv[0])) if d}

    def sorted_offsets(self):
        return sorted(self.window, key=offset_key)

    def op(self, kind, i, o):
        """(target offset, matrix or None).  None means the target lies in
        the unknown truncated region."""
        o = tuple(o)
        step = -1 if kind == "e" else 1
        target = tuple(c + step * (1 if k == i else 0) for k, c in enumerate(o))
        store = self.e_mats if kind == "e" else self.f_mats
        m = store.get((i, o))
        if m is not None:
            return target, m
        ds = self.dim_or_none(o)
        dt = self.dim_or_none(target)
        if ds is None or dt is None:
            return target, None
        return target, Mat.zeros(dt, ds)

    def tree_op(self, tree, kind, o):
        """Operator of a bracketing tree (nested commutator of generator
        actions) at offset o.  Returns (target, Mat or None)."""
        o = tuple(o)
        key = (tree, kind, o)
        if key in self._treeop_memo:
            return self._treeop_memo[key]
        if isinstance(tree, int):
            res = self.op(kind, tree, o)
        else:
            x, y = tree
            ty, ay = self.tree_op(y, kind, o)
            txy, axy = self.tree_op(x, kind, ty)
            tx, ax = self.tree_op(x, kind, o)
            tyx, ayx = self.tree_op(y, kind, tx)
            assert txy == tyx
            if ay is None or axy is None or ax is None or ayx is None:
                res = (txy, None)
            else:
                res = (txy, axy @ ay - ayx @ ax)
        self._treeop_memo[key] = res
        return res

    def lowering_op(self, gid, o):
        """Action of the basis root vector F_gid."""
        return self.tree_op(self.glie.tree_of(gid), "f", o)

    def raising_op(self, gid, o):
        """Action of E_gid = tau(F_gid)."""
        t, m = self.tree_op(self.glie.tree_of(gid), "e", o)
        if m is None:
            return t, None
        s = self.glie.tau_sign(gid)
        return t, (m if s == 1 else m.scale(-1))

    def path_safe(self, o, deltas):
        """True iff walking the deltas from o never leaves window + surely-zero."""
        cur = tuple(o)
        for d in deltas:
            cur = tuple(a + b for a, b in zip(cur, d))
            if cur in self.window:
                continue
            if not self.cone.contains(cur):
                return True  # path died in an exactly-zero space
            return False
        return True

    def relation_safe_offsets(self, paths):
        return [o for o in self.sorted_offsets() if all(self.path_safe(o, p) for p in paths)]


def restricted_dual(m: WeightModule) -> WeightModule:
    """Same character; act_x becomes the transpose of act_{tau(x)}."""
    n = m.n
    e_mats, f_mats = {}, {}
    for (i, o), mat in m.f_mats.items():
        target = tuple(c + (1 if k == i else 0) for k, c in enumerate(o))
        e_mats[(i, target)] = mat.T
    for (i, o), mat in m.e_mats.items():
        target = tuple(c - (1 if k == i else 0) for k, c in enumerate(o))
        f_mats[(i, target)] = mat.T
    return WeightModule(m.glie, m.base, m.acting, m.window, dict(m.dims), e_mats, f_mats, m.cone, m.labels)


def direct_sum(a: WeightModule, b: WeightModule) -> WeightModule:
    assert a.base.same_base(b.base) and a.acting == b.acting
    window = a.window | b.window
    dims = {o: a.dim(o) + b.dim(o) for o in window}

    def block(kind, i, o):
        pieces = []
        for m in (a, b):
            t, mat = m.op(kind, i, o)
            if mat is None:
                return None
            pieces.append(mat)
        top = pieces[0].hstack(Mat.zeros(pieces[0].nr, pieces[1].nc))
        bot = Mat.zeros(pieces[1].nr, pieces[0].nc).hstack(pieces[1])
        return top.vstack(bot)

    e_mats, f_mats = {}, {}
    for o in window:
        for i in a.acting:
            for kind, store in (("e", e_mats), ("f", f_mats)):
                step = -1 if kind == "e" else 1
                target = tuple(c + step * (1 if k == i else 0) for k, c in enumerate(o))
                if target in window:
                    mb = block(kind, i, o)
                    if mb is not None:
                        store[(i, o)] = mb
    cone = SupportCone(a.cone.tips + b.cone.tips, a.cone.gens + b.cone.gens)
    return WeightModule(a.glie, a.base, a.acting, window, dims, e_mats, f_mats, cone)


# --- the induction / normal-ordering engine --------------------------------


class InductionEngine:
    """Builds U(monomial part) (x) N with exact generator actions.

    mono_ids: basis root vectors allowed in the ordered monomial part (must
    be closed under brackets).  through: generator indices whose actions pass
    to the inner module N.  States are dicts keyed (mono, delta, k) where
    mono is a non-decreasing id tuple, delta an offset of N and k a basis
    index of N at delta.
    """

    def __init__(self, glie: GradedLie, mono_ids, through, inner: WeightModule):
        self.glie = glie
        self.mono_ids = tuple(sorted(mono_ids))
        self.mono_set = frozenset(self.mono_ids)
        self.through = tuple(through)
        self.inner = inner
        self.base = inner.base
        self.n = glie.datum.n
        self._insert_memo = {}
        self._lower_memo = {}
        self._e_memo = {}
        self._tree_e_memo = {}
        self._simple = {i: glie.simple_id(i) for i in range(self.n)}

    def mdeg(self, mono):
        v = [0] * self.n
        for gid in mono:
            for k, c in enumerate(self.glie.ids[gid][0]):
                v[k] += c
        return tuple(v)

    def key_offset(self, key):
        mono, delta, _ = key
        return tuple(a + b for a, b in zip(self.mdeg(mono), delta))

    # -- PBW straightening in the monomial part --

    def insert(self, gid, mono):
        """Left-multiply F_gid into a sorted monomial; dict mono -> coeff."""
        key = (gid, mono)
        if key in self._insert_memo:
            return self._insert_memo[key]
        if not mono or gid <= mono[0]:
            out = {(gid,) + mono: Q(1)}
        else:
            head, tail = mono[0], mono[1:]
            out = {}
            for m2, c2 in self.insert(gid, tail).items():
                for m3, c3 in self.insert(head, m2).items():
                    out[m3] = out.get(m3, Q(0)) + c2 * c3
            for id3, cb in self.glie.bracket_lower(gid, head).items():
                for m4, c4 in self.insert(id3, tail).items():
                    out[m4] = out.get(m4, Q(0)) + cb * c4
            out = {m: c for m, c in out.items() if c}
        self._insert_memo[key] = out
        return out

    def _prepend(self, prefix, states):
        """Left-multiply a word of monomial ids (left-to-right) onto states
        keyed (mono, delta, k)."""
        cur = states
        for p in reversed(prefix):
            nxt = {}
            for (mono, delta, k), c in cur.items():
                for m2, c2 in self.insert(p, mono).items():
                    kk = (m2, delta, k)
                    nxt[kk] = nxt.get(kk, Q(0)) + c * c2
            cur = nxt
        return cur

    def _inner_op(self, kind, i, delta, k):
        t, mat = self.inner.op(kind, i, delta)
        if mat is None:
            raise TruncationOverflow("inner-module window too small for the requested action")
        return {(t, r): v for r, v in enumerate(mat.col(k)) if v}

    def _inner_tree_f(self, tree, delta, k):
        """Action of a levi lowering bracket word on the inner module."""
        t, mat = self.inner.tree_op(tree, "f", delta)
        if mat is None:
            raise TruncationOverflow("inner-module window too small for a levi action")
        return {(t, r): v for r, v in enumerate(mat.col(k)) if v}

    def apply_lower(self, bid, key):
        """Left multiplication by the lower root vector F_bid."""
        memo_key = (bid, key)
        if memo_key in self._lower_memo:
            return self._lower_memo[memo_key]
        mono, delta, k = key
        out = {}
        if bid in self.mono_set:
            for m2, c in self.insert(bid, mono).items():
                kk = (m2, delta, k)
                out[kk] = out.get(kk, Q(0)) + c
        else:
            # levi vector: commute past the monomial, then act on N
            if not mono:
                for (t, r), v in self._inner_tree_f(self.glie.tree_of(bid), delta, k).items():
                    kk = ((), t, r)
                    out[kk] = out.get(kk, Q(0)) + v
            else:
                head, tail = mono[0], mono[1:]
                for key2, c2 in self.apply_lower(bid, (tail, delta, k)).items():
                    for key3, c3 in self._prepend((head,), {key2: Q(1)}).items():
                        out[key3] = out.get(key3, Q(0)) + c2 * c3
                for id2, cb in self.glie.bracket_lower(bid, head).items():
                    for key2, c2 in self.apply_lower(id2, (tail, delta, k)).items():
                        out[key2] = out.get(key2, Q(0)) + cb * c2
        out = {kk: c for kk, c in out.items() if c}
        self._lower_memo[memo_key] = out
        return out

    def apply_f(self, i, key):
        return self.apply_lower(self._simple[i], key)

    def apply_e(self, i, key):
        memo_key = (i, key)
        if memo_key in self._e_memo:
            return self._e_memo[memo_key]
        mono, delta, k = key
        out = {}
        if i in self.through:
            for (t, r), v in self._inner_op("e", i, delta, k).items():
                kk = (mono, t, r)
                out[kk] = out.get(kk, Q(0)) + v
        for pos in range(len(mono)):
            mid = mono[pos]
            br = self.glie.e_bracket(i, mid)
            if not br:
                continue
            prefix, suffix = mono[:pos], mono[pos + 1 :]
            if isinstance(br, tuple) and br[0] == "h":
                woff = tuple(a + b for a, b in zip(self.mdeg(suffix), delta))
                wt = self.base.shifted(woff)
                scal = sum((c * wt.coroot_eval(j) for j, c in enumerate(br[1]) if c), Q(0))
                if scal:
                    kk = (prefix + suffix, delta, k)
                    out[kk] = out.get(kk, Q(0)) + scal
            else:
                for id2, c in br.items():
                    if id2 in self.mono_set:
                        mid_states = {(suffix, delta, k): Q(1)}
                        moved = self._prepend((id2,), mid_states)
                    else:
                        moved = self.apply_lower(id2, (suffix, delta, k))
                    for key2, c2 in self._prepend(prefix, moved).items():
                        out[key2] = out.get(key2, Q(0)) + c * c2
        out = {kk: c for kk, c in out.items() if c}
        self._e_memo[memo_key] = out
        return out

    def apply_gen(self, kind, i, state):
        fn = self.apply_e if kind == "e" else self.apply_f
        out = {}
        for key, c in state.items():
            for kk, v in fn(i, key).items():
                nv = out.get(kk, Q(0)) + c * v
                if nv:
                    out[kk] = nv
                else:
                    out.pop(kk, None)
        return out

    def tree_e_apply(self, tree, key):
        """Nested commutator of raising generators, applied to a basis state."""
        memo_key = (tree, key)
        if memo_key in self._tree_e_memo:
            return self._tree_e_memo[memo_key]
        if isinstance(tree, int):
            out = self.apply_e(tree, key)
        else:
            x, y = tree
            out = {}
            for k2, c2 in self.tree_e_state(y, {key: Q(1)}).items():
                for k3, c3 in self.tree_e_apply(x, k2).items():
                    nv = out.get(k3, Q(0)) + c2 * c3
                    out[k3] = nv
            for k2, c2 in self.tree_e_state(x, {key: Q(1)}).items():
                for k3, c3 in self.tree_e_apply(y, k2).items():
                    nv = out.get(k3, Q(0)) - c2 * c3
                    out[k3] = nv
            out = {kk: c for kk, c in out.items() if c}
        self._tree_e_memo[memo_key] = out
        return out

    def tree_e_state(self, tree, state):
        out = {}
        for key, c in state.items():
            for kk, v in self.tree_e_apply(tree, key).items():
                nv = out.get(kk, Q(0)) + c * v
                if nv:
                    out[kk] = nv
                else:
                    out.pop(kk, None)
        return out

    def tau_apply(self, gid, state):
        """Apply tau(F_gid) (a signed raising bracket word) to a state."""
        out = self.tree_e_state(self.glie.tree_of(gid), state)
        if self.glie.tau_sign(gid) == -1:
            out = {k: -v for k, v in out.items()}
        return out

    # -- basis enumeration --

    def basis(self, o):
        o = tuple(o)
        items = []
        for delta in self.inner.window:
            gamma = tuple(a - b for a, b in zip(o, delta))
            if any(c < 0 for c in gamma):
                continue
            for mono in self.glie.pbw_monomials(gamma, self.mono_ids):
                for k in range(self.inner.dim(delta)):
                    items.append((mono, delta, k))
        items.sort(key=lambda it: (offset_key(self.mdeg(it[0])), it[0], it[2]))
        return items


def induced_module(glie, mono_ids, through, inner, window, acting, check_cover=True):
    """Assemble a WeightModule for U(monomial part) (x) inner on `window`."""
    eng = InductionEngine(glie, mono_ids, through, inner)
    window = frozenset(tuple(o) for o in window)
    cone = SupportCone(inner.cone.tips, inner.cone.gens + tuple(glie.ids[g][0] for g in eng.mono_ids))
    if check_cover and window:
        corner = tuple(max(o[k] for o in window) for k in range(glie.datum.n))
        for delta in inner.cone.elements_below(corner):
            if delta not in inner.window:
                raise TruncationOverflow(
                    f"inner window is missing offset {delta}; enlarge it to cover the window box"
                )
    bases = {o: eng.basis(o) for o in window}
    index = {o: {key: j for j, key in enumerate(bases[o])} for o in window}
    dims = {o: len(bases[o]) for o in window}
    e_mats, f_mats = {}, {}
    for o in sorted(window, key=offset_key):
        for i in acting:
            for kind, store, step in (("e", e_mats, -1), ("f", f_mats, 1)):
                target = tuple(c + step * (1 if k == i else 0) for k, c in enumerate(o))
                if target not in window:
                    continue
                cols = []
                for key in bases[o]:
                    vec = [Q(0)] * dims[target]
                    res = eng.apply_e(i, key) if kind == "e" else eng.apply_f(i, key)
                    for kk, v in res.items():
                        vec[index[target][kk]] = v
                    cols.append(vec)
                store[(i, o)] = Mat.from_columns(cols, dims[target])
    mod = WeightModule(glie, inner.base, acting, window, dims, e_mats, f_mats, cone,
                       labels={o: tuple(bases[o]) for o in window})
    mod.engine = eng
    return mod


def line_module(glie, lam: Weight) -> WeightModule:
    """The one-dimensional module spanned by a vector of weight lam."""
    zero = (0,) * glie.datum.n
    cone = SupportCone([zero], [])
    return WeightModule(glie, lam, (), frozenset([zero]), {zero: 1}, {}, {}, cone)


def verma(glie: GradedLie, lam: Weight, depth: int, xi: ParabolicType | None = None) -> WeightModule:
    """Truncated Verma module of highest weight lam: the full one when xi is
    None, the levi one (only xi-generators act) otherwise."""
    n = glie.datum.n
    if xi is None:
        if depth > glie.height:
            raise TruncationOverflow("verma depth exceeds the algebra height cutoff")
        window = simplex_window(n, depth)
        return induced_module(glie, glie.all_ids(), (), line_module(glie, lam), window,
                              acting=tuple(range(n)))
    xi.validate(n)
    window = simplex_window(n, depth, support=xi.indices)
    return induced_module(glie, glie.levi_ids(xi), (), line_module(glie, lam), window,
                          acting=xi.indices)


def contravariant_gram(module: WeightModule, beta, allowed_ids=None) -> Mat:
    """Gram matrix of the pairing <x, y> = (top coefficient of tau(X) y) on
    the weight space at offset beta of a highest-weight module built with
    PBW-monomial labels."""
    glie = module.glie
    beta = tuple(beta)
    if allowed_ids is None:
        allowed_ids = glie.levi_ids(ParabolicType(module.acting)) \
            if len(module.acting) < glie.datum.n else glie.all_ids()
    monos = glie.pbw_monomials(beta, allowed_ids)
    d = module.dim(beta)
    assert len(monos) == d, "module basis does not match PBW monomials"
    zero = (0,) * glie.datum.n
    rows = []
    for mono in monos:
        # operator tau(F_{j1} ... F_{jk}) = tau(F_{jk}) ... tau(F_{j1})
        cur_off = beta
        mat = Mat.identity(d)
        ok = True
        for gid in mono:
            cur_off, step = module.raising_op(gid, cur_off)
            if step is None:
                raise TruncationOverflow("gram computation touched a truncated offset")
            mat = step @ mat
        assert cur_off == zero
        rows.append([mat.rows[0][j] for j in range(d)] if mat.nr else [Q(0)] * d)
    return Mat(rows, nc=d)


def gram_kernels(module: WeightModule, allowed_ids=None):
    """Per-offset kernels of the contravariant form: the radical subspaces."""
    out = {}
    for o in module.sorted_offsets():
        g = contravariant_gram(module, o, allowed_ids)
        out[o] = Mat.from_columns(g.nullspace(), g.nc)
    return out


@dataclass
class ModuleMap:
    source: WeightModule
    target: WeightModule
    blocks: dict

    def block(self, o):
        o = tuple(o)
        if o in self.blocks:
            return self.blocks[o]
        return Mat.zeros(self.target.dim(o), self.source.dim(o))

    def rank(self, o):
        return self.block(o).rank()

    def injective_on(self, o):
        return self.rank(o) == self.source.dim(o)

    def surjective_on(self, o):
        return self.rank(o) == self.target.dim(o)

    def compose(self, other: "ModuleMap") -> "ModuleMap":
        """self after other."""
        assert other.target is self.source
        blocks = {}
        offsets = set(self.blocks) | set(other.blocks)
        for o in offsets:
            blocks[o] = self.block(o) @ other.block(o)
        return ModuleMap(other.source, self.target, blocks)

    def equivariance_failures(self, offsets=None):
        """Offsets/generators where equivariance is checkable and fails."""
        bad = []
        offsets = list(offsets) if offsets is not None else sorted(
            set(self.source.window) & set(self.target.window), key=offset_key)
        for o in offsets:
            for i in self.source.acting:
                if i not in self.target.acting:
                    continue
                for kind in ("e", "f"):
                    t1, ms = self.source.op(kind, i, o)
                    t2, mt = self.target.op(kind, i, o)
                    assert t1 == t2
                    if ms is None or mt is None:
                        continue
                    if t1 not in self.blocks and t1 not in self.source.window:
                        continue
                    lhs = self.block(t1) @ ms
                    rhs = mt @ self.block(o)
                    if lhs != rhs:
                        bad.append((o, kind, i))
        return bad


def identity_map(m: WeightModule) -> ModuleMap:
    return ModuleMap(m, m, {o: Mat.identity(m.dim(o)) for o in m.window})


def submodule_from_subspaces(m: WeightModule, subspaces, strict=True):
    """Wrap per-offset column spans as a WeightModule with induced actions.
    Returns (sub, embedding).  Raises NotActionClosed when an in-window
    action leaves the span (with strict=True)."""
    subs = {}
    for o in m.sorted_offsets():
        k = subspaces.get(o)
        if k is None:
            k = Mat.zeros(m.dim(o), 0)
        subs[o] = k
    dims = {o: subs[o].nc for o in m.window}
    e_mats, f_mats = {}, {}
    for o in m.sorted_offsets():
        for i in m.acting:
            for kind, store in (("e", e_mats), ("f", f_mats)):
                target, mat = m.op(kind, i, o)
                if mat is None or target not in m.window:
                    continue
                image = mat @ subs[o]
                try:
                    y = subs[target].solve(image)
                except ValueError:
                    if strict:
                        raise NotActionClosed(f"action {kind}_{i} leaves the span at offset {o}")
                    continue
                store[(i, o)] = y
    sub = WeightModule(m.glie, m.base, m.acting, m.window, dims, e_mats, f_mats, m.cone)
    emb = ModuleMap(sub, m, {o: subs[o] for o in m.window})
    return sub, emb


def quotient_module(m: WeightModule, subspaces):
    """Quotient by per-offset spans.  Returns (quotient, projection)."""
    proj = {}
    lift = {}
    dims = {}
    for o in m.sorted_offsets():
        k = subspaces.get(o, Mat.zeros(m.dim(o), 0))
        red, pivots = k.T.rref()
        pivset = set(pivots)
        comp = [j for j in range(m.dim(o)) if j not in pivset]
        dims[o] = len(comp)
        # projection: eliminate pivot coordinates with the rref rows, then
        # read off the complement coordinates
        p = Mat.zeros(len(comp), m.dim(o))
        for j in range(m.dim(o)):
            vec = [Q(0)] * m.dim(o)
            vec[j] = Q(1)
            for row, piv in zip(red.rows, pivots):
                c = vec[piv]
                if c:
                    vec = [a - c * b for a, b in zip(vec, row)]
            for r, cj in enumerate(comp):
                p.rows[r][j] = vec[cj]
        proj[o] = p
        lf = Mat.zeros(m.dim(o), len(comp))
        for r, cj in enumerate(comp):
            lf.rows[cj][r] = Q(1)
        lift[o] = lf
    e_mats, f_mats = {}, {}
    for o in m.sorted_offsets():
        for i in m.acting:
            for kind, store in (("e", e_mats), ("f", f_mats)):
                target, mat = m.op(kind, i, o)
                if mat is None or target not in m.window:
                    continue
                k = subspaces.get(o, Mat.zeros(m.dim(o), 0))
                if k.nc and not (proj[target] @ (mat @ k)).is_zero():
                    raise NotActionClosed(f"span is not action-closed under {kind}_{i} at {o}")
                store[(i, o)] = proj[target] @ (mat @ lift[o])
    q = WeightModule(m.glie, m.base, m.acting, m.window, dims, e_mats, f_mats, m.cone)
    return q, ModuleMap(m, q, proj)


def singular_vectors(m: WeightModule, o) -> Mat:
    """Basis of the joint kernel of all acting raising generators at offset o."""
    o = tuple(o)
    rows = []
    for i in m.acting:
        target, mat = m.op("e", i, o)
        if mat is None:
            raise TruncationOverflow(f"raising target {target} is truncated; enlarge the window")
        rows.extend(mat.rows)
    stacked = Mat(rows, nc=m.dim(o)) if rows else Mat.zeros(0, m.dim(o))
    return Mat.from_columns(stacked.nullspace(), m.dim(o))


def submodule_generated(m: WeightModule, vectors):
    """Smallest window-relative action-closed graded subspace containing the
    given (offset, coordinate-vector) pairs.  Returns per-offset span Mats."""
    spans = {o: [] for o in m.window}
    for o, v in vectors:
        spans[tuple(o)].append([Q(x) for x in v])

    def reduce(o):
        if spans[o]:
            spans[o] = [list(r) for r in Mat(spans[o], nc=m.dim(o)).rref()[0].rows]

    for o in m.window:
        reduce(o)
    changed = True
    while changed:
        changed = False
        for o in m.sorted_offsets():
            if not spans[o]:
                continue
            for i in m.acting:
                for kind in ("e", "f"):
                    target, mat = m.op(kind, i, o)
                    if mat is None or target not in m.window:
                        continue
                    before = len(spans[target])
                    for v in spans[o]:
                        spans[target].append(mat @ list(v))
                    reduce(target)
                    if len(spans[target]) > before:
                        changed = True
    out = {}
    for o in m.window:
        if spans[o]:
            out[o] = Mat(spans[o], nc=m.dim(o)).T
        else:
            out[o] = Mat.zeros(m.dim(o), 0)
    return out


_SIMPLE_CHAR_MEMO: dict = {}


def simple_character(glie: GradedLie, lam: Weight, offsets, xi: ParabolicType | None = None):
    """dim L(lam) at each relative offset, via contravariant-form ranks."""
    acting_key = tuple(xi.indices) if xi is not None else None
    coroots = tuple(lam.coroot_eval(i) for i in range(glie.datum.n))
    out = {}
    need = []
    for o in offsets:
        key = (glie.datum, glie.height, acting_key, coroots, tuple(o))
        if key in _SIMPLE_CHAR_MEMO:
            out[tuple(o)] = _SIMPLE_CHAR_MEMO[key]
        else:
            need.append(tuple(o))
    if need:
        support = xi.indices if xi is not None else None
        for o in need:
            if any(c < 0 for c in o) or (support is not None and not xi.supports(o)):
                val = 0
            else:
                depth = sum(o)
                mod = verma(glie, lam, depth, xi)
                val = contravariant_gram(mod, o).rank()
            key = (glie.datum, glie.height, acting_key, coroots, o)
            _SIMPLE_CHAR_MEMO[key] = val
            out[o] = val
    return out


def composition_factors(m: WeightModule, xi: ParabolicType | None = None):
    """Multiset of (highest-weight offset, multiplicity) solving the
    unitriangular character system against simple characters.  Exact for
    factors whose highest weights lie in the window."""
    residual = {o: m.dim(o) for o in m.window}
    factors = []
    for o in m.sorted_offsets():
        c = residual.get(o, 0)
        if c < 0:
            raise NegativeMultiplicity(
                f"negative residual {c} at offset {o}: window too small or module "
                "not of highest-weight type")
        if c == 0:
            continue
        mu = m.base.shifted(o)
        rel = [tuple(a - b for a, b in zip(p, o)) for p in m.sorted_offsets()
               if all(x >= y for x, y in zip(p, o))]
        char = simple_character(m.glie, mu, rel, xi)
        for r, d in char.items():
            p = tuple(a + b for a, b in zip(r, o))
            residual[p] -= c * d
        factors.append((o, c))
    leftover = {o: v for o, v in residual.items() if v}
    if any(v < 0 for v in leftover.values()):
        raise NegativeMultiplicity(f"negative residual mass {leftover}")
    return factors, leftover
