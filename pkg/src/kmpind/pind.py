"""Parabolic restriction and induction functors on windowed modules.

Inductions are realized as U(u^-) (x) N with normal-ordered monomial bases;
the coinduction is realized on its finite weight part through the restricted
dual of the induction of the dual.  The canonical comparison map is computed
entirely by module operators: the (Y, m) entry of a column X (x) n is the
coefficient of 1 (x) m in tau(Y) . (X (x) n).
"""

from __future__ import annotations

from fractions import Fraction as Q

from .cartan import ParabolicType, offset_key
from .errors import TruncationOverflow
from .gla import GradedLie
from .linalg import Mat
from .wmod import (
    InductionEngine,
    ModuleMap,
    SupportCone,
    WeightModule,
    induced_module,
    quotient_module,
    restricted_dual,
    submodule_from_subspaces,
)


def induced_window(glie: GradedLie, xi: ParabolicType, inner: WeightModule, depth: int):
    """Offsets {delta + gamma} with delta in the inner window and gamma in
    the u^-_xi monoid of height <= depth."""
    gammas = glie.monoid_mdegs(glie.u_minus_ids(xi), depth)
    out = set()
    for delta in inner.window:
        for g in gammas:
            out.add(tuple(a + b for a, b in zip(delta, g)))
    return frozenset(out)


def ind_shriek(glie: GradedLie, inner: WeightModule, xi: ParabolicType, window) -> WeightModule:
    """Parabolic induction U(g) tensored over the parabolic with `inner`."""
    xi.validate(glie.datum.n)
    return induced_module(
        glie,
        glie.u_minus_ids(xi),
        xi.indices,
        inner,
        window,
        acting=tuple(range(glie.datum.n)),
    )


def window_corner(window):
    window = list(window)
    return tuple(max(o[k] for o in window) for k in range(len(window[0])))


def cover_depth(xi: ParabolicType, window, tips=None) -> int:
    """Inner-window depth needed so that every xi-supported offset reachable
    inside the window box is present."""
    corner = window_corner(window)
    if tips is None:
        tips = ((0,) * len(corner),)
    floor = tuple(min(t[k] for t in tips) for k in range(len(corner)))
    return sum(max(corner[i] - floor[i], 0) for i in xi.indices)


def canonical_blocks(ind_mod: WeightModule):
    """Per-offset square matrices of the comparison map from the induction
    to the coinduction, in the shared (monomial, inner-offset, index) basis."""
    eng: InductionEngine = ind_mod.engine
    inner = eng.inner
    blocks = {}
    for o in ind_mod.sorted_offsets():
        basis = eng.basis(o)
        idx = {key: j for j, key in enumerate(basis)}
        d = len(basis)
        c_mat = Mat.zeros(d, d)

        def emit(mono, state, col):
            delta_row = tuple(a - b for a, b in zip(o, eng.mdeg(mono)))
            if delta_row in inner.window:
                for m in range(inner.dim(delta_row)):
                    c = state.get(((), delta_row, m))
                    if c:
                        c_mat.rows[idx[(mono, delta_row, m)]][col] = c

        def visit(mono, state, col):
            emit(mono, state, col)
            last = mono[-1] if mono else None
            for t in eng.mono_ids:
                if last is not None and t < last:
                    continue
                new_mono = mono + (t,)
                rem = tuple(a - b for a, b in zip(o, eng.mdeg(new_mono)))
                if not any(
                    all(x <= y for x, y in zip(delta, rem)) for delta in inner.window
                ):
                    continue
                new_state = eng.tau_apply(t, state)
                if new_state:
                    visit(new_mono, new_state, col)

        for col, key in enumerate(basis):
            visit((), {key: Q(1)}, col)
        blocks[o] = c_mat
    return blocks


def ind_star_trunc(glie: GradedLie, inner: WeightModule, xi: ParabolicType, window) -> WeightModule:
    """Finite weight part of the parabolic coinduction, realized as the
    restricted dual of the induction of the restricted dual."""
    return restricted_dual(ind_shriek(glie, restricted_dual(inner), xi, window))


class Induction:
    """All truncated induction data for one (inner module, xi, window)."""

    def __init__(self, glie, inner, xi, window):
        self.glie = glie
        self.inner = inner
        self.xi = xi
        self.window = frozenset(tuple(o) for o in window)
        self.shriek = ind_shriek(glie, inner, xi, self.window)
        self.star = ind_star_trunc(glie, inner, xi, self.window)
        self.cmap_blocks = canonical_blocks(self.shriek)
        self.cmap = ModuleMap(self.shriek, self.star, self.cmap_blocks)
        self._image_basis = None
        self._minimal = None

    def image_bases(self):
        if self._image_basis is None:
            bases = {}
            for o in sorted(self.window, key=offset_key):
                c = self.cmap_blocks[o]
                _, pivots = c.rref()
                bases[o] = Mat.from_columns([c.col(j) for j in pivots], c.nr)
            self._image_basis = bases
        return self._image_basis

    def minimal(self):
        """(module, projection from the induction, inclusion into the
        coinduction)."""
        if self._minimal is None:
            bases = self.image_bases()
            mod, incl = submodule_from_subspaces(self.star, bases)
            proj_blocks = {}
            for o in sorted(self.window, key=offset_key):
                proj_blocks[o] = bases[o].solve(self.cmap_blocks[o])
            proj = ModuleMap(self.shriek, mod, proj_blocks)
            self._minimal = (mod, proj, incl)
        return self._minimal

    def j_minus(self):
        """(module, embedding into the induction): the kernel of the map."""
        kernels = {
            o: Mat.from_columns(self.cmap_blocks[o].nullspace(), self.cmap_blocks[o].nc)
            for o in self.window
        }
        return submodule_from_subspaces(self.shriek, kernels)

    def j_plus(self):
        """(module, projection from the coinduction): the cokernel."""
        return quotient_module(self.star, self.image_bases())

    def unit_blocks(self):
        """Blocks of inner -> induction onto the 1 (x) inner layer."""
        eng = self.shriek.engine
        blocks = {}
        for delta in self.inner.window:
            if delta not in self.window:
                continue
            basis = eng.basis(delta)
            idx = {key: j for j, key in enumerate(basis)}
            m = Mat.zeros(len(basis), self.inner.dim(delta))
            for k in range(self.inner.dim(delta)):
                m.rows[idx[((), delta, k)]][k] = Q(1)
            blocks[delta] = m
        return blocks

    def unit_map(self) -> ModuleMap:
        return ModuleMap(self.inner, self.shriek, self.unit_blocks())

    def counit_blocks(self):
        """Blocks of coinduction -> inner, evaluation on the 1-slot."""
        eng = self.shriek.engine
        blocks = {}
        for delta in self.inner.window:
            if delta not in self.window:
                continue
            basis = eng.basis(delta)
            m = Mat.zeros(self.inner.dim(delta), len(basis))
            for j, key in enumerate(basis):
                mono, d2, k = key
                if mono == () and d2 == delta:
                    m.rows[k][j] = Q(1)
            blocks[delta] = m
        return blocks

    def counit_map(self) -> ModuleMap:
        return ModuleMap(self.star, self.inner, self.counit_blocks())


def ind_minimal(glie, inner, xi, window):
    ind = Induction(glie, inner, xi, window)
    mod, proj, incl = ind.minimal()
    return mod, proj, incl


def j_minus(glie, inner, xi, window):
    return Induction(glie, inner, xi, window).j_minus()


def j_plus(glie, inner, xi, window):
    return Induction(glie, inner, xi, window).j_plus()


# --- functoriality ----------------------------------------------------------


def tensor_id_map(ind_source: WeightModule, ind_target: WeightModule, inner_map: ModuleMap) -> dict:
    """Blocks of id (x) g between two inductions over the same xi/window."""
    eng1 = ind_source.engine
    eng2 = ind_target.engine
    blocks = {}
    for o in ind_source.sorted_offsets():
        b1 = eng1.basis(o)
        b2 = eng2.basis(o)
        idx2 = {key: j for j, key in enumerate(b2)}
        m = Mat.zeros(len(b2), len(b1))
        for j, (mono, delta, k) in enumerate(b1):
            g = inner_map.block(delta)
            for r in range(g.nr):
                v = g.rows[r][k]
                if v:
                    m.rows[idx2[(mono, delta, r)]][j] = v
        blocks[o] = m
    return blocks


def induce_map_minimal(ind1: Induction, ind2: Induction, inner_map: ModuleMap):
    """The induced map between minimal inductions, as the restriction of
    id (x) g in coinduction coordinates to the image subspaces."""
    star_blocks = tensor_id_map(ind1.shriek, ind2.shriek, inner_map)
    m1, _, _ = ind1.minimal()
    m2, _, _ = ind2.minimal()
    b1 = ind1.image_bases()
    b2 = ind2.image_bases()
    blocks = {}
    for o in sorted(ind1.window & ind2.window, key=offset_key):
        blocks[o] = b2[o].solve(star_blocks[o] @ b1[o])
    return ModuleMap(m1, m2, blocks)


def induce_map_shriek(ind1: Induction, ind2: Induction, inner_map: ModuleMap) -> ModuleMap:
    return ModuleMap(ind1.shriek, ind2.shriek, tensor_id_map(ind1.shriek, ind2.shriek, inner_map))


# --- restriction functors ---------------------------------------------------


def restrict_acting(m: WeightModule, xi: ParabolicType) -> WeightModule:
    """View of a g-module as an l_xi-module (forget non-xi generator actions)."""
    e = {(i, o): mat for (i, o), mat in m.e_mats.items() if i in xi}
    f = {(i, o): mat for (i, o), mat in m.f_mats.items() if i in xi}
    view = WeightModule(m.glie, m.base, xi.indices, m.window, dict(m.dims), e, f, m.cone, m.labels)
    return view


def _check_truncation_reach(m: WeightModule, o):
    """Raise if roots beyond the height cutoff could connect offset o to the
    module's support region."""
    h = m.glie.height
    for v in m.cone.elements_below(o):
        if sum(o) - sum(v) > h and v != tuple(o):
            raise TruncationOverflow(
                f"offset {o} may interact with root spaces above the cutoff {h}")


def res_shriek(m: WeightModule, xi: ParabolicType):
    """Per-offset joint kernel of the raising part of the nilradical, as an
    l_xi-module.  Returns (module, embedding, contaminated offsets)."""
    xi.validate(m.n)
    u_ids = m.glie.u_minus_ids(xi)
    subspaces = {}
    contaminated = set()
    for o in m.sorted_offsets():
        _check_truncation_reach(m, o)
        rows = []
        for gid in u_ids:
            target, mat = m.raising_op(gid, o)
            if mat is None:
                contaminated.add(o)
                continue
            rows.extend(mat.rows)
        stacked = Mat(rows, nc=m.dim(o)) if rows else Mat.zeros(0, m.dim(o))
        subspaces[o] = Mat.from_columns(stacked.nullspace(), m.dim(o))
    view = restrict_acting(m, xi)
    sub, emb = submodule_from_subspaces(view, subspaces, strict=False)
    return sub, emb, contaminated


def res_star(m: WeightModule, xi: ParabolicType):
    """Per-offset quotient by the images of the lowering nilradical.
    Returns (module, projection, contaminated offsets)."""
    xi.validate(m.n)
    u_ids = m.glie.u_minus_ids(xi)
    spans = {}
    contaminated = set()
    for o in m.sorted_offsets():
        pieces = []
        for gid in u_ids:
            gamma = m.glie.ids[gid][0]
            source = tuple(a - b for a, b in zip(o, gamma))
            ds = m.dim_or_none(source)
            if ds is None:
                contaminated.add(o)
                continue
            if ds == 0:
                continue
            target, mat = m.lowering_op(gid, source)
            assert target == o
            if mat is None:
                contaminated.add(o)
                continue
            pieces.append(mat)
        # sources further than the cutoff below o
        for v in m.cone.elements_below(o):
            if sum(o) - sum(v) > m.glie.height and v != tuple(o):
                contaminated.add(o)
                break
        acc = Mat.zeros(m.dim(o), 0)
        for p in pieces:
            acc = acc.hstack(p)
        spans[o] = acc
    view = restrict_acting(m, xi)
    quot, proj = quotient_module(view, spans)
    return quot, proj, contaminated


def res_intermediate(m: WeightModule, xi: ParabolicType):
    """Image of the kernel functor inside the quotient functor.
    Returns (module, map-from-res_shriek, embedding-into-res_star,
    contaminated offsets)."""
    sub, emb, bad1 = res_shriek(m, xi)
    quot, proj, bad2 = res_star(m, xi)
    images = {}
    for o in m.sorted_offsets():
        comp = proj.block(o) @ emb.block(o)
        _, pivots = comp.rref()
        images[o] = Mat.from_columns([comp.col(j) for j in pivots], comp.nr)
    mod, incl = submodule_from_subspaces(quot, images, strict=False)
    through = {}
    for o in m.sorted_offsets():
        comp = proj.block(o) @ emb.block(o)
        through[o] = images[o].solve(comp)
    return mod, ModuleMap(sub, mod, through), incl, bad1 | bad2
