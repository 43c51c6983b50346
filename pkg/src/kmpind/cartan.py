"""Generalized Cartan matrices, parabolic types, weights and the dot action.

Convention, used everywhere: A[i][j] = <alpha_j, alpha_i^vee>.  A weight is
stored as the coroot evaluations of a formal base point together with an
integer offset beta, representing mu = base - sum_j beta_j * alpha_j.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction as Q
from math import gcd

from .errors import BaseMismatch, NotGCM, NotSymmetrizable


@dataclass(frozen=True)
class CartanDatum:
    a: tuple[tuple[int, ...], ...]
    d: tuple[int, ...]
    labels: tuple[str, ...]

    @property
    def n(self) -> int:
        return len(self.a)

    def label_index(self, label: str) -> int:
        try:
            return self.labels.index(label)
        except ValueError:
            raise KeyError(f"unknown simple-root label {label!r}") from None


def _symmetrizer(a) -> tuple[int, ...]:
    """Smallest positive integral d with d_i a_ij = d_j a_ji, per component."""
    n = len(a)
    ratio: list[Q | None] = [None] * n
    for start in range(n):
        if ratio[start] is not None:
            continue
        ratio[start] = Q(1)
        stack = [start]
        comp = [start]
        while stack:
            i = stack.pop()
            for j in range(n):
                if i == j or a[i][j] == 0:
                    continue
                r = ratio[i] * Q(a[i][j], a[j][i])
                if ratio[j] is None:
                    ratio[j] = r
                    comp.append(j)
                    stack.append(j)
                elif ratio[j] != r:
                    raise NotSymmetrizable("inconsistent symmetrizer ratios on a cycle")
        denom_lcm = 1
        for i in comp:
            denom_lcm = denom_lcm * ratio[i].denominator // gcd(denom_lcm, ratio[i].denominator)
        vals = {i: ratio[i] * denom_lcm for i in comp}
        g = 0
        for v in vals.values():
            g = gcd(g, int(v))
        for i in comp:
            ratio[i] = vals[i] / g
    d = tuple(int(r) for r in ratio)
    for i in range(n):
        for j in range(n):
            if d[i] * a[i][j] != d[j] * a[j][i]:
                raise NotSymmetrizable("no positive symmetrizer exists")
    return d


def load_cartan(matrix, labels=None) -> CartanDatum:
    """Validate an integer matrix as a symmetrizable GCM and compute its
    minimal positive symmetrizer."""
    rows = [tuple(int(x) for x in r) for r in matrix]
    n = len(rows)
    if n == 0 or any(len(r) != n for r in rows):
        raise NotGCM("matrix must be square and nonempty")
    for i in range(n):
        if rows[i][i] != 2:
            raise NotGCM(f"diagonal entry at ({i},{i}) is {rows[i][i]}, expected 2")
        for j in range(n):
            if i == j:
                continue
            if rows[i][j] > 0:
                raise NotGCM(f"positive off-diagonal entry at ({i},{j})")
            if (rows[i][j] == 0) != (rows[j][i] == 0):
                raise NotGCM(f"asymmetric zero pattern at ({i},{j})")
    a = tuple(rows)
    d = _symmetrizer(a)
    if labels is None:
        labels = tuple(str(i + 1) for i in range(n))
    else:
        labels = tuple(str(x) for x in labels)
        if len(labels) != n or len(set(labels)) != n:
            raise NotGCM("labels must be distinct and match the rank")
    return CartanDatum(a=a, d=d, labels=labels)


@dataclass(frozen=True)
class ParabolicType:
    """A subset of simple-root indices (0-based, sorted)."""

    indices: tuple[int, ...]

    def __init__(self, indices):
        idx = tuple(sorted(set(int(i) for i in indices)))
        object.__setattr__(self, "indices", idx)

    def validate(self, n: int):
        if any(i < 0 or i >= n for i in self.indices):
            raise ValueError(f"parabolic indices {self.indices} out of range for rank {n}")

    def __contains__(self, i):
        return i in self.indices

    def complement(self, n: int) -> tuple[int, ...]:
        return tuple(i for i in range(n) if i not in self.indices)

    def supports(self, beta) -> bool:
        """True iff beta is supported on this index set."""
        return all(beta[j] == 0 for j in range(len(beta)) if j not in self.indices)


FULL = None  # sentinel: "Xi = Pi" callers may also pass ParabolicType(range(n))


@dataclass(frozen=True)
class Weight:
    datum: CartanDatum
    evals: tuple[Q, ...]
    offset: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "evals", tuple(Q(x) for x in self.evals))
        object.__setattr__(self, "offset", tuple(int(x) for x in self.offset))
        if len(self.evals) != self.datum.n or len(self.offset) != self.datum.n:
            raise ValueError("weight vector length must equal the rank")

    def same_base(self, other: "Weight") -> bool:
        return self.datum == other.datum and self.evals == other.evals

    def _require_base(self, other: "Weight"):
        if not self.same_base(other):
            raise BaseMismatch("weights do not share a base")

    def coroot_eval(self, i: int) -> Q:
        a = self.datum.a
        return self.evals[i] - sum(self.offset[j] * a[i][j] for j in range(self.datum.n))

    def shifted(self, delta) -> "Weight":
        return Weight(self.datum, self.evals, tuple(o + int(x) for o, x in zip(self.offset, delta)))

    def dot_reflect(self, i: int) -> "Weight":
        """s_i . mu = mu - <mu + rho, alpha_i^vee> alpha_i, as an offset change."""
        c = self.coroot_eval(i) + 1
        if c.denominator != 1:
            raise ValueError("dot reflection needs an integral rho-shifted pairing")
        off = list(self.offset)
        off[i] += int(c)
        return Weight(self.datum, self.evals, tuple(off))

    def dot_word(self, word) -> "Weight":
        """Apply a product of simple dot reflections, rightmost factor first."""
        w = self
        for i in reversed(tuple(word)):
            w = w.dot_reflect(i)
        return w

    def leq(self, other: "Weight") -> bool:
        """self <= other in the root order: other - self in Z_{>=0} Pi."""
        self._require_base(other)
        return all(a >= b for a, b in zip(self.offset, other.offset))

    def in_xi_coset(self, other: "Weight", xi: ParabolicType) -> bool:
        self._require_base(other)
        diff = tuple(a - b for a, b in zip(self.offset, other.offset))
        return xi.supports(diff)

    def is_integral(self) -> bool:
        return all(e.denominator == 1 for e in self.evals)


def rho(datum: CartanDatum) -> Weight:
    return Weight(datum, tuple(Q(1) for _ in range(datum.n)), (0,) * datum.n)


def weight_from_evals(datum: CartanDatum, evals) -> Weight:
    return Weight(datum, tuple(Q(x) for x in evals), (0,) * datum.n)


def coroot_eval(mu: Weight, i: int) -> Q:
    return mu.coroot_eval(i)


def dot_reflect(mu: Weight, i: int) -> Weight:
    return mu.dot_reflect(i)


def weight_leq(mu: Weight, nu: Weight) -> bool:
    return mu.leq(nu)


def in_xi_coset(mu: Weight, nu: Weight, xi: ParabolicType) -> bool:
    return mu.in_xi_coset(nu, xi)


def offset_key(o):
    """Canonical height-then-lex sort key for offsets."""
    return (sum(o), tuple(-x for x in o))


def enumerate_root_candidates(n: int, height: int):
    """All nonzero beta in Z^n_{>=0} with 1 <= ht(beta) <= height, in
    height-then-lex order."""
    if height < 1:
        raise ValueError("height must be >= 1")
    out = []

    def rec(prefix, remaining):
        pos = len(prefix)
        if pos == n - 1:
            out.append(prefix + (remaining,))
            return
        for v in range(remaining, -1, -1):
            rec(prefix + (v,), remaining - v)

    for h in range(1, height + 1):
        rec((), h)
    return out


# --- serialization -------------------------------------------------------

def q_to_str(x: Q) -> str:
    return str(Q(x))


def q_from_str(s) -> Q:
    return Q(str(s))


def weight_to_json(mu: Weight) -> dict:
    return {"evals": [q_to_str(e) for e in mu.evals], "offset": list(mu.offset)}


def weight_from_json(datum: CartanDatum, data) -> Weight:
    if isinstance(data, str):
        data = json.loads(data)
    evals = tuple(q_from_str(e) for e in data["evals"])
    offset = tuple(int(x) for x in data.get("offset", [0] * datum.n))
    return Weight(datum, evals, offset)


def gcm_to_json(datum: CartanDatum) -> dict:
    return {"cartan": [list(r) for r in datum.a], "labels": list(datum.labels)}


def gcm_from_json(data) -> CartanDatum:
    if isinstance(data, str):
        data = json.loads(data)
    return load_cartan(data["cartan"], data.get("labels"))
