"""Dense exact-rational matrices with deterministic elimination.

Row reduction always picks the first nonzero row for each pivot column, so
every rank / kernel / solve result is reproducible bit-for-bit.
"""

from __future__ import annotations

from fractions import Fraction as Q


class Mat:
    """A dense matrix over Q.  Rows are lists of Fractions; nc is tracked
    explicitly so zero-row and zero-column matrices stay well defined."""

    __slots__ = ("rows", "nr", "nc")

    def __init__(self, rows, nc=None):
        self.rows = [[Q(x) for x in r] for r in rows]
        self.nr = len(self.rows)
        if self.nr:
            self.nc = len(self.rows[0])
            if any(len(r) != self.nc for r in self.rows):
                raise ValueError("ragged rows")
            if nc is not None and nc != self.nc:
                raise ValueError("nc mismatch")
        else:
            if nc is None:
                raise ValueError("empty matrix needs explicit nc")
            self.nc = nc

    @staticmethod
    def zeros(nr, nc):
        return Mat([[Q(0)] * nc for _ in range(nr)], nc)

    @staticmethod
    def identity(n):
        return Mat([[Q(int(i == j)) for j in range(n)] for i in range(n)], n)

    @staticmethod
    def from_columns(cols, nr):
        m = Mat.zeros(nr, len(cols))
        for j, c in enumerate(cols):
            for i in range(nr):
                m.rows[i][j] = Q(c[i])
        return m

    def __eq__(self, other):
        return isinstance(other, Mat) and self.nc == other.nc and self.rows == other.rows

    def __repr__(self):
        return f"Mat({self.nr}x{self.nc})"

    def copy(self):
        return Mat([list(r) for r in self.rows], self.nc)

    def col(self, j):
        return [r[j] for r in self.rows]

    def columns(self):
        return [self.col(j) for j in range(self.nc)]

    @property
    def T(self):
        return Mat([[self.rows[i][j] for i in range(self.nr)] for j in range(self.nc)], self.nr)

    def __matmul__(self, other):
        if isinstance(other, Mat):
            if self.nc != other.nr:
                raise ValueError("shape mismatch")
            return Mat(
                [
                    [
                        sum((self.rows[i][k] * other.rows[k][j] for k in range(self.nc)), Q(0))
                        for j in range(other.nc)
                    ]
                    for i in range(self.nr)
                ],
                other.nc,
            )
        # vector
        if len(other) != self.nc:
            raise ValueError("shape mismatch")
        return [sum((self.rows[i][k] * other[k] for k in range(self.nc)), Q(0)) for i in range(self.nr)]

    def __add__(self, other):
        if (self.nr, self.nc) != (other.nr, other.nc):
            raise ValueError("shape mismatch")
        return Mat([[a + b for a, b in zip(r, s)] for r, s in zip(self.rows, other.rows)], self.nc)

    def __sub__(self, other):
        if (self.nr, self.nc) != (other.nr, other.nc):
            raise ValueError("shape mismatch")
        return Mat([[a - b for a, b in zip(r, s)] for r, s in zip(self.rows, other.rows)], self.nc)

    def scale(self, c):
        c = Q(c)
        return Mat([[c * x for x in r] for r in self.rows], self.nc)

    def hstack(self, other):
        if self.nr != other.nr:
            raise ValueError("shape mismatch")
        return Mat([r + s for r, s in zip(self.rows, other.rows)], self.nc + other.nc)

    def vstack(self, other):
        if self.nc != other.nc:
            raise ValueError("shape mismatch")
        return Mat([list(r) for r in self.rows] + [list(r) for r in other.rows], self.nc)

    def is_zero(self):
        return all(x == 0 for r in self.rows for x in r)

    def rref(self):
        """Reduced row echelon form.  Returns (Mat of nonzero rows, pivot cols)."""
        m = [list(r) for r in self.rows]
        pivots = []
        r = 0
        for c in range(self.nc):
            pr = None
            for i in range(r, len(m)):
                if m[i][c] != 0:
                    pr = i
                    break
            if pr is None:
                continue
            m[r], m[pr] = m[pr], m[r]
            inv = 1 / m[r][c]
            m[r] = [x * inv for x in m[r]]
            for i in range(len(m)):
                if i != r and m[i][c] != 0:
                    f = m[i][c]
                    m[i] = [a - f * b for a, b in zip(m[i], m[r])]
            pivots.append(c)
            r += 1
            if r == len(m):
                break
        return Mat(m[:r], self.nc), pivots

    def rank(self):
        return len(self.rref()[1])

    def nullspace(self):
        """Basis of the right kernel, one vector per free column, ordered by
        ascending free-column index.  Each vector has a 1 at its free column."""
        red, pivots = self.rref()
        pivset = set(pivots)
        free = [j for j in range(self.nc) if j not in pivset]
        basis = []
        for f in free:
            v = [Q(0)] * self.nc
            v[f] = Q(1)
            for k, p in enumerate(pivots):
                v[p] = -red.rows[k][f]
            basis.append(v)
        return basis

    def solve(self, rhs):
        """Solve self @ X = rhs for a Mat rhs.  Raises ValueError if
        inconsistent.  Free variables are set to zero."""
        aug = self.hstack(rhs)
        red, pivots = aug.rref()
        for p in pivots:
            if p >= self.nc:
                raise ValueError("inconsistent system")
        x = Mat.zeros(self.nc, rhs.nc)
        for k, p in enumerate(pivots):
            for j in range(rhs.nc):
                x.rows[p][j] = red.rows[k][self.nc + j]
        return x

    def det(self):
        if self.nr != self.nc:
            raise ValueError("det of non-square matrix")
        m = [list(r) for r in self.rows]
        n = self.nr
        d = Q(1)
        for c in range(n):
            pr = None
            for i in range(c, n):
                if m[i][c] != 0:
                    pr = i
                    break
            if pr is None:
                return Q(0)
            if pr != c:
                m[c], m[pr] = m[pr], m[c]
                d = -d
            d *= m[c][c]
            inv = 1 / m[c][c]
            for i in range(c + 1, n):
                if m[i][c] != 0:
                    f = m[i][c] * inv
                    m[i] = [a - f * b for a, b in zip(m[i], m[c])]
        return d


def column_space_pivots(m: Mat):
    """Indices of a deterministic maximal independent subset of columns."""
    return m.rref()[1]


def span_union_rank(blocks):
    """Rank of the span of the columns of several same-height matrices."""
    if not blocks:
        return 0
    acc = blocks[0]
    for b in blocks[1:]:
        acc = acc.hstack(b)
    return acc.rank()


def subspace_leq(a: Mat, b: Mat):
    """True iff colspace(a) is contained in colspace(b)."""
    if a.nc == 0:
        return True
    return b.hstack(a).rank() == b.rank()


def subspace_eq(a: Mat, b: Mat):
    return subspace_leq(a, b) and subspace_leq(b, a)
