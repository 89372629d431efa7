"""Dense square matrices over the two scalar backends.

Everything here is pure and immutable: operations return new matrices.
The unipotent-times-lower factorization ``ul_factor`` is the engine behind
every big-cell computation; ``big_cell_factor`` adds the model's omega
bookkeeping and delegates the family-specific cell solve to the model.
"""

from .errors import ModelMismatch, SingularCell, SingularMatrix
from .scalars import EXACT


class Mat:
    """Immutable n x n matrix over a scalar backend."""

    __slots__ = ("n", "rows", "backend")

    def __init__(self, rows, backend=EXACT):
        rows = tuple(tuple(backend.of(x) for x in row) for row in rows)
        n = len(rows)
        if any(len(row) != n for row in rows):
            raise ValueError("matrix must be square")
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "rows", rows)
        object.__setattr__(self, "backend", backend)

    def __setattr__(self, *a):
        raise AttributeError("Mat is immutable")

    # -- construction helpers -------------------------------------------------

    @staticmethod
    def identity(n, backend=EXACT):
        one, zero = backend.of(1), backend.of(0)
        return Mat([[one if i == j else zero for j in range(n)] for i in range(n)],
                   backend)

    @staticmethod
    def zero(n, backend=EXACT):
        z = backend.of(0)
        return Mat([[z] * n for _ in range(n)], backend)

    def replace(self, entries):
        """New matrix with entries[(i, j)] = value overrides (0-based)."""
        rows = [list(r) for r in self.rows]
        for (i, j), v in entries.items():
            rows[i][j] = self.backend.of(v)
        return Mat(rows, self.backend)

    # -- basic queries ---------------------------------------------------------

    def __getitem__(self, ij):
        i, j = ij
        return self.rows[i][j]

    def col(self, j):
        return tuple(self.rows[i][j] for i in range(self.n))

    def __eq__(self, other):
        if not isinstance(other, Mat) or other.n != self.n:
            return NotImplemented
        eq = self.backend.eq
        return all(eq(self.rows[i][j], other.rows[i][j])
                   for i in range(self.n) for j in range(self.n))

    def __hash__(self):
        raise TypeError("Mat is not hashable (equality is backend-dependent)")

    def is_identity(self):
        bz, eq = self.backend.is_zero, self.backend.eq
        one = self.backend.of(1)
        return all(eq(self.rows[i][i], one) if i == j else bz(self.rows[i][j])
                   for i in range(self.n) for j in range(self.n))

    def is_upper_triangular(self, unit=False):
        bz = self.backend.is_zero
        if any(not bz(self.rows[i][j]) for i in range(self.n) for j in range(i)):
            return False
        if unit:
            one = self.backend.of(1)
            return all(self.backend.eq(self.rows[i][i], one) for i in range(self.n))
        return True

    def is_lower_triangular(self):
        bz = self.backend.is_zero
        return all(bz(self.rows[i][j])
                   for i in range(self.n) for j in range(i + 1, self.n))

    # -- arithmetic -------------------------------------------------------------

    def __mul__(self, other):
        if isinstance(other, Mat):
            if other.n != self.n:
                raise ModelMismatch("dimension mismatch %d vs %d" % (self.n, other.n))
            a, b, n = self.rows, other.rows, self.n
            return Mat([[sum(a[i][k] * b[k][j] for k in range(n)) for j in range(n)]
                        for i in range(n)], self.backend)
        s = self.backend.of(other)
        return Mat([[x * s for x in row] for row in self.rows], self.backend)

    __rmul__ = __mul__

    def __add__(self, other):
        if other.n != self.n:
            raise ModelMismatch("dimension mismatch")
        return Mat([[a + b for a, b in zip(ra, rb)]
                    for ra, rb in zip(self.rows, other.rows)], self.backend)

    def __sub__(self, other):
        if other.n != self.n:
            raise ModelMismatch("dimension mismatch")
        return Mat([[a - b for a, b in zip(ra, rb)]
                    for ra, rb in zip(self.rows, other.rows)], self.backend)

    def __neg__(self):
        return Mat([[-x for x in row] for row in self.rows], self.backend)

    def __pow__(self, k):
        if k < 0:
            return self.inv() ** (-k)
        out = Mat.identity(self.n, self.backend)
        base = self
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out

    def transpose(self):
        return Mat(list(zip(*self.rows)), self.backend)

    def apply(self, vec):
        """Matrix times a column vector (returned as a tuple)."""
        if len(vec) != self.n:
            raise ModelMismatch("vector length mismatch")
        vec = [self.backend.of(x) for x in vec]
        return tuple(sum(r[k] * vec[k] for k in range(self.n)) for r in self.rows)

    def inv(self):
        """Inverse by Gauss-Jordan; exact backend picks the first nonzero pivot."""
        n, bz = self.n, self.backend.is_zero
        a = [list(row) for row in self.rows]
        b = [list(row) for row in Mat.identity(n, self.backend).rows]
        for c in range(n):
            piv = None
            if self.backend.exact:
                for r in range(c, n):
                    if not bz(a[r][c]):
                        piv = r
                        break
            else:
                piv = max(range(c, n), key=lambda r: abs(a[r][c]))
                if bz(a[piv][c]):
                    piv = None
            if piv is None:
                raise SingularMatrix("matrix is singular")
            if piv != c:
                a[c], a[piv] = a[piv], a[c]
                b[c], b[piv] = b[piv], b[c]
            p = a[c][c]
            a[c] = [x / p for x in a[c]]
            b[c] = [x / p for x in b[c]]
            for r in range(n):
                if r != c and not bz(a[r][c]):
                    f = a[r][c]
                    a[r] = [x - f * y for x, y in zip(a[r], a[c])]
                    b[r] = [x - f * y for x, y in zip(b[r], b[c])]
        return Mat(b, self.backend)

    def __repr__(self):
        s = self.backend.str_of
        return "Mat([%s])" % ", ".join(
            "[%s]" % ", ".join(s(x) for x in row) for row in self.rows)


def det(m):
    """Determinant: fraction-free Bareiss (exact), partial-pivot Gaussian (float)."""
    n = m.n
    if n == 0:
        return m.backend.of(1)
    a = [list(row) for row in m.rows]
    if m.backend.exact:
        sign = 1
        prev = m.backend.of(1)
        for k in range(n - 1):
            if a[k][k] == 0:
                for r in range(k + 1, n):
                    if a[r][k] != 0:
                        a[k], a[r] = a[r], a[k]
                        sign = -sign
                        break
                else:
                    return m.backend.of(0)
            for i in range(k + 1, n):
                for j in range(k + 1, n):
                    a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) / prev
                a[i][k] = m.backend.of(0)
            prev = a[k][k]
        return a[n - 1][n - 1] if sign > 0 else -a[n - 1][n - 1]
    sign = 1.0
    for k in range(n):
        piv = max(range(k, n), key=lambda r: abs(a[r][k]))
        if a[piv][k] == 0.0:
            return 0.0
        if piv != k:
            a[k], a[piv] = a[piv], a[k]
            sign = -sign
        for i in range(k + 1, n):
            f = a[i][k] / a[k][k]
            for j in range(k, n):
                a[i][j] -= f * a[k][j]
    out = sign
    for k in range(n):
        out *= a[k][k]
    return out


def minor(m, rows, cols):
    """Determinant of the submatrix on the given row and column index sets."""
    rows, cols = sorted(rows), sorted(cols)
    if len(rows) != len(cols) or not rows:
        raise ValueError("need equally many rows and columns, at least one each")
    if rows[0] < 0 or rows[-1] >= m.n or cols[0] < 0 or cols[-1] >= m.n:
        raise IndexError("minor index out of range")
    sub = Mat([[m.rows[i][j] for j in cols] for i in rows], m.backend)
    return det(sub)


def ul_factor(m):
    """Factor m = U * Lw with U unit upper triangular and Lw lower triangular.

    Exists iff all trailing principal minors (last k rows x last k columns)
    are nonzero; raises SingularCell otherwise. Computed as a no-pivot LU of
    the index-reversed matrix.
    """
    n, bz = m.n, m.backend.is_zero
    rev = lambda a: Mat([[a.rows[n - 1 - i][n - 1 - j] for j in range(n)]
                         for i in range(n)], a.backend)
    a = [list(row) for row in rev(m).rows]
    low = [[m.backend.of(0)] * n for _ in range(n)]
    for k in range(n):
        low[k][k] = m.backend.of(1)
        if bz(a[k][k]):
            raise SingularCell("trailing principal minor %d vanishes" % (n - k))
        for i in range(k + 1, n):
            f = a[i][k] / a[k][k]
            low[i][k] = f
            for j in range(k, n):
                a[i][j] -= f * a[k][j]
    lt = rev(Mat(low, m.backend))          # unit upper triangular
    ut = rev(Mat(a, m.backend))            # lower triangular
    return lt, ut


class BigCellFactorization:
    """g = u * omega_used * p with u in U+ (unit diagonal) and p in P+."""

    __slots__ = ("u", "p", "omega_used")

    def __init__(self, u, p, omega_used):
        self.u = u
        self.p = p
        self.omega_used = omega_used

    def product(self):
        return self.u * self.omega_used * self.p


def big_cell_factor(g, model):
    """Factor g = u . omega . p inside the model's open cell.

    Computed from the U+ . P- factorization of g * omega^{-1}; the
    family-specific solve lives on the model. Raises SingularCell when g is
    outside the open cell, ModelMismatch on a dimension clash.
    """
    if g.n != model.dim:
        raise ModelMismatch("matrix is %dx%d, model is %dx%d"
                            % (g.n, g.n, model.dim, model.dim))
    h = g * model.omega_inv
    u, low = model.cell_factor(h)
    p = model.omega_inv * low * model.omega
    return BigCellFactorization(u, p, model.omega)
