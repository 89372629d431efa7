"""Concrete matrix realizations of (G, P+, L, U+, omega) with positivity data.

Three families behind one interface:

* ``sl:n``   -- SL_n(R) with full flags, U+ the unit upper triangulars,
                positivity = total positivity along the fixed reduced word
                (s1)(s2 s1)(s3 s2 s1)...;
* ``sp:n``   -- Sp_2n(R) with the Siegel parabolic, U+ = [[I,B],[0,I]] with
                B symmetric, positivity = B positive definite;
* ``so:p,n`` -- SO0(1+p, n+p) acting on R^(n+2p+1), U+ generated by the chain
                elements u_j(c) and the vector elements u_p(v), positivity =
                positive chain coordinates and v inside the fixed cone of the
                (1,n)-form on the middle block.

A model owns its omega (a concrete lift of the longest Weyl element), its
invariant form, the coordinate charts on U+ and the family-specific big-cell
solver. Construction runs exact self-tests: omega conjugates P+ to P-, the
generators preserve the form, and the turn-left map sends a sample positive
unipotent to a positive unipotent (this pins the sign conventions).
"""

import itertools
from fractions import Fraction

from .errors import (ConventionFailure, CoordinateChartError, FramedRepError,
                     ModelMismatch, NotInGroup, NotInLevi, NotUnipotent,
                     SingularCell, SingularMatrix, InternalInconsistency)
from .linalg import Mat, det
from .scalars import EXACT, format_rational


class UnipCoord:
    """Family-specific coordinates of an element of U+.

    sl: tuple of word parameters; sp: rows of the symmetric block B;
    so: (rows of the p x (p-1) chain matrix C, tuple of p vectors in W).
    """

    __slots__ = ("family", "data")

    def __init__(self, family, data):
        self.family = family
        self.data = data

    def __eq__(self, other):
        return (isinstance(other, UnipCoord) and self.family == other.family
                and self.data == other.data)

    def __repr__(self):
        return "UnipCoord(%r, %r)" % (self.family, self.data)


class LeviElem:
    """An element of the Levi factor L = P+ ∩ P- with its block view."""

    __slots__ = ("family", "mat", "blocks")

    def __init__(self, family, mat, blocks):
        self.family = family
        self.mat = mat
        self.blocks = blocks

    def __eq__(self, other):
        return isinstance(other, LeviElem) and self.mat == other.mat

    def __repr__(self):
        return "LeviElem(%r, %r)" % (self.family, self.blocks)


def _rand_fraction(rng, nonzero=False, positive=False, lo=-4, hi=4):
    while True:
        num = rng.randint(1, hi) if positive else rng.randint(lo, hi)
        den = rng.randint(1, 3)
        x = Fraction(num, den)
        if nonzero and x == 0:
            continue
        if positive and x <= 0:
            continue
        return x


class GroupModel:
    family = None

    # ---- shared helpers ------------------------------------------------------

    def identity(self):
        return Mat.identity(self.dim, self.backend)

    def _check_dim(self, g):
        if g.n != self.dim:
            raise ModelMismatch("matrix is %dx%d, model needs %d"
                                % (g.n, g.n, self.dim))

    def coerce_unipotent_mat(self, u):
        """Accept a UnipCoord or a Mat, return the matrix."""
        if isinstance(u, UnipCoord):
            return self.u_to_mat(u)
        self._check_dim(u)
        return u

    def positive(self, x):
        if self.backend.exact:
            return x > 0
        return x > getattr(self.backend, "tol", 0.0)

    def in_levi(self, g):
        return self.in_parabolic(g, "+") and self.in_parabolic(g, "-")

    def is_ustar(self, u):
        """u in U+_* i.e. omega^-1 u omega in the open cell."""
        um = self.coerce_unipotent_mat(u)
        if not self.in_unipotent(um):
            raise NotUnipotent("element is not in U+")
        return self.cell_pivots_ok(self.omega_inv * um)

    def u_theta(self):
        return self.u_to_mat(self.u_theta_coord())

    def is_positive_unipotent(self, u):
        um = self.coerce_unipotent_mat(u)
        if not self.in_unipotent(um):
            raise NotUnipotent("element is not in U+")
        try:
            c = self.mat_to_coord(um)
        except CoordinateChartError:
            return False
        return self.coord_is_positive(c)

    def levi_from_mat(self, g):
        self._check_dim(g)
        if not self.in_levi(g):
            raise NotInLevi("matrix is not in the Levi factor")
        return LeviElem(self.family, g, self._levi_blocks(g))

    def random_unipotent_coord(self, rng):
        """A generic element of U+ (chart-stable coordinates drawn at random)."""
        while True:
            c = self._random_coord(rng, positive=False)
            try:
                if self.mat_to_coord(self.u_to_mat(c)) == c:
                    return c
            except CoordinateChartError:
                continue

    def random_positive_coord(self, rng):
        return self._random_coord(rng, positive=True)

    def random_ustar_coord(self, rng):
        while True:
            c = self._random_coord(rng, positive=False)
            if self.is_ustar(c):
                return c

    def random_group_element(self, rng):
        u1 = self.u_to_mat(self.random_unipotent_coord(rng))
        u2 = self.u_to_mat(self.random_unipotent_coord(rng))
        l = self.random_levi(rng, in_l0=False).mat
        k = rng.randint(0, 1)
        return u1 * (self.omega ** k) * l * u2

    def spec_string(self):
        raise NotImplementedError

    def __repr__(self):
        return "<GroupModel %s dim=%d backend=%s>" % (
            self.spec_string(), self.dim, self.backend.name)

    # ---- construction self-tests --------------------------------------------

    def _self_test(self):

        omega = self.omega
        if not self.in_group(omega):
            raise ConventionFailure("omega is not in the group")
        if not self.in_levi(omega * omega):
            raise ConventionFailure("omega^2 is not in the Levi factor")
        for gen in self._parabolic_generators():
            if not self.in_parabolic(omega * gen * self.omega_inv, "-"):
                raise ConventionFailure("omega P+ omega^-1 is not P-")
        for gen in self._group_generators():
            if not self.in_group(gen):
                raise ConventionFailure("a generator does not preserve the form")
        for c in (self.u_theta_coord(), self._sample_positive_coord()):
            um = self.u_to_mat(c)
            if not self.is_positive_unipotent(um):
                raise ConventionFailure("sample positive element fails positivity")
            turned, _ = self.cell_factor(omega * um.inv())
            if not self.is_positive_unipotent(turned):
                raise ConventionFailure(
                    "turn-left does not preserve positivity; omega signs wrong")
        # the cube identity needs omega to lift the longest element of W(Theta),
        # which matches our omega only when Theta spans the full Weyl group
        if self.family in ("sl", "sp"):
            ut = self.u_theta()
            if not self.in_parabolic((ut * omega) ** 3, "+"):
                raise ConventionFailure("(u_theta omega)^3 left P+")


# ============================ SL_n ============================================


class SLModel(GroupModel):
    family = "sl"

    def __init__(self, n, backend=EXACT, levi_convention="adjoint"):
        if n < 2:
            raise ValueError("sl needs n >= 2")
        if levi_convention not in ("adjoint", "sl"):
            raise ValueError("levi_convention must be 'adjoint' or 'sl'")
        self.n = n
        self.dim = n
        self.backend = backend
        self.levi_convention = levi_convention
        self.form = None
        rows = [[0] * n for _ in range(n)]
        for i in range(n):
            rows[i][n - 1 - i] = (-1) ** i
        self.omega = Mat(rows, backend)
        if not backend.eq(det(self.omega), backend.of(1)):
            self.omega = -self.omega
        self.omega_inv = self.omega.inv()
        # word (s1)(s2 s1)(s3 s2 s1)... as 1-based root indices
        self.word = [i for k in range(1, n) for i in range(k, 0, -1)]
        self._self_test()

    def spec_string(self):
        return "sl:%d" % self.n

    def _x(self, i, t):
        """Elementary x_i(t) = I + t E_{i-1,i} (roots 1-based)."""
        return Mat.identity(self.n, self.backend).replace({(i - 1, i): t})

    def in_group(self, g):
        self._check_dim(g)
        return self.backend.eq(det(g), self.backend.of(1))

    def in_parabolic(self, g, sign):
        self._check_dim(g)
        if not self.in_group(g):
            raise NotInGroup("determinant is not 1")
        if sign == "+":
            return g.is_upper_triangular()
        return g.is_lower_triangular()

    def in_unipotent(self, g):
        self._check_dim(g)
        return g.is_upper_triangular(unit=True)

    def u_to_mat(self, coord):
        if coord.family != self.family:
            raise ModelMismatch("coordinate family %r" % coord.family)
        params = coord.data
        if len(params) != len(self.word):
            raise ModelMismatch("expected %d word parameters" % len(self.word))
        out = Mat.identity(self.n, self.backend)
        for i, t in zip(self.word, params):
            out = out * self._x(i, t)
        return out

    def mat_to_coord(self, u):
        u = self.coerce_unipotent_mat(u)
        if not self.in_unipotent(u):
            raise NotUnipotent("not unit upper triangular")
        params = self._peel([list(r) for r in u.rows])
        coord = UnipCoord(self.family, tuple(params))
        if not (self.u_to_mat(coord) == u):
            raise CoordinateChartError("greedy word peel does not reproduce input")
        return coord

    def _peel(self, rows):
        m = len(rows)
        if m == 1:
            return []
        bz = self.backend.is_zero
        zero = self.backend.of(0)
        one = self.backend.of(1)
        up = [[one if i == j else zero for j in range(m - 1)] for i in range(m - 1)]
        b = [zero] * m
        b[m - 1] = rows[m - 2][m - 1]
        if not bz(b[m - 1]):
            for i in range(m - 2):
                up[i][m - 2] = rows[i][m - 1] / b[m - 1]
        else:
            for i in range(m - 2):
                if not bz(rows[i][m - 1]):
                    raise CoordinateChartError("outside the word chart")
        for j in range(m - 2, 0, -1):
            bj = rows[j - 1][j] - up[j - 1][j]
            b[j] = bj
            if not bz(bj):
                for i in range(j - 1):
                    up[i][j - 1] = (rows[i][j] - up[i][j]) / bj
            else:
                for i in range(j - 1):
                    if not bz(rows[i][j] - up[i][j]):
                        raise CoordinateChartError("outside the word chart")
        inner = self._peel(up)
        return inner + [b[j] for j in range(m - 1, 0, -1)]

    def coord_is_positive(self, coord):
        return all(self.positive(t) for t in coord.data)

    def u_theta_coord(self):
        one = self.backend.of(1)
        return UnipCoord(self.family, tuple(one for _ in self.word))

    def _sample_positive_coord(self):
        return UnipCoord(self.family, tuple(
            self.backend.of(Fraction(k % 3 + 1, 1)) for k in range(len(self.word))))

    def cell_factor(self, h):
        from .linalg import ul_factor
        return ul_factor(h)

    def cell_pivots_ok(self, h):
        try:
            self.cell_factor(h)
            return True
        except SingularCell:
            return False

    # Levi ---------------------------------------------------------------------

    def _levi_blocks(self, g):
        return tuple(g[i, i] for i in range(self.n))

    def levi_from_blocks(self, diag):
        diag = [self.backend.of(x) for x in diag]
        if len(diag) != self.n or any(self.backend.is_zero(x) for x in diag):
            raise NotInLevi("need %d nonzero diagonal entries" % self.n)
        m = Mat.identity(self.n, self.backend).replace(
            {(i, i): diag[i] for i in range(self.n)})
        if not self.in_group(m):
            raise NotInGroup("diagonal determinant is not 1")
        return LeviElem(self.family, m, tuple(diag))

    def in_L0(self, l):
        d = l.blocks
        pos = all(self.positive(x) for x in d)
        neg = all(self.positive(-x) for x in d)
        return pos or neg

    def levi_component_invariant(self, l):
        if not self.in_L0(l):
            raise NotInLevi("element is outside L0")
        if self.levi_convention == "adjoint" or self.n % 2 == 1:
            return "1"
        return "+1" if self.positive(l.blocks[0]) else "-1"

    def random_levi(self, rng, in_l0=True):
        while True:
            d = [_rand_fraction(rng, nonzero=True, positive=in_l0)
                 for _ in range(self.n - 1)]
            prod = Fraction(1)
            for x in d:
                prod *= x
            d.append(Fraction(1) / prod)
            if in_l0 and self.levi_convention == "sl" and self.n % 2 == 0 \
                    and rng.random() < 0.5:
                d = [-x for x in d]
            try:
                return self.levi_from_blocks(d)
            except (NotInLevi, NotInGroup):
                continue

    def sign_gauge_candidates(self):
        """Representatives of the sign components of L available in the group."""
        out = []
        for eps in itertools.product((1, -1), repeat=self.n - 1):
            s = [1]
            for e in eps:
                s.append(s[-1] * e)
            prod = 1
            for x in s:
                prod *= x
            if prod == -1:
                if self.n % 2 == 0:
                    continue
                s = [-x for x in s]
            out.append(Mat.identity(self.n, self.backend).replace(
                {(i, i): s[i] for i in range(self.n)}))
        return out

    def cone_multiplicities(self):
        return {i: self.n - i for i in range(1, self.n)}

    def _random_coord(self, rng, positive):
        return UnipCoord(self.family, tuple(
            _rand_fraction(rng, nonzero=True, positive=positive)
            for _ in self.word))

    def _parabolic_generators(self):
        gens = [self._x(i, self.backend.of(1)) for i in range(1, self.n)]
        gens.append(self.levi_from_blocks(
            [2] + [1] * (self.n - 2) + [Fraction(1, 2)]).mat)
        return gens

    def _group_generators(self):
        return self._parabolic_generators()

    def coord_interpolate(self, coord, t):
        """Straight-line path toward the basepoint (all word parameters 1)."""
        t = self.backend.of(t)
        one = self.backend.of(1)
        return UnipCoord(self.family,
                         tuple(t * x + (one - t) * one for x in coord.data))

    def levi_compact_target(self, l):
        sign = 1 if self.positive(l.blocks[0]) else -1
        return self.levi_from_blocks([sign] * self.n)

    def levi_path(self, l, target, t):
        # interpolate the first n-1 entries, solve the last for det 1;
        # entries never change sign along the way
        t = self.backend.of(t)
        one = self.backend.of(1)
        d = [t * a + (one - t) * b
             for a, b in zip(l.blocks[:-1], target.blocks[:-1])]
        prod = self.backend.of(1)
        for x in d:
            prod *= x
        d.append(one / prod)
        return self.levi_from_blocks(d)


# ============================ Sp_2n ==========================================


class SPModel(GroupModel):
    family = "sp"

    def __init__(self, n, backend=EXACT):
        if n < 1:
            raise ValueError("sp needs n >= 1")
        self.n = n
        self.dim = 2 * n
        self.backend = backend
        rows = [[0] * self.dim for _ in range(self.dim)]
        for i in range(n):
            rows[i][n + i] = 1
            rows[n + i][i] = -1
        self.form = Mat(rows, backend)
        self.omega = self.form
        self.omega_inv = self.omega.inv()
        self._self_test()

    def spec_string(self):
        return "sp:%d" % self.n

    def _blocks(self, g):
        n = self.n
        sub = lambda r0, c0: Mat([[g[r0 + i, c0 + j] for j in range(n)]
                                  for i in range(n)], self.backend)
        return sub(0, 0), sub(0, n), sub(n, 0), sub(n, n)

    def _stack(self, a, b, c, d):
        n = self.n
        rows = []
        for i in range(n):
            rows.append(list(a.rows[i]) + list(b.rows[i]))
        for i in range(n):
            rows.append(list(c.rows[i]) + list(d.rows[i]))
        return Mat(rows, self.backend)

    def in_group(self, g):
        self._check_dim(g)
        return g.transpose() * self.form * g == self.form

    def in_parabolic(self, g, sign):
        self._check_dim(g)
        if not self.in_group(g):
            raise NotInGroup("matrix does not preserve the symplectic form")
        a, b, c, d = self._blocks(g)
        zero = Mat.zero(self.n, self.backend)
        return (c == zero) if sign == "+" else (b == zero)

    def in_unipotent(self, g):
        self._check_dim(g)
        if not self.in_group(g):
            return False
        a, b, c, d = self._blocks(g)
        eye = Mat.identity(self.n, self.backend)
        return a == eye and d == eye and c == Mat.zero(self.n, self.backend)

    def u_to_mat(self, coord):
        if coord.family != self.family:
            raise ModelMismatch("coordinate family %r" % coord.family)
        b = Mat(coord.data, self.backend)
        if not (b == b.transpose()):
            raise NotUnipotent("block B must be symmetric")
        eye = Mat.identity(self.n, self.backend)
        return self._stack(eye, b, Mat.zero(self.n, self.backend), eye)

    def mat_to_coord(self, u):
        u = self.coerce_unipotent_mat(u)
        if not self.in_unipotent(u):
            raise NotUnipotent("not of Siegel unipotent shape")
        _, b, _, _ = self._blocks(u)
        return UnipCoord(self.family, b.rows)

    def coord_is_positive(self, coord):
        b = Mat(coord.data, self.backend)
        if not (b == b.transpose()):
            return False
        from .linalg import minor
        idx = []
        for k in range(self.n):
            idx.append(k)
            if not self.positive(minor(b, idx, idx)):
                return False
        return True

    def u_theta_coord(self):
        return UnipCoord(self.family, Mat.identity(self.n, self.backend).rows)

    def _sample_positive_coord(self):
        one = self.backend.of(1)
        half = self.backend.of(Fraction(1, 2))
        rows = [[one if i == j else half for j in range(self.n)]
                for i in range(self.n)]
        return UnipCoord(self.family, tuple(tuple(r) for r in rows))

    def cell_factor(self, h):
        _, h12, _, h22 = self._blocks(h)
        try:
            b = h12 * h22.inv()
        except SingularMatrix:
            raise SingularCell("Siegel block is singular")
        eye = Mat.identity(self.n, self.backend)
        u = self._stack(eye, b, Mat.zero(self.n, self.backend), eye)
        uinvh = self._stack(eye, -b, Mat.zero(self.n, self.backend), eye) * h
        if not (b == b.transpose()):
            raise InternalInconsistency("cell solve produced a nonsymmetric block")
        return u, uinvh

    def cell_pivots_ok(self, h):
        _, _, _, h22 = self._blocks(h)
        return not self.backend.is_zero(det(h22))

    # Levi ---------------------------------------------------------------------

    def _levi_blocks(self, g):
        a, _, _, _ = self._blocks(g)
        return a.rows

    def levi_from_blocks(self, a):
        a = Mat(a, self.backend) if not isinstance(a, Mat) else a
        if self.backend.is_zero(det(a)):
            raise NotInLevi("GL block must be invertible")
        m = self._stack(a, Mat.zero(self.n, self.backend),
                        Mat.zero(self.n, self.backend), a.transpose().inv())
        return LeviElem(self.family, m, a.rows)

    def in_L0(self, l):
        return True

    def levi_component_invariant(self, l):
        d = det(Mat(l.blocks, self.backend))
        return "+1" if self.positive(d) else "-1"

    def random_levi(self, rng, in_l0=True):
        while True:
            rows = [[_rand_fraction(rng) for _ in range(self.n)]
                    for _ in range(self.n)]
            a = Mat(rows, self.backend)
            if self.backend.is_zero(det(a)):
                continue
            if rng.random() < 0.5:
                a = Mat([[-x for x in a.rows[0]]] + [list(r) for r in a.rows[1:]],
                        self.backend)
            return self.levi_from_blocks(a)

    def sign_gauge_candidates(self):
        # conjugation B -> A B A^t preserves positive definiteness for every A
        return [self.identity()]

    def cone_multiplicities(self):
        return {1: 1}

    def _random_coord(self, rng, positive):
        n = self.n
        if positive:
            a = Mat([[_rand_fraction(rng) for _ in range(n)] for _ in range(n)],
                    self.backend)
            b = a.transpose() * a
            b = b + Mat.identity(n, self.backend).replace(
                {(i, i): _rand_fraction(rng, positive=True) for i in range(n)})
            return UnipCoord(self.family, b.rows)
        rows = [[Fraction(0)] * n for _ in range(n)]
        for i in range(n):
            for j in range(i, n):
                rows[i][j] = rows[j][i] = _rand_fraction(rng)
        return UnipCoord(self.family, tuple(tuple(r) for r in rows))

    def _parabolic_generators(self):
        gens = []
        b = Mat.identity(self.n, self.backend)
        gens.append(self.u_to_mat(UnipCoord(self.family, b.rows)))
        a = Mat.identity(self.n, self.backend).replace({(0, 0): 2})
        gens.append(self.levi_from_blocks(a).mat)
        if self.n > 1:
            a = Mat.identity(self.n, self.backend).replace({(0, 1): 1})
            gens.append(self.levi_from_blocks(a).mat)
        return gens

    def _group_generators(self):
        gens = list(self._parabolic_generators())
        gens.append(self.omega)
        return gens

    def coord_interpolate(self, coord, t):
        t = self.backend.of(t)
        one = self.backend.of(1)
        b = Mat(coord.data, self.backend)
        b = t * b + (one - t) * Mat.identity(self.n, self.backend)
        return UnipCoord(self.family, b.rows)

    def levi_compact_target(self, l):
        """An exactly orthogonal matrix near the polar factor of the GL block.

        Rationalizing the Cayley parameter keeps orthogonality exact; the
        determinant sign of the block is preserved via a final reflection.
        """
        a = Mat(l.blocks, self.backend)
        n = self.n
        neg = not self.positive(det(a))
        import numpy as np
        af = np.array([[float(x) for x in row] for row in a.rows])
        if neg:
            af = af @ np.diag([1.0] * (n - 1) + [-1.0])
        uu, _, vv = np.linalg.svd(af)
        q = uu @ vv
        # Cayley parameter of q, rationalized, then mapped back: exact O(n)
        s = np.linalg.solve(q + np.eye(n), q - np.eye(n))
        s = (s - s.T) / 2.0
        srat = Mat([[Fraction(x).limit_denominator(10 ** 6) for x in row]
                    for row in s], self.backend)
        eye = Mat.identity(n, self.backend)
        k0 = (eye + srat) * (eye - srat).inv()
        if neg:
            k0 = k0 * eye.replace({(n - 1, n - 1): -1})
        return self.levi_from_blocks(k0)

    def levi_path(self, l, target, t):
        t = self.backend.of(t)
        one = self.backend.of(1)
        a = Mat(l.blocks, self.backend)
        k0 = Mat(target.blocks, self.backend)
        m = k0.inv() * a
        at = k0 * (t * m + (one - t) * Mat.identity(self.n, self.backend))
        return self.levi_from_blocks(at)


# ============================ SO(1+p, n+p) ===================================


class SOModel(GroupModel):
    family = "so"

    def __init__(self, p, n, backend=EXACT):
        if p < 1 or n < 2:
            raise ValueError("so needs p >= 1 and n >= 2")
        self.p = p
        self.n = n
        self.dim = p + p + n + 1
        self.backend = backend
        N = self.dim
        q = [[0] * (p + 1) for _ in range(p + 1)]
        for i in range(p + 1):
            q[i][p - i] = (-1) ** i
        rows = [[0] * N for _ in range(N)]
        for a in range(p + 1):
            for b_ in range(p + 1):
                rows[p + n + a][b_] = q[a][b_]
                rows[a][p + n + b_] = q[b_][a]
        for i in range(1, n):
            rows[p + i][p + i] = -1
        self.form = Mat(rows, backend)
        self.j0 = Mat([[self.form[p + a, p + b] for b in range(n + 1)]
                       for a in range(n + 1)], backend)
        self.w0 = tuple(backend.of(1 if i in (0, n) else 0) for i in range(n + 1))
        self._pos_basis = self._positive_basis()
        self.omega = self._choose_omega()
        self.omega_inv = self.omega.inv()
        self._self_test()

    def spec_string(self):
        return "so:%d,%d" % (self.p, self.n)

    # -- form utilities ---------------------------------------------------------

    def jform(self, v, w):
        half = self.backend.of(Fraction(1, 2))
        jw = self.form.apply(w)
        return half * sum(a * b for a, b in zip(v, jw))

    def j0form(self, v, w):
        half = self.backend.of(Fraction(1, 2))
        jw = self.j0.apply(w)
        return half * sum(a * b for a, b in zip(v, jw))

    def in_cone(self, v):
        """Membership in the fixed cone Omega of the (1,n)-form on W."""
        return self.positive(self.j0form(v, v)) and self.positive(v[0])

    def _positive_basis(self):
        N, p = self.dim, self.p
        cols = []
        for i in range(p):
            s = 1 if self.positive(self.form[i, N - 1 - i]) else -1
            col = [0] * N
            col[i] = 1
            col[N - 1 - i] = s
            cols.append(col)
        col = [0] * N
        col[p] = 1
        col[p + self.n] = 1
        cols.append(col)
        return cols

    def _so0_component_positive(self, g):
        k = len(self._pos_basis)
        gb = [g.apply(c) for c in self._pos_basis]
        m = Mat([[self.jform(self._pos_basis[i], gb[j]) for j in range(k)]
                 for i in range(k)], self.backend)
        return self.positive(det(m))

    def in_group(self, g):
        self._check_dim(g)
        if not (g.transpose() * self.form * g == self.form):
            return False
        if not self.backend.eq(det(g), self.backend.of(1)):
            return False
        return self._so0_component_positive(g)

    # -- omega -------------------------------------------------------------------

    def _cone_swapper(self):
        """Exact y in SO(j0) with y(w0) = -w0 (swaps the two cones on W)."""
        n = self.n
        eye = Mat.identity(n + 1, self.backend)
        if n % 2 == 1:
            return -eye
        # -1 times the reflection in a negative vector orthogonal to w0
        z = [self.backend.of(0)] * (n + 1)
        z[1] = self.backend.of(1)
        zz = self.j0form(z, z)
        cols = []
        for j in range(n + 1):
            e = [self.backend.of(1 if i == j else 0) for i in range(n + 1)]
            coef = self.j0form(e, z) / zz
            cols.append([-(e[i] - 2 * coef * z[i]) for i in range(n + 1)])
        return Mat(list(zip(*cols)), self.backend)

    def _choose_omega(self):
        N, p, n = self.dim, self.p, self.n
        candidates = []
        base = [(-1) ** min(i, N - 1 - i) for i in range(N)]
        flat = [1] * N
        for pattern in (base, flat):
            for gl in (1, -1):
                for mid_flip in (None,) + tuple(range(p + 1, p + n)):
                    s = [gl * x for x in pattern]
                    rows = [[0] * N for _ in range(N)]
                    for i in range(N):
                        rows[N - 1 - i][i] = s[i]
                    m = Mat(rows, self.backend)
                    if mid_flip is not None:
                        m = m * Mat.identity(N, self.backend).replace(
                            {(mid_flip, mid_flip): -1})
                    candidates.append(m)
        for m in candidates:
            if not self.in_group(m):
                continue
            ok = True
            for gen in self._parabolic_generators():
                if not self.in_parabolic(m * gen * m.inv(), "-"):
                    ok = False
                    break
            if not ok:
                continue
            ut = self.u_to_mat(self.u_theta_coord())
            try:
                turned, _ = self._cell_factor_with_omega(m * ut.inv(), m)
            except (SingularCell, CoordinateChartError):
                continue
            if self.is_positive_unipotent(turned):
                return m
        raise ConventionFailure("no admissible omega found for %s"
                                % self.spec_string())

    # -- parabolic / unipotent ----------------------------------------------------

    def in_parabolic(self, g, sign):
        self._check_dim(g)
        if not self.in_group(g):
            raise NotInGroup("matrix is not in SO0 of the form")
        bz = self.backend.is_zero
        N, p = self.dim, self.p
        if sign == "+":
            return all(bz(g[i, j]) for j in range(p) for i in range(j + 1, N))
        return all(bz(g[i, N - 1 - j]) for j in range(p)
                   for i in range(N - 1 - j))

    def in_unipotent(self, g):
        self._check_dim(g)
        if not g.is_upper_triangular(unit=True):
            return False
        if not (g.transpose() * self.form * g == self.form):
            return False
        p, n = self.p, self.n
        eye = Mat.identity(n + 1, self.backend)
        wblock = Mat([[g[p + a, p + b] for b in range(n + 1)]
                      for a in range(n + 1)], self.backend)
        return wblock == eye

    def u_chain(self, j, c):
        """u_j(c), 1 <= j <= p-1: entry c at (j-1, j) and its mirror slot."""
        N = self.dim
        return Mat.identity(N, self.backend).replace(
            {(j - 1, j): c, (N - 1 - j, N - j): c})

    def u_vec(self, v):
        """u_p(v) for v in W (length n+1)."""
        N, p, n = self.dim, self.p, self.n
        v = [self.backend.of(x) for x in v]
        jv = self.j0.apply(v)
        entries = {}
        for a in range(n + 1):
            entries[(p - 1, p + a)] = v[a]
            entries[(p + a, p + n + 1)] = jv[a]
        entries[(p - 1, p + n + 1)] = self.j0form(v, v)
        return Mat.identity(N, self.backend).replace(entries)

    def u_to_mat(self, coord):
        if coord.family != self.family:
            raise ModelMismatch("coordinate family %r" % coord.family)
        crows, vecs = coord.data
        if len(crows) != self.p or len(vecs) != self.p:
            raise ModelMismatch("need %d blocks" % self.p)
        out = Mat.identity(self.dim, self.backend)
        for i in range(self.p):
            for j in range(1, self.p):
                out = out * self.u_chain(j, crows[i][j - 1])
            out = out * self.u_vec(vecs[i])
        return out

    def _coords_from_last_cols(self, cols):
        """Invert the block product from the last p columns of u.

        ``cols[c]`` is column c of u for c in {N-p, ..., N-1}. Closed form for
        p <= 2; p >= 3 falls back to an exact symbolic solve.
        """
        N, p, n = self.dim, self.p, self.n
        bz = self.backend.is_zero
        zero = self.backend.of(0)
        wslice = lambda col: [col[p + a] for a in range(n + 1)]
        if p == 1:
            v = self.j0.apply(wslice(cols[N - 1]))
            return UnipCoord(self.family, ((tuple(),), (tuple(v),)))
        if p == 2:
            last, prev = cols[N - 1], cols[N - 2]
            sigma = last[N - 2]
            beta = last[1]
            wvec = self.j0.apply(wslice(last))
            vtot = self.j0.apply(wslice(prev))
            if not bz(beta):
                b = self.j0form(wvec, wvec) / beta
                if bz(b):
                    raise CoordinateChartError("degenerate chain coordinates")
                v1 = tuple(x / b for x in wvec)
                a = sigma - b
                v2 = tuple(x - y for x, y in zip(vtot, v1))
            elif all(bz(x) for x in wvec):
                b = zero
                v1 = tuple(zero for _ in range(n + 1))
                a = sigma
                v2 = tuple(vtot)
            else:
                # null first vector: the block product has a one-parameter
                # fiber here, pick the canonical section with unit chain entry
                if not bz(self.j0form(wvec, wvec)):
                    raise CoordinateChartError("inconsistent null-locus data")
                b = self.backend.of(1)
                v1 = tuple(wvec)
                a = sigma - b
                v2 = tuple(x - y for x, y in zip(vtot, v1))
            return UnipCoord(self.family, (((a,), (b,)), (v1, v2)))
        return self._coords_from_cols_symbolic(cols)

    def _coords_from_cols_symbolic(self, cols):
        # exact but slow fallback for chain length >= 3; not exercised by the
        # shipped surfaces and models
        import sympy
        N, p, n = self.dim, self.p, self.n
        cs = [[sympy.Symbol("c_%d_%d" % (i, j)) for j in range(p - 1)]
              for i in range(p)]
        vs = [[sympy.Symbol("v_%d_%d" % (i, a)) for a in range(n + 1)]
              for i in range(p)]
        j0 = sympy.Matrix([[sympy.Rational(Fraction(x)) for x in row]
                           for row in self.j0.rows])
        out = sympy.eye(N)
        for i in range(p):
            for j in range(1, p):
                m = sympy.eye(N)
                m[j - 1, j] = cs[i][j - 1]
                m[N - 1 - j, N - j] = cs[i][j - 1]
                out = out * m
            m = sympy.eye(N)
            vcol = sympy.Matrix(vs[i])
            jv = j0 * vcol
            for a in range(n + 1):
                m[p - 1, p + a] = vcol[a]
                m[p + a, p + n + 1] = jv[a]
            m[p - 1, p + n + 1] = (vcol.T * j0 * vcol)[0, 0] / 2
            out = out * m
        eqs = []
        for c in range(N - p, N):
            for r in range(N):
                eqs.append(sympy.Eq(out[r, c],
                                    sympy.Rational(Fraction(cols[c][r]))))
        unknowns = [s for row in cs for s in row] + [s for row in vs for s in row]
        sols = sympy.solve(eqs, unknowns, dict=True)
        if not sols:
            raise CoordinateChartError("symbolic chart inversion failed")
        sol = sols[0]
        crows = tuple(tuple(self.backend.of(Fraction(sol[s])) for s in row)
                      for row in cs)
        vrows = tuple(tuple(self.backend.of(Fraction(sol[s])) for s in row)
                      for row in vs)
        return UnipCoord(self.family, (crows, vrows))

    def mat_to_coord(self, u):
        u = self.coerce_unipotent_mat(u)
        if not self.in_unipotent(u):
            raise NotUnipotent("not in U+ of the orthogonal model")
        cols = {c: u.col(c) for c in range(self.dim - self.p, self.dim)}
        coord = self._coords_from_last_cols(cols)
        if not (self.u_to_mat(coord) == u):
            raise CoordinateChartError("chart inversion does not reproduce input")
        return coord

    def coord_is_positive(self, coord):
        crows, vecs = coord.data
        for row in crows:
            if not all(self.positive(c) for c in row):
                return False
        return all(self.in_cone(v) for v in vecs)

    def u_theta_coord(self):
        one = self.backend.of(1)
        crows = tuple(tuple(one for _ in range(self.p - 1))
                      for _ in range(self.p))
        vecs = tuple(self.w0 for _ in range(self.p))
        return UnipCoord(self.family, (crows, vecs))

    def _sample_positive_coord(self):
        two = self.backend.of(2)
        crows = tuple(tuple(two for _ in range(self.p - 1))
                      for _ in range(self.p))
        vecs = tuple(tuple((i + 2) * x for x in self.w0) for i in range(self.p))
        return UnipCoord(self.family, (crows, vecs))

    def _cell_factor_with_omega(self, h, omega):
        # staircase solve of h = u * m with m lower for the descending p-flag
        N, p = self.dim, self.p
        bz = self.backend.is_zero
        ucols = {}
        mcoef = {}
        for k in range(1, p + 1):
            c = N - k
            coef = {}
            for r in range(N - 1, c - 1, -1):
                s = h[r, c]
                for rp in range(r + 1, N):
                    entry = ucols[rp][r] if rp in ucols else (
                        self.backend.of(1) if rp == r else self.backend.of(0))
                    s = s - coef[rp] * entry
                coef[r] = s
            piv = coef[c]
            if bz(piv):
                raise SingularCell("staircase pivot %d vanishes" % k)
            col = []
            for i in range(N):
                s = h[i, c]
                for rp in range(c + 1, N):
                    uentry = ucols[rp][i]
                    s = s - coef[rp] * uentry
                col.append(s / piv)
            ucols[c] = col
            mcoef[c] = coef
        coord = self._coords_from_last_cols(ucols)
        u = self.u_to_mat(coord)
        low = u.inv() * h
        for k in range(1, p + 1):
            c = N - k
            for i in range(c):
                if not bz(low[i, c]):
                    raise InternalInconsistency(
                        "cell residue is not lower for the descending flag")
        return u, low

    def cell_factor(self, h):
        return self._cell_factor_with_omega(h, self.omega)

    def cell_pivots_ok(self, h):
        N, p = self.dim, self.p
        bz = self.backend.is_zero
        ucols = {}
        for k in range(1, p + 1):
            c = N - k
            coef = {}
            for r in range(N - 1, c - 1, -1):
                s = h[r, c]
                for rp in range(r + 1, N):
                    entry = ucols[rp][r] if rp in ucols else (
                        self.backend.of(1) if rp == r else self.backend.of(0))
                    s = s - coef[rp] * entry
                coef[r] = s
            piv = coef[c]
            if bz(piv):
                return False
            col = []
            for i in range(N):
                s = h[i, c]
                for rp in range(c + 1, N):
                    s = s - coef[rp] * ucols[rp][i]
                col.append(s / piv)
            ucols[c] = col
        return True

    # Levi -------------------------------------------------------------------------

    def _levi_blocks(self, g):
        p, n = self.p, self.n
        x = tuple(g[i, i] for i in range(p))
        y = Mat([[g[p + a, p + b] for b in range(n + 1)] for a in range(n + 1)],
                self.backend)
        return (x, y)

    def levi_from_blocks(self, x, y=None):
        if y is None:
            x, y = x
        p, n, N = self.p, self.n, self.dim
        x = [self.backend.of(t) for t in x]
        y = Mat(y, self.backend) if not isinstance(y, Mat) else y
        if len(x) != p or any(self.backend.is_zero(t) for t in x):
            raise NotInLevi("need %d nonzero chain scalars" % p)
        if not (y.transpose() * self.j0 * y == self.j0):
            raise NotInLevi("W block does not preserve the (1,n) form")
        entries = {}
        for i in range(p):
            entries[(i, i)] = x[i]
            entries[(N - 1 - i, N - 1 - i)] = 1 / x[i]
        for a in range(n + 1):
            for b in range(n + 1):
                entries[(p + a, p + b)] = y[a, b]
        m = Mat.zero(N, self.backend).replace(entries)
        if not self.in_group(m):
            raise NotInGroup("signature of the Levi element is -1")
        return LeviElem(self.family, m, (tuple(x), y))

    def _sgn_y(self, y):
        return 1 if self.positive(y.apply(self.w0)[0]) else -1

    def in_L0(self, l):
        x, y = l.blocks
        eps = self._sgn_y(y)
        return all((self.positive(t) and eps == 1) or
                   (self.positive(-t) and eps == -1) for t in x)

    def levi_component_invariant(self, l):
        if not self.in_L0(l):
            raise NotInLevi("element is outside L0")
        if self.p % 2 == 0:
            return "1"
        return "+1" if self.positive(l.blocks[0][0]) else "-1"

    def random_so1n(self, rng):
        """Exact element of SO0(j0) via the Cayley transform of a j0-skew."""
        n = self.n
        while True:
            k = [[Fraction(0)] * (n + 1) for _ in range(n + 1)]
            for i in range(n + 1):
                for j in range(i + 1, n + 1):
                    k[i][j] = _rand_fraction(rng, lo=-2, hi=2)
                    k[j][i] = -k[i][j]
            s = self.j0 * Mat(k, self.backend)
            eye = Mat.identity(n + 1, self.backend)
            try:
                y = (eye + s) * (eye - s).inv()
            except SingularMatrix:
                continue
            # the Cayley image can land in the cone-swapping component when
            # I - tS degenerates along the way; normalize it back
            if self._sgn_y(y) == -1:
                y = self._cone_swapper() * y
            return y

    def random_levi(self, rng, in_l0=True):
        p = self.p
        y = self.random_so1n(rng)
        if in_l0:
            eps = -1 if (self.p % 2 == 1 and rng.random() < 0.5) else 1
            x = [eps * _rand_fraction(rng, positive=True) for _ in range(p)]
            if eps == -1:
                y = self._cone_swapper() * y
            return self.levi_from_blocks(x, y)
        while True:
            signs = [rng.choice((1, -1)) for _ in range(p)]
            ysign = rng.choice((1, -1))
            prod = ysign
            for s in signs:
                prod *= s
            if prod != 1:
                signs[0] = -signs[0]
            x = [s * _rand_fraction(rng, positive=True) for s in signs]
            yy = self._cone_swapper() * y if ysign == -1 else y
            try:
                return self.levi_from_blocks(x, yy)
            except (NotInGroup, NotInLevi):
                continue

    def sign_gauge_candidates(self):
        out = []
        swap = self._cone_swapper()
        eye = Mat.identity(self.n + 1, self.backend)
        for signs in itertools.product((1, -1), repeat=self.p):
            for ysign in (1, -1):
                prod = ysign
                for s in signs:
                    prod *= s
                if prod != 1:
                    continue
                y = swap if ysign == -1 else eye
                try:
                    out.append(self.levi_from_blocks(list(signs), y).mat)
                except (NotInGroup, NotInLevi):
                    continue
        return out

    def cone_multiplicities(self):
        return {j: self.p for j in range(1, self.p + 1)}

    def _random_coord(self, rng, positive):
        p, n = self.p, self.n
        crows = []
        vecs = []
        for _ in range(p):
            crows.append(tuple(
                _rand_fraction(rng, positive=positive, nonzero=positive)
                for _ in range(p - 1)))
            if positive:
                mid = [_rand_fraction(rng, lo=-2, hi=2) for _ in range(n - 1)]
                a = _rand_fraction(rng, positive=True)
                norm = sum(m * m for m in mid)
                b = norm / (2 * a) + _rand_fraction(rng, positive=True)
                vecs.append(tuple([a] + mid + [b]))
            else:
                vecs.append(tuple(_rand_fraction(rng, lo=-3, hi=3)
                                  for _ in range(n + 1)))
        return UnipCoord(self.family, (tuple(crows), tuple(vecs)))

    def _parabolic_generators(self):
        gens = [self.u_chain(j, self.backend.of(1)) for j in range(1, self.p)]
        gens.append(self.u_vec(self.w0))
        gens.append(self.u_vec(tuple(
            self.backend.of(2 if i == 0 else (1 if i == self.n else 0))
            for i in range(self.n + 1))))
        x = [2] + [1] * (self.p - 1)
        gens.append(self.levi_from_blocks(
            x, Mat.identity(self.n + 1, self.backend)).mat)
        return gens

    def _group_generators(self):
        import random
        rng = random.Random(7)
        gens = list(self._parabolic_generators())
        gens.append(self.random_levi(rng, in_l0=True).mat)
        gens.append(self.omega)
        return gens

    def coord_interpolate(self, coord, t):
        t = self.backend.of(t)
        one = self.backend.of(1)
        crows, vecs = coord.data
        crows = tuple(tuple(t * c + (one - t) for c in row) for row in crows)
        vecs = tuple(tuple(t * a + (one - t) * b for a, b in zip(v, self.w0))
                     for v in vecs)
        return UnipCoord(self.family, (crows, vecs))

    def levi_compact_target(self, l):
        x, y = l.blocks
        eps = 1 if self.positive(x[0]) else -1
        y0 = Mat.identity(self.n + 1, self.backend) if eps == 1 \
            else self._cone_swapper()
        return self.levi_from_blocks([eps] * self.p, y0)

    def levi_path(self, l, target, t):
        t = self.backend.of(t)
        one = self.backend.of(1)
        x, y = l.blocks
        x0, y0 = target.blocks
        xt = [t * a + (one - t) * b for a, b in zip(x, x0)]
        h = y0.inv() * y
        eye = Mat.identity(self.n + 1, self.backend)
        try:
            s = (h - eye) * (h + eye).inv()
        except SingularMatrix:
            raise FramedRepError("Cayley interpolation undefined for this "
                                 "Levi element (has eigenvalue -1)")
        yt = y0 * ((eye + t * s) * (eye - t * s).inv())
        return self.levi_from_blocks(xt, yt)


# ============================ factory and op wrappers =========================


def make_model(family, *args, backend=EXACT, levi_convention="adjoint"):
    """make_model("sl", n) / make_model("sp", n) / make_model("so", p, n)."""
    family = family.lower()
    if family == "sl":
        return SLModel(args[0], backend=backend, levi_convention=levi_convention)
    if family == "sp":
        return SPModel(args[0], backend=backend)
    if family == "so":
        return SOModel(args[0], args[1], backend=backend)
    raise ValueError("unknown family %r" % family)


def parse_model_spec(text, backend=EXACT, levi_convention="adjoint"):
    """Parse "sl:N", "sp:N" or "so:P,N" into a model."""
    try:
        fam, rest = text.split(":")
        nums = [int(x) for x in rest.split(",")]
    except ValueError:
        raise ValueError("bad model spec %r (want sl:N, sp:N or so:P,N)" % text)
    return make_model(fam, *nums, backend=backend, levi_convention=levi_convention)


def in_parabolic(model, g, sign):
    return model.in_parabolic(g, sign)


def in_levi(model, g):
    return model.in_levi(g)


def in_unipotent(model, g):
    return model.in_unipotent(g)


def u_to_mat(model, coord):
    return model.u_to_mat(coord)


def mat_to_coord(model, u):
    return model.mat_to_coord(u)


def is_positive_unipotent(model, u):
    return model.is_positive_unipotent(u)


def is_ustar(model, u):
    return model.is_ustar(u)


def u_theta(model):
    return model.u_theta()


def in_L0(model, l):
    return model.in_L0(l)


def levi_component_invariant(model, l):
    return model.levi_component_invariant(l)
