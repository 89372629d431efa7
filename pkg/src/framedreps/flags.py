"""Flags, transversality, triple/quadruple normalization and the turn moves.

A flag is a coset g P+ stored through a representative matrix. Equality is
the exact coset test g1^-1 g2 in P+. Everything else reduces to the big-cell
factorization of the owning model.
"""

from .errors import (InternalInconsistency, ModelMismatch, NotInUstar,
                     NotTransverse, SingularCell, CoordinateChartError,
                     NotInGroup)
from .linalg import Mat, big_cell_factor
from .models import UnipCoord


class Flag:
    """A point of G/P+ held as a representative matrix in the group."""

    __slots__ = ("model", "rep")

    def __init__(self, model, rep):
        if rep.n != model.dim:
            raise ModelMismatch("flag representative has wrong dimension")
        self.model = model
        self.rep = rep

    @staticmethod
    def standard(model):
        return Flag(model, model.identity())

    @staticmethod
    def standard_opposite(model):
        return Flag(model, model.omega)

    def translate(self, g):
        return Flag(self.model, g * self.rep)

    def __eq__(self, other):
        if not isinstance(other, Flag) or other.model is not self.model:
            return NotImplemented
        return self.model.in_parabolic(self.rep.inv() * other.rep, "+")

    def canonical_form(self):
        """Canonical representative on the standard charts.

        The standard flag maps to the identity; flags transverse to P+ map to
        u*omega with u the unique unipotent coordinate. Off those charts the
        stored representative is returned unchanged (equality testing never
        relies on canonical forms).
        """
        model = self.model
        if model.in_parabolic(self.rep, "+"):
            return Flag(model, model.identity())
        try:
            u = unipotent_coordinate(self)
        except NotTransverse:
            return self
        return Flag(model, model.u_to_mat(u) * model.omega)

    def __repr__(self):
        return "Flag(%s, %r)" % (self.model.spec_string(), self.rep)


class TurnResult:
    """Transport of a turn move and the re-normalized triangle coordinate."""

    __slots__ = ("model", "transport", "new_u_mat")

    def __init__(self, model, transport, new_u_mat):
        self.model = model
        self.transport = transport
        self.new_u_mat = new_u_mat

    @property
    def new_u(self):
        return self.model.mat_to_coord(self.new_u_mat)


def _same_model(*flags):
    model = flags[0].model
    for f in flags[1:]:
        if f.model is not model:
            raise ModelMismatch("flags belong to different models")
    return model


def transverse(f1, f2):
    """True iff the pair can be moved to (P+, omega P+)."""
    model = _same_model(f1, f2)
    h = f1.rep.inv() * f2.rep
    return model.cell_pivots_ok(h * model.omega_inv)


def unipotent_coordinate(f):
    """The unique u in U+ with f = u omega P+, for f transverse to P+."""
    model = f.model
    try:
        fac = big_cell_factor(f.rep, model)
    except SingularCell:
        raise NotTransverse("flag is not transverse to the standard flag",
                            witness=f)
    return model.mat_to_coord(fac.u)


def _unipotent_coordinate_mat(model, rep):
    try:
        fac = big_cell_factor(rep, model)
    except SingularCell:
        raise NotTransverse("flag is not transverse to the standard flag")
    return fac.u


def normalize_triple(f1, f2, f3):
    """g with g(f1,f2,f3) = (P+, omega P+, u omega P+), u in U+_*.

    The returned g is the specific gauge produced by two successive big-cell
    factorizations; the full ambiguity is left multiplication by L.
    """
    model = _same_model(f1, f2, f3)
    g0 = f1.rep.inv()
    try:
        u2 = _unipotent_coordinate_mat(model, g0 * f2.rep)
    except NotTransverse:
        raise NotTransverse("flags 1 and 2 are not transverse", witness=(1, 2))
    g = u2.inv() * g0
    try:
        u = _unipotent_coordinate_mat(model, g * f3.rep)
    except NotTransverse:
        raise NotTransverse("flags 1 and 3 are not transverse", witness=(1, 3))
    if not model.is_ustar(u):
        raise NotTransverse("flags 2 and 3 are not transverse", witness=(2, 3))
    return g, model.mat_to_coord(u)


def normalize_quadruple(f1, f2, f3, f4):
    """g with g(f1,f2,f3,f4) = (P+, omega u' omega P+, omega P+, u omega P+).

    Also returns u'' with omega u' omega P+ = (u'')^-1 omega P+.
    """
    model = _same_model(f1, f2, f3, f4)
    g, u = normalize_triple(f1, f3, f4)
    try:
        uprime = _unipotent_coordinate_mat(
            model, model.omega_inv * g * f2.rep)
    except NotTransverse:
        raise NotTransverse("flags 2 and 3 are not transverse", witness=(2, 3))
    if not model.is_ustar(uprime):
        raise NotTransverse("flags 1 and 2 are not transverse", witness=(1, 2))
    v = _unipotent_coordinate_mat(
        model, model.omega * uprime * model.omega)
    usec = v.inv()
    return (g, u, model.mat_to_coord(uprime), model.mat_to_coord(usec))


def _tuple_increments(model, g, flags):
    """Unipotent increments u_1, u_2, ... of g-normalized flags 3, 4, ..."""
    increments = []
    prev = model.identity()
    for f in flags:
        v = _unipotent_coordinate_mat(model, g * f.rep)
        increments.append(prev.inv() * v)
        prev = v
    return increments


def is_positive_tuple(flags):
    """Positivity of a cyclically ordered k-tuple of flags, k >= 3.

    The normalizing gauge is only defined up to L, while positivity is an
    L0-notion; the finitely many sign components of L are searched before
    declaring the tuple non-positive.
    """
    if len(flags) < 3:
        raise ValueError("need at least three flags")
    model = _same_model(*flags)
    g, _ = normalize_triple(flags[0], flags[1], flags[2])
    increments = _tuple_increments(model, g, flags[2:])
    for ell in model.sign_gauge_candidates():
        ell_inv = ell.inv()
        ok = True
        for m in increments:
            conj = ell * m * ell_inv
            if not model.in_unipotent(conj):
                ok = False
                break
            if not model.is_positive_unipotent(conj):
                ok = False
                break
        if ok:
            return True
    return False


def turn_left(model, u):
    """Turn to the left in the triangle (P+, omega P+, u omega P+).

    Transport T_l = omega u^-1; the new coordinate is the u~ of
    omega u^-1 omega = u~ omega q. Defines the map L(u) = u~.
    """
    um = model.coerce_unipotent_mat(u)
    if not model.is_ustar(um):
        raise NotInUstar("turn moves need u in U+_*")
    try:
        new_u, _ = model.cell_factor(model.omega * um.inv())
    except SingularCell:
        raise NotInUstar("turn moves need u in U+_*")
    return TurnResult(model, model.omega * um.inv(), new_u)


def turn_right(model, u):
    """Turn to the right: omega u omega = u^^-1 omega q^, transport u^ omega."""
    um = model.coerce_unipotent_mat(u)
    if not model.is_ustar(um):
        raise NotInUstar("turn moves need u in U+_*")
    try:
        uhat_inv, _ = model.cell_factor(model.omega * um)
    except SingularCell:
        raise NotInUstar("turn moves need u in U+_*")
    uhat = uhat_inv.inv()
    return TurnResult(model, uhat * model.omega, uhat)


def turn_map_L(model, u):
    return turn_left(model, u).new_u_mat


def turn_map_R(model, u):
    return turn_right(model, u).new_u_mat


def cross_edge(model):
    """Transport across an internal triangulation edge."""
    return model.omega


def in_diamond(f, sign):
    """Membership in the standard positive (+) or negative (-) diamond."""
    model = f.model
    try:
        u = _unipotent_coordinate_mat(model, f.rep)
    except NotTransverse:
        return False
    if sign == "-":
        u = u.inv()
    try:
        return model.is_positive_unipotent(u)
    except CoordinateChartError:
        return False


class PowerVerdict:
    __slots__ = ("in_parabolic", "powers_agree", "in_levi", "normalizes")

    def __init__(self, in_parabolic, powers_agree=False, in_levi=False,
                 normalizes=False):
        self.in_parabolic = in_parabolic
        self.powers_agree = powers_agree
        self.in_levi = in_levi
        self.normalizes = normalizes

    def __bool__(self):
        return self.in_parabolic


def check_power_in_levi(model, u, k):
    """Whether (u omega)^k lands in P+, with the consequences re-verified.

    When it does, the verdict also records (u omega)^k = (omega u)^k,
    membership in L, and that conjugation by it fixes u.
    """
    um = model.coerce_unipotent_mat(u)
    m = (um * model.omega) ** k
    try:
        if not model.in_parabolic(m, "+"):
            return PowerVerdict(False)
    except NotInGroup:
        return PowerVerdict(False)
    m2 = (model.omega * um) ** k
    verdict = PowerVerdict(
        True,
        powers_agree=(m == m2),
        in_levi=model.in_levi(m),
        normalizes=(m * um * m.inv() == um),
    )
    if not (verdict.powers_agree and verdict.in_levi and verdict.normalizes):
        raise InternalInconsistency(
            "power landed in P+ but its Levi consequences failed")
    return verdict


def absorption_exponent(model, u, cap=64):
    """Least N <= cap with u_theta^N u and u u_theta^N both positive."""
    um = model.coerce_unipotent_mat(u)
    ut = model.u_theta()
    left = right = model.identity()
    for k in range(1, cap + 1):
        left = ut * left
        right = right * ut
        if (model.is_positive_unipotent(left * um)
                and model.is_positive_unipotent(um * right)):
            return k
    return None


def random_flag(model, rng):
    return Flag(model, model.random_group_element(rng))


def fixes_unique_flag(model, g, flag, trials, rng):
    """Randomized refutation that g fixes only the given flag."""
    if not (Flag(model, g * flag.rep) == flag):
        return False
    for _ in range(trials):
        f = random_flag(model, rng)
        if f == flag:
            continue
        if Flag(model, g * f.rep) == f:
            return False
    return True


def fixes_unique_standard_flag(model, k, s, trials=500, rng=None):
    """The element k u_theta^s fixes P+ and, as far as `trials` random
    challenge flags can tell, nothing else. k must normalize u_theta."""
    import random as _random
    rng = rng or _random.Random(20_000_521)
    kmat = k.mat if hasattr(k, "mat") else k
    ut = model.u_theta()
    if not (kmat * ut * kmat.inv() == ut):
        from .errors import NotNormalizer
        raise NotNormalizer("k does not normalize u_theta")
    g = kmat * (ut ** s)
    return fixes_unique_flag(model, g, Flag.standard(model), trials, rng)
