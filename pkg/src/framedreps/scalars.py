"""Scalar backends: exact rationals and tolerance-based floats.

Every matrix carries a backend; the backend owns coercion, zero tests and
equality. All correctness-critical code runs on the exact backend, the float
backend exists for cheap numeric sampling.
"""

from fractions import Fraction

from .errors import ParseError

DEFAULT_TOL = 1e-9


class ExactBackend:
    name = "exact"
    exact = True

    def of(self, x):
        if isinstance(x, Fraction):
            return x
        if isinstance(x, int):
            return Fraction(x)
        if isinstance(x, str):
            return parse_rational(x)
        if isinstance(x, float):
            return Fraction(x)
        raise TypeError("cannot coerce %r to an exact scalar" % (x,))

    def is_zero(self, x):
        return x == 0

    def eq(self, a, b):
        return a == b

    def str_of(self, x):
        return format_rational(x)

    def __repr__(self):
        return "ExactBackend()"


class FloatBackend:
    name = "float"
    exact = False

    def __init__(self, tol=DEFAULT_TOL):
        self.tol = tol

    def of(self, x):
        if isinstance(x, str):
            return float(parse_rational(x))
        return float(x)

    def is_zero(self, x):
        return abs(x) <= self.tol

    def eq(self, a, b):
        return abs(a - b) <= self.tol

    def str_of(self, x):
        return repr(x)

    def __repr__(self):
        return "FloatBackend(tol=%g)" % self.tol


EXACT = ExactBackend()
FLOAT = FloatBackend()


def parse_rational(text):
    """Parse "p/q" or an integer/decimal literal into a Fraction."""
    text = text.strip()
    try:
        if "/" in text:
            num, den = text.split("/")
            return Fraction(int(num), int(den))
        return Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise ParseError("bad rational %r" % text)


def format_rational(x):
    """Canonical form p/q with q > 0 and gcd(p, q) = 1; integers print bare."""
    x = Fraction(x)
    if x.denominator == 1:
        return str(x.numerator)
    return "%d/%d" % (x.numerator, x.denominator)


def backend_by_name(name, tol=DEFAULT_TOL):
    if name == "exact":
        return EXACT
    if name == "float":
        return FloatBackend(tol)
    raise ValueError("unknown backend %r" % name)
