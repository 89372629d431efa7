"""Exception types shared across the package."""


class FramedRepError(Exception):
    """Base class for all library errors."""


class SingularCell(FramedRepError):
    """The element is outside the open cell U+ . omega . P+ (a pivot vanished)."""


class SingularMatrix(FramedRepError):
    pass


class ModelMismatch(FramedRepError):
    pass


class NotInGroup(FramedRepError):
    pass


class NotUnipotent(FramedRepError):
    pass


class CoordinateChartError(NotUnipotent):
    """The element is in U+ but outside the full-measure coordinate chart."""


class NotInLevi(FramedRepError):
    pass


class NotTransverse(FramedRepError):
    def __init__(self, message, witness=None):
        super().__init__(message)
        self.witness = witness


class NotInUstar(FramedRepError):
    pass


class ConventionFailure(FramedRepError):
    """Construction self-test of a group model failed."""


class InvalidTriangulation(FramedRepError):
    pass


class UnsupportedSurface(FramedRepError):
    pass


class NotFlippable(FramedRepError):
    pass


class NotAPath(FramedRepError):
    pass


class NotInvariant(FramedRepError):
    def __init__(self, message, witness=None):
        super().__init__(message)
        self.witness = witness


class IncompatibleFraming(FramedRepError):
    def __init__(self, message, witness=None):
        super().__init__(message)
        self.witness = witness


class RegimeViolation(FramedRepError):
    pass


class InternalInconsistency(FramedRepError):
    """A postcondition of the construction failed; indicates a bug, never user data."""


class NotNormalizer(FramedRepError):
    pass


class ParseError(FramedRepError):
    def __init__(self, message, line=None):
        if line is not None:
            message = "line %d: %s" % (line, message)
        super().__init__(message)
        self.line = line
