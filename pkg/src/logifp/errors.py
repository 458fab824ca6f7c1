"""Exception hierarchy shared by every module."""


class LogifpError(Exception):
    """Base class for all toolkit errors."""


# --- structures ---

class ZeroDomain(LogifpError):
    pass


class OutOfRange(LogifpError):
    pass


class ArityMismatch(LogifpError):
    pass


class SignatureMismatch(LogifpError):
    pass


class EmptyString(LogifpError):
    pass


class BadCharacter(LogifpError):
    pass


class ZeroArgument(LogifpError):
    pass


# --- formulas ---

class FormulaSyntaxError(LogifpError):
    def __init__(self, position, expected, found=None):
        self.position = position
        self.expected = expected
        self.found = found
        msg = f"at position {position}: expected {expected}"
        if found is not None:
            msg += f", found {found!r}"
        super().__init__(msg)


class UnknownRelation(LogifpError):
    pass


class OrderUsedUnordered(LogifpError):
    pass


class IfpShapeError(LogifpError):
    pass


class UnboundVariable(LogifpError):
    pass


# --- evaluation ---

class NotPrenex(LogifpError):
    pass


class UnsupportedShape(LogifpError):
    pass


# --- encodings ---

class Overflow(LogifpError):
    pass


class Unordered(LogifpError):
    pass


class DomainTooSmall(LogifpError):
    pass


class ParseError(LogifpError):
    pass


class NotChunkAligned(LogifpError):
    pass


class TooManyChunks(LogifpError):
    pass


# --- interpretations ---

class EmptyUniverse(LogifpError):
    pass


class NotLinearOrder(LogifpError):
    pass


class LogQuantifierUnsupported(LogifpError):
    pass


class ArityOverflow(LogifpError):
    pass


class UnsupportedTerm(LogifpError):
    pass


# --- games ---

class ShapeMismatch(LogifpError):
    pass


class ResourceLimit(LogifpError):
    pass


class HypothesisViolated(LogifpError):
    pass
