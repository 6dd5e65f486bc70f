"""Exception hierarchy.

Validation problems derive from ``ValidationError`` (CLI exit code 1), numerical
or runtime failures from ``SignconeRuntimeError`` (exit code 2).
"""


class SignconeError(Exception):
    pass


class ValidationError(SignconeError, ValueError):
    pass


class SignconeRuntimeError(SignconeError, RuntimeError):
    pass


# graph / spectral
class InvalidEdge(ValidationError):
    pass


class DisconnectedGraph(ValidationError):
    pass


class DimensionMismatch(ValidationError):
    pass


class BandOutOfRange(ValidationError):
    pass


class ConvergenceFailure(SignconeRuntimeError):
    pass


class GenerationFailure(SignconeRuntimeError):
    pass


class DegenerateDraw(SignconeRuntimeError):
    pass


# cone geometry
class NotPointedInput(SignconeRuntimeError):
    pass


class TooFewRays(SignconeRuntimeError):
    pass


class OracleTooLarge(ValidationError):
    pass


# sampling
class InvalidVertex(ValidationError):
    pass


class DuplicateVertex(ValidationError):
    pass


class NoUnsampledVertex(SignconeRuntimeError):
    pass


class BudgetTooSmall(ValidationError):
    pass


class BudgetTooLarge(ValidationError):
    pass


class ConeCollapsed(SignconeRuntimeError):
    pass


# reconstruction
class ZeroVector(ValidationError):
    pass


class EmptyList(ValidationError):
    pass


# harness
class ConfigInvalid(ValidationError):
    pass


class EmptyReport(ValidationError):
    pass
