"""Exception hierarchy.

Every error carries a machine-readable ``code`` that the CLI writes into
reports, so failures can be filtered without parsing messages.
"""


class LsiCertError(Exception):
    code = "ERROR"


class InvalidWeights(LsiCertError, ValueError):
    code = "INVALID_WEIGHTS"


class NotSymmetric(LsiCertError):
    code = "NOT_SYMMETRIC"


class NotPositiveDefinite(LsiCertError):
    code = "NOT_POSITIVE_DEFINITE"


class DimensionMismatch(LsiCertError):
    code = "DIMENSION_MISMATCH"


class EmptyGrid(LsiCertError):
    code = "EMPTY_GRID"


class NonFiniteHamiltonian(LsiCertError):
    code = "NON_FINITE_HAMILTONIAN"


class SizeLimitExceeded(LsiCertError):
    code = "SIZE_LIMIT_EXCEEDED"


class IndexOutOfRange(LsiCertError):
    code = "INDEX_OUT_OF_RANGE"


class PointNotOnGrid(LsiCertError):
    code = "POINT_NOT_ON_GRID"


class VariantMismatch(LsiCertError):
    code = "VARIANT_MISMATCH"


class SupportMismatch(LsiCertError):
    code = "SUPPORT_MISMATCH"


class InvalidDensity(LsiCertError):
    code = "INVALID_DENSITY"


class NonPSDIntermediate(LsiCertError):
    code = "NON_PSD_INTERMEDIATE"


class InfeasibleMarginals(LsiCertError):
    code = "INFEASIBLE_MARGINALS"


class PartialsUnavailable(LsiCertError):
    code = "PARTIALS_UNAVAILABLE"


class DegenerateSpec(LsiCertError):
    code = "DEGENERATE_SPEC"


class DeltaOutOfRange(LsiCertError):
    code = "DELTA_OUT_OF_RANGE"


class ZeroDistance(LsiCertError):
    code = "ZERO_DISTANCE"


class NotCertified(LsiCertError):
    code = "NOT_CERTIFIED"


class NonPositiveConvexity(LsiCertError):
    code = "NON_POSITIVE_CONVEXITY"


class InvariantViolation(LsiCertError):
    code = "INVARIANT_VIOLATION"


class ExprSyntaxError(LsiCertError):
    code = "SYNTAX_ERROR"

    def __init__(self, message, position=None):
        super().__init__(message if position is None else f"{message} (at column {position + 1})")
        self.position = position


class UnknownVariable(ExprSyntaxError):
    code = "UNKNOWN_VARIABLE"


class UnknownFunction(ExprSyntaxError):
    code = "UNKNOWN_FUNCTION"


class ConfigError(LsiCertError):
    """Configuration problems, each located as ``(line, column, message)``."""

    code = "CONFIG_ERROR"

    def __init__(self, errors):
        self.errors = list(errors)
        super().__init__("; ".join(f"line {ln}, column {col}: {msg}" for ln, col, msg in self.errors))


class UnknownKey(ConfigError):
    code = "UNKNOWN_KEY"


class MissingRequired(ConfigError):
    code = "MISSING_REQUIRED"


class ConfigSyntaxError(ConfigError):
    code = "SYNTAX_ERROR"
