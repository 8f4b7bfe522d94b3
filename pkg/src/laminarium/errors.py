"""Exception hierarchy shared by every laminarium module."""


class LaminariumError(Exception):
    """Base class for all library errors."""


class SymbolicSurface(LaminariumError):
    pass


class BoundExceeded(LaminariumError):
    pass


class PrecisionExhausted(LaminariumError):
    """A truncated partial-quotient stream ran out before the request was met."""


class InsufficientData(LaminariumError):
    pass


class DegenerateInput(LaminariumError):
    pass


class NonFinite(LaminariumError):
    pass


class MalformedTubeUnion(LaminariumError):
    pass


class NoPenetratingUnion(LaminariumError):
    pass


class NonAffineExponents(LaminariumError):
    pass


class UnknownVertex(LaminariumError):
    pass


class NumericalInstability(LaminariumError):
    pass


class CertificationFailed(LaminariumError):
    pass


class OptimizationFailed(LaminariumError):
    pass


class IrrationalLamination(LaminariumError):
    pass


class InsufficientSamples(LaminariumError):
    pass


class DegenerateTrace(LaminariumError):
    pass


class SingularSystem(LaminariumError):
    pass


class ParabolicOrElliptic(LaminariumError):
    pass


class DegenerateConfiguration(LaminariumError):
    pass


class EstimationFailed(LaminariumError):
    pass


class HypothesisViolation(LaminariumError):
    def __init__(self, clause, message):
        super().__init__(f"({clause}) {message}")
        self.clause = clause


class NoConvergenceCandidate(LaminariumError):
    pass


class ParseError(LaminariumError):
    def __init__(self, line, column, expected):
        super().__init__(f"line {line}, column {column}: {expected}")
        self.line = line
        self.column = column
        self.expected = expected


class SemanticError(LaminariumError):
    pass
