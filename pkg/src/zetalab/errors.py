"""Exception types shared across the laboratory modules."""


class DomainError(ValueError):
    """Input lies outside the mathematical domain of an operation."""


class PoleError(DomainError):
    """Evaluation requested exactly at a pole."""


class BranchCutError(DomainError):
    """Evaluation requested on a branch cut."""


class AdmissibilityError(DomainError):
    """Moment order outside the admissible region Re(k) > -3."""


class CapabilityError(ValueError):
    """Request is valid mathematically but outside this implementation's supported range."""


class DegenerateSampleError(RuntimeError):
    """A random sample hit a measure-zero degenerate configuration (e.g. coincident eigenangles)."""


class MissingZeroError(RuntimeError):
    """Zero scan count could not be reconciled with the theta-based count."""

    def __init__(self, message, interval=None):
        super().__init__(message)
        self.interval = interval


class ZeroTableParseError(ValueError):
    """Malformed or non-monotone zero table file."""

    def __init__(self, message, line_number=None):
        super().__init__(message)
        self.line_number = line_number


class EmptyOverlapError(ValueError):
    """Two zero lists have no common height range to compare."""


class IncompleteCoefficientsError(KeyError):
    """A Toeplitz determinant needs symbol frequencies that were not built."""
