"""Exception types shared across the package."""


class DimensionError(ValueError):
    """Operand sizes do not agree."""


class MatrixMarketError(ValueError):
    """Malformed Matrix Market input."""

    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class FactorizationError(ArithmeticError):
    """Incomplete factorization hit a zero pivot."""

    def __init__(self, message, row):
        self.row = row
        super().__init__(message)


class BreakdownError(FactorizationError):
    """Incomplete Cholesky met a nonpositive pivot; the factor is unusable."""


class IndefiniteError(ArithmeticError):
    """PCG observed a nonpositive curvature or preconditioned residual product."""

    def __init__(self, message, iteration):
        self.iteration = iteration
        super().__init__(message)


class SetupError(RuntimeError):
    """AMG setup could not build a valid level."""


class CertificateViolation(AssertionError):
    """A spectral inequality that should hold under its hypotheses failed."""
