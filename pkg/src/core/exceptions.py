"""Errors raised by the factorization, search and I/O layers."""


class MaxVolError(Exception):
    """Base class for every error raised by this package."""


class MatrixFormatError(MaxVolError, ValueError):
    """Input is not a finite, two-dimensional real matrix (or not a readable file)."""


class SelectionError(MaxVolError, IndexError):
    """A selection holds out-of-range or repeated indices."""


class SingularTriangularError(MaxVolError, ZeroDivisionError):
    def __init__(self, index):
        self.index = index
        super().__init__(f"Triangular matrix has a zero diagonal entry at index {index}")


class RankDeficientError(MaxVolError):
    """A pivot (or a whole pivot block) is numerically singular."""

    def __init__(self, step, message=None):
        self.step = step
        super().__init__(message or f"Degenerate pivot encountered at step {step}")


class IterationCapError(MaxVolError):
    """The maxvol search accepted more swaps than allowed."""

    def __init__(self, cap, report=None):
        self.cap = cap
        self.report = report
        super().__init__(f"Search exceeded the cap of {cap} accepted swaps")


class SvdConvergenceError(MaxVolError):
    def __init__(self, sweeps):
        self.sweeps = sweeps
        super().__init__(f"SVD did not converge within {sweeps} sweeps")


class SizeGuardError(MaxVolError):
    """Brute-force enumeration would visit too many submatrices."""

    def __init__(self, count, limit):
        self.count = count
        self.limit = limit
        super().__init__(f"Enumeration of {count} submatrices exceeds the limit of {limit}")
