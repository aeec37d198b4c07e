"""Exception hierarchy shared by all modules."""


class HolotorsionError(Exception):
    """Base class for domain errors (reported with exit code 1 by the CLI)."""


class DimensionMismatch(HolotorsionError, ValueError):
    pass


class ParseError(HolotorsionError, ValueError):
    """Syntax error in a literal, algebra file, matrix file or surface text.

    ``position`` is a 0-based character offset (or None), ``line`` a 1-based
    line number for multi-line inputs (or None).
    """

    def __init__(self, message, position=None, line=None):
        self.message = message
        self.position = position
        self.line = line
        where = []
        if line is not None:
            where.append(f"line {line}")
        if position is not None:
            where.append(f"position {position}")
        suffix = f" ({', '.join(where)})" if where else ""
        super().__init__(message + suffix)


class SingularMatrixError(HolotorsionError, ValueError):
    pass


class JacobiError(HolotorsionError, ValueError):
    """Structure equations with d(de^i) != 0 for some generator."""

    def __init__(self, index, residue):
        self.index = index
        self.residue = residue
        super().__init__(f"d(de^{index}) = {residue} is not zero: Jacobi identity fails at e^{index}")


class NotNilpotentError(HolotorsionError, ValueError):
    pass


class InvalidStructureError(HolotorsionError, ValueError):
    """An almost Hermitian / G2 input violates its defining invariants."""


class ConventionError(HolotorsionError, RuntimeError):
    """Two independently computed routes disagree; indicates a sign bug."""


class DegenerateMetricError(HolotorsionError, ValueError):
    def __init__(self, u, v, det):
        self.point = (u, v)
        self.det = det
        super().__init__(f"degenerate first fundamental form at (u, v) = ({u!r}, {v!r}): EG - F^2 = {det!r}")
