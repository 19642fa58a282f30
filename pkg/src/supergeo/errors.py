"""Exception types shared across the package."""


class SupergeoError(Exception):
    """Base class for all errors raised by supergeo."""


class PoolMismatch(SupergeoError):
    """Operands live over different generator pools."""


class ChartMismatch(SupergeoError):
    """Operands live over different charts."""


class UnknownGenerator(SupergeoError):
    """A name does not refer to a generator of the pool."""


class NonInvertible(SupergeoError):
    """Superfunction has zero body and admits no inverse."""


class NotASquare(SupergeoError):
    """The body is not an exact square in the rational-function field."""


class FleshInTopCoefficient(SupergeoError):
    """Berezin extraction hit a top coefficient containing flesh generators."""


class NonInvertibleBlock(SupergeoError):
    """The odd-odd block of a supermatrix has a singular body."""


class InhomogeneousMatrix(SupergeoError):
    """Supermatrix entries do not share a single parity pattern."""


class MetricViolation(SupergeoError):
    """A bilinear form failed one of the supermetric axioms.

    The first argument names the violated axiom: 'evenness',
    'supersymmetry' or 'nondegeneracy'.
    """

    @property
    def violation(self):
        return self.args[0] if self.args else "unknown"


class UnsupportedMetric(SupergeoError):
    """The Killing solver requires polynomial metric components."""


class NonPolynomialIntegrand(SupergeoError):
    """Box integration requires polynomial even parts."""


class ParityError(SupergeoError):
    """An object does not have the homogeneous parity an operation needs."""


class ParseError(SupergeoError):
    """Expression or scenario text could not be parsed."""

    def __init__(self, message, line=None, column=None):
        self.message = message
        self.line = line
        self.column = column
        where = ""
        if line is not None:
            where = f" at line {line}" + (f", column {column}" if column is not None else "")
        super().__init__(message + where)


class ScenarioError(SupergeoError):
    """Scenario file is structurally invalid (unknown names, bad sections)."""
