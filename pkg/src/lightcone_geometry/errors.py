"""Exception hierarchy shared by the geometry kernels, the CLI and the MCP tools."""


class GeometryError(Exception):
    """Base geometry error."""


class SignatureMismatchError(GeometryError):
    """Raised when operands live in different metric signatures."""


class DegenerateSubspaceError(GeometryError):
    """Raised when a Gram matrix is degenerate and cannot be normalized."""

    def __init__(self, message: str = "degenerate subspace"):
        super().__init__(message)


class InvalidFrameError(GeometryError):
    """Raised when a frame violates its normalization relations."""

    def __init__(self, message: str = "invalid frame"):
        super().__init__(message)


class JetDomainError(GeometryError):
    """Raised when a jet function is evaluated at a singular constant term."""


class OrderExhaustedError(GeometryError):
    """Raised when a derivative beyond the jet order is requested."""

    def __init__(self, message: str = "order exhausted"):
        super().__init__(message)


class ChartError(GeometryError):
    """Base error for chart configuration and evaluation."""


class ChartSyntaxError(ChartError):
    """Raised when a chart expression or config cannot be parsed."""

    def __init__(self, message: str, line: int = 1, column: int = 1):
        self.line = line
        self.column = column
        self.reason = message
        super().__init__(f"line {line}, column {column}: {message}")


class ChartValidationError(ChartError):
    """Raised when a parsed chart violates its declared source or domain."""


class DomainError(ChartError):
    """Raised when a chart is evaluated outside its domain."""


class DegenerateConformalFactorError(GeometryError):
    """Raised when <x_u, x_v> vanishes and no canonical lift exists."""

    def __init__(self, message: str = "degenerate conformal factor"):
        super().__init__(message)


class UmbilicError(GeometryError):
    """Raised when umbilic points prevent a detector or construction."""

    def __init__(self, message: str, points=None):
        self.points = list(points or [])
        super().__init__(message)


class IsothermicTypeError(GeometryError):
    """Raised when adapted coordinates cannot be built."""


class PolarHyperplaneError(GeometryError):
    """Raised when a constant point is unusable for a trivial pair."""


class CausalTypeError(GeometryError):
    """Raised when a causal type is inconsistent with the data."""


class BranchMismatchError(GeometryError):
    """Raised when a recovered chart violates its space-form constraint."""

    def __init__(self, message: str = "branch mismatch"):
        super().__init__(message)


class PreconditionFailed(GeometryError):
    """Raised when a composite pipeline's entry gate is not satisfied."""

    def __init__(self, condition: str):
        self.condition = condition
        super().__init__(f"precondition failed: {condition}")
