class PgclError(Exception):
    """Base class for every error raised by the package."""


class ParseError(PgclError):
    def __init__(self, message: str, line: int = 0, col: int = 0):
        self.message = message
        self.line = line
        self.col = col
        super().__init__(f"{line}:{col}: {message}")


class SemanticError(PgclError):
    """Evaluation failed: probability out of range, value outside a domain,
    empty demonic set at a reachable state."""


class SpaceMismatch(PgclError, ValueError):
    pass


class UnsupportedProgram(PgclError):
    """The requested analysis does not handle this program (e.g. loops in
    the forward oracle)."""


class VCGError(PgclError):
    pass


class SpecRejected(VCGError):
    """A user specification failed its own verification."""
