"""Exception types shared across the toolchain."""


class RtlmarkError(Exception):
    """Base class for all toolchain errors."""


class ParseError(RtlmarkError):
    """Input is outside the supported Verilog subset or malformed.

    Carries enough position information to print a "file:line:col: message"
    diagnostic. A document that fails to parse cannot be watermarked and must
    be reported, never silently skipped.
    """

    def __init__(self, message: str, line: int, col: int, origin: str = "<input>"):
        super().__init__(f"{origin}:{line}:{col}: {message}")
        self.message = message
        self.line = line
        self.col = col
        self.origin = origin


class SiteStale(RtlmarkError):
    """A transform site's node-path no longer resolves in the current AST."""


class InsufficientCapacity(RtlmarkError):
    """No transformation plan can reach the requested detection confidence."""

    def __init__(self, achieved: float, applicable: int = 0):
        super().__init__(
            f"cannot reach confidence threshold; best achievable is {achieved:.4f}"
        )
        self.achieved = achieved
        self.applicable = applicable


class PayloadTooLarge(RtlmarkError):
    """Encoded payload exceeds the configured guarded-constant capacity."""


class BadFraming(RtlmarkError):
    """Payload bytes fail the keyed checksum (wrong key or corrupted data)."""


class UnsupportedConstruct(RtlmarkError):
    """The module uses a construct outside the simulatable subset."""


class EmptyCorpus(RtlmarkError):
    """Calibration requires at least one corpus file."""


class ToolMissing(RtlmarkError):
    """The configured external synthesis tool is not on PATH."""


class ToolFailed(RtlmarkError):
    """The external synthesis tool exited nonzero."""

    def __init__(self, exit_code: int, stderr_excerpt: str):
        super().__init__(f"synthesis tool failed (exit {exit_code}): {stderr_excerpt}")
        self.exit_code = exit_code
        self.stderr_excerpt = stderr_excerpt


class ToolTimeout(RtlmarkError):
    """The external synthesis tool exceeded its time budget."""
