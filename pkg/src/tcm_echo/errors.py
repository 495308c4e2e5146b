"""Exception hierarchy shared by every solver and the command line."""


class TcmError(Exception):
    """Base class. ``exit_code`` is what the CLI returns when this escapes."""

    exit_code = 1
    kind = "error"

    def __init__(self, message: str, **context):
        super().__init__(message)
        self.context = context

    def to_dict(self) -> dict:
        return {"error": self.kind, "message": str(self), "context": {k: repr(v) for k, v in self.context.items()}}


class ParameterDomainError(TcmError, ValueError):
    kind = "parameter-domain"


class TruncationError(TcmError):
    kind = "truncation"


class CapabilityError(TcmError):
    kind = "capability"


class DiagonalizationError(TcmError):
    kind = "numerical-diagonalization"


class OracleError(TcmError):
    kind = "oracle"


class ResolutionError(TcmError):
    kind = "resolution"


class FitError(TcmError):
    kind = "fit"


class ScanError(TcmError):
    kind = "scan"


class UsageError(TcmError):
    exit_code = 2
    kind = "usage"
