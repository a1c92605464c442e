"""Exception hierarchy for netscale.

Every error raised on purpose by the package derives from NetscaleError so
callers (and the CLI) can map failures to exit codes in one place.
"""

from __future__ import annotations

from typing import TYPE_CHECKING, Dict, List, Optional

if TYPE_CHECKING:
    from netscale.core.types import ItemPool, ValidationReport


class NetscaleError(Exception):
    """Base class for all netscale errors."""


class InputError(NetscaleError, ValueError):
    """Invalid arguments or data supplied by the caller."""


class SchemaError(InputError):
    """A tabular input is missing required structure."""


class PoolValidationError(InputError):
    """An item pool failed validation; carries the full report."""

    def __init__(self, report: "ValidationReport"):
        self.report = report
        super().__init__(
            f"item pool failed validation with {len(report.violations)} violation(s): "
            + "; ".join(v.message for v in report.violations[:5])
        )


class PoolIOError(NetscaleError, OSError):
    """An input file could not be read."""


class DegenerateInputError(InputError):
    """Numeric input has no usable variation."""

    def __init__(self, message: str, item_id: Optional[str] = None):
        self.item_id = item_id
        super().__init__(message)


class NetworkSizeError(InputError):
    """The requested network method cannot handle this many variables."""


class EstimationError(NetscaleError, RuntimeError):
    """Network estimation did not converge."""

    def __init__(self, message: str, lambda_index: Optional[int] = None):
        self.lambda_index = lambda_index
        super().__init__(message)


class ParseError(NetscaleError):
    """A model response contained no parsable item lines."""

    def __init__(self, message: str, skipped: int = 0):
        self.skipped = skipped
        super().__init__(message)


class GenerationError(NetscaleError):
    """Item generation ran out of retries before reaching the target."""

    def __init__(
        self,
        message: str,
        shortfall: Dict[str, int],
        partial: Optional["ItemPool"] = None,
    ):
        self.shortfall = shortfall
        self.partial = partial
        super().__init__(message)


class ProviderError(NetscaleError):
    """Failure talking to an LLM provider."""

    def __init__(self, message: str, provider: Optional[str] = None, status: Optional[int] = None):
        self.provider = provider
        self.status = status
        super().__init__(message)


class ConfigurationError(ProviderError):
    """Authentication failed, a key is missing, or the provider lacks a capability."""


class RateLimitError(ProviderError):
    """The provider kept rate-limiting after the retry budget was spent."""


class ProtocolError(ProviderError):
    """The provider returned a payload we could not interpret."""

    def __init__(
        self,
        message: str,
        raw_body: str = "",
        provider: Optional[str] = None,
        status: Optional[int] = None,
    ):
        self.raw_body = raw_body
        super().__init__(message, provider=provider, status=status)


class OfflineViolation(NetscaleError):
    """A network connection was attempted while offline mode was active."""


__all__: List[str] = [
    "NetscaleError",
    "InputError",
    "SchemaError",
    "PoolValidationError",
    "PoolIOError",
    "DegenerateInputError",
    "NetworkSizeError",
    "EstimationError",
    "ParseError",
    "GenerationError",
    "ProviderError",
    "ConfigurationError",
    "RateLimitError",
    "ProtocolError",
    "OfflineViolation",
]
