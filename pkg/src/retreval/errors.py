"""Exception hierarchy shared across the package."""

from __future__ import annotations


class RetrevalError(Exception):
    """Base class for every error raised by this package."""


class InvalidArgument(RetrevalError, ValueError):
    pass


class NotFound(RetrevalError, KeyError):
    pass


class InvalidState(RetrevalError, RuntimeError):
    pass


class ProviderError(RetrevalError):
    """A chat backend rejected or failed a request."""


class TransportFailure(ProviderError):
    """Retryable connection-level failure (refused, reset, 5xx)."""


class ProviderUnavailable(ProviderError):
    """Transport kept failing after every retry."""


class ProviderTimeout(ProviderError):
    pass


class DatasetError(RetrevalError, ValueError):
    pass
