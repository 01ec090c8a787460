"""Shared exception types."""


class ConfigError(ValueError):
    """Invalid configuration or operation parameters."""


class PreconditionError(ValueError):
    """An operation's stated precondition is violated."""


class NumericsError(RuntimeError):
    """An iteration failed to converge or a numerical check failed."""

    def __init__(self, message, history=None):
        super().__init__(message)
        self.history = history if history is not None else []
