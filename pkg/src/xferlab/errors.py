"""Shared exception types."""


class XferlabError(Exception):
    pass


class ShapeMismatchError(XferlabError):
    """A layer chain or tensor shape does not line up."""


class NumericalFailureError(XferlabError):
    """A loss or gradient went non-finite."""

    def __init__(self, message, tensor_name=None):
        super().__init__(message)
        self.tensor_name = tensor_name


class StateCorruptionError(XferlabError):
    """Optimizer state does not match its parameters."""


class ConfigError(XferlabError):
    """Invalid configuration key, value, or variant id."""


class ContractViolation(XferlabError):
    """Caller broke a documented precondition."""


class CorruptCheckpointError(XferlabError):
    """Checkpoint file has a bad magic, version, or is truncated."""
