"""Exception types shared across the package."""


class DomainError(ValueError):
    """A value does not belong to the space or violates an operation's precondition."""


class ResourceError(RuntimeError):
    """An enumeration or cover would exceed its configured size cap."""


class ConfigurationError(ValueError):
    """A strategy was configured for a regime it does not support."""


class ProtocolViolation(RuntimeError):
    """A responder broke the consistency obligation (empty or inconsistent witness)."""
