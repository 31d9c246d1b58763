class CommevoError(Exception):
    """Base class for package errors."""


class InvalidIntervalError(CommevoError, ValueError):
    pass


class InvalidDataError(CommevoError, ValueError):
    pass


class OutOfOrderError(CommevoError, ValueError):
    """Requested correction order exceeds the commutator depth of the family."""


class UnsupportedBackendError(CommevoError, TypeError):
    """The backend lacks an operation required by the check (e.g. operator arithmetic)."""


class ModelError(CommevoError):
    """A backend violates a structural assumption such as centrality of its commutators."""


class ConfigError(CommevoError):
    pass
