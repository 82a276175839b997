"""Exception hierarchy shared across the package."""


class DDSimError(Exception):
    """Base class for all package errors."""


class DimensionError(DDSimError, ValueError):
    """Operands act on different numbers of qubits."""


class ParameterError(DDSimError, ValueError):
    """A model, group or protocol parameter is out of range."""


class DomainError(DDSimError, ValueError):
    """Input violates a mathematical precondition (e.g. non-Hermitian)."""


class BranchAmbiguityError(DomainError):
    """An eigenphase sits on the branch cut of the matrix logarithm."""


class ResourceError(DDSimError, RuntimeError):
    """A size cap (dense dimension, enumeration count) would be exceeded."""


class ConfigError(DDSimError, ValueError):
    """An experiment or schedule configuration is invalid.

    ``field`` carries the dotted path of the offending entry when known.
    """

    def __init__(self, message, field=None):
        self.field = field
        super().__init__(f"{field}: {message}" if field else message)
