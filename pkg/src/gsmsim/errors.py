"""Exception hierarchy for the simulator."""


class GsmSimError(Exception):
    """Base class for all errors raised by :mod:`gsmsim`."""


class ConfigurationError(GsmSimError, ValueError):
    """An invalid configuration value.

    ``field`` names the offending key so the CLI can point at it.
    """

    def __init__(self, field, message, line=None):
        self.field = field
        self.line = line
        where = f" (line {line})" if line is not None else ""
        super().__init__(f"{field}{where}: {message}")


class GeometryError(GsmSimError, ValueError):
    pass


class ProtocolError(GsmSimError, ValueError):
    pass


class ModelingError(GsmSimError, ValueError):
    """The lifetime program cannot be built for the given deployment."""

    def __init__(self, message, node_id=None):
        self.node_id = node_id
        super().__init__(message)


class SolverError(GsmSimError, ArithmeticError):
    pass
