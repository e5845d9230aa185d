"""Exception types shared across the simulator."""


class SimulatorError(Exception):
    """Base class for every error raised by this package."""


class ConfigurationError(SimulatorError, ValueError):
    """A parameter set or layout request is structurally invalid."""


class DomainError(SimulatorError, ValueError):
    """An argument lies outside the domain an operation is defined on."""


class ValidationError(SimulatorError, ValueError):
    """A data structure violates its encoding invariant."""


class LoadError(SimulatorError, ValueError):
    """A document (layout or scenario file) could not be parsed.

    Carries the 1-based line/column of the first offending character when
    the failure is positional.
    """

    def __init__(self, message: str, line: int | None = None, column: int | None = None):
        if line is not None and column is not None:
            message = f"{message} (line {line}, column {column})"
        elif line is not None:
            message = f"{message} (line {line})"
        super().__init__(message)
        self.line = line
        self.column = column
