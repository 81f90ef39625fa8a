"""Exception types shared across the package."""


class LevycrossError(Exception):
    """Base class for all package errors."""


class DomainError(LevycrossError, ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class RangeError(LevycrossError, ValueError):
    """A requested value lies outside the solvable/bracketable range."""


class NumericalError(LevycrossError, ArithmeticError):
    """Quadrature or other numerical routine failed to converge."""


class SolverError(LevycrossError, ArithmeticError):
    """Root finder or fixed-point iteration failed; carries a trace."""

    def __init__(self, message: str, trace=None):
        super().__init__(message)
        self.trace = list(trace) if trace is not None else []


class ContractError(LevycrossError, ValueError):
    """A call violates an operation precondition."""


class SizeError(LevycrossError, ValueError):
    """An enumeration request exceeds the supported state-space size."""


class ConfigError(LevycrossError, ValueError):
    """A configuration file failed to parse or validate."""

    def __init__(self, message: str, key: str | None = None, line: int | None = None):
        loc = []
        if key is not None:
            loc.append(f"key={key!r}")
        if line is not None:
            loc.append(f"line={line}")
        if loc:
            message = f"{message} ({', '.join(loc)})"
        super().__init__(message)
        self.key = key
        self.line = line
