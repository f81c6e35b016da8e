"""Exception types shared across the package."""


class PdmpError(Exception):
    """Base class for every error raised by this package."""


class DomainError(PdmpError):
    """A state lies outside the model's open state space."""


class HorizonError(PdmpError):
    """A time argument lies outside [0, exit_time(state)]."""


class ConfigurationError(PdmpError):
    """Inconsistent or unusable configuration (windows, envelopes, regions, bandwidths)."""


class NumericalError(PdmpError):
    """A numerical routine could not reach the requested tolerance.

    The tolerance actually achieved, when known, is attached as ``achieved``.
    """

    def __init__(self, message: str, achieved: float | None = None):
        if achieved is not None:
            message = f"{message} (achieved tolerance {achieved:.3e})"
        super().__init__(message)
        self.achieved = achieved


class SamplingError(PdmpError):
    """A rejection sampler exhausted its attempt budget."""


class EstimatorUndefinedError(PdmpError):
    """An empirical estimator has an empty denominator, so its value is undefined."""


class OracleUndefinedError(PdmpError):
    """A Monte Carlo reference has no qualifying samples."""


class InvariantError(PdmpError):
    """A runtime invariant check failed on simulated or supplied data."""


class ParseError(PdmpError):
    """A data file is malformed; carries the file path and 1-based line number."""

    def __init__(self, path, line: int, message: str):
        super().__init__(f"{path}:{line}: {message}")
        self.path = str(path)
        self.line = line
