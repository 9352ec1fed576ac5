"""Exception hierarchy shared by the library and the CLI."""


class EvtError(Exception):
    """Base class for all errors raised by evtrisk."""


class DataError(EvtError, ValueError):
    """Input data is malformed or violates a series invariant.

    ``line`` is the 1-based line number in the source file when known.
    """

    def __init__(self, message, *, line=None, path=None):
        self.line = line
        self.path = path
        prefix = ""
        if path is not None:
            prefix += f"{path}: "
        if line is not None:
            prefix += f"line {line}: "
        super().__init__(prefix + message)


class DegenerateDataError(EvtError, ValueError):
    """Sample has zero spread, so moments or a GEV fit are undefined."""


class TooFewMaximaError(EvtError, ValueError):
    """Not enough block maxima to fit the distribution."""


class ConvergenceError(EvtError, RuntimeError):
    """An optimisation failed to produce a finite, feasible optimum."""
