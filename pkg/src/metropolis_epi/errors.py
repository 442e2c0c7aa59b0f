"""Exception hierarchy shared by the sampler, diagnostics, and CLI."""


class MetropolisError(Exception):
    """Base class for all package errors."""


class ConfigError(MetropolisError):
    """Invalid configuration; ``key`` and ``line`` locate the offending entry."""

    def __init__(self, message, key=None, line=None):
        self.key = key
        self.line = line
        where = []
        if key is not None:
            where.append(f"key '{key}'")
        if line is not None:
            where.append(f"line {line}")
        prefix = f"{', '.join(where)}: " if where else ""
        super().__init__(prefix + message)


class DataError(MetropolisError):
    """Malformed input data; ``row`` is 1-based and counts the header."""

    def __init__(self, message, row=None):
        self.row = row
        super().__init__(f"row {row}: {message}" if row is not None else message)


class NumericalError(MetropolisError):
    pass


class SeparationError(NumericalError):
    """A zero cell in a 2x2 table; the logistic MLE does not exist."""

    def __init__(self, cell):
        self.cell = cell
        super().__init__(f"zero count in cell '{cell}': maximum likelihood estimate diverges")


class CalibrationRangeError(NumericalError):
    def __init__(self, message, index=None):
        self.index = index
        super().__init__(f"draw {index}: {message}" if index is not None else message)


class DegenerateSeriesError(NumericalError):
    """Series with zero variance; autocorrelation is undefined."""
