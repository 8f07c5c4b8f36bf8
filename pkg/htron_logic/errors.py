import typing


class HtronError(ValueError):
    """Base class for all errors raised by the toolchain."""


class ConfigurationError(HtronError):
    pass


class TimestepError(ConfigurationError):
    pass


class CalibrationError(HtronError):
    pass


class CsvFormatError(HtronError):
    """A CSV input that cannot be read as the expected table."""


class UnsupportedOperatingPointError(HtronError):
    pass


class SampleRangeError(HtronError):
    pass


class StimulusError(HtronError):
    pass


class ResetViolationError(HtronError):
    pass


class NoFeasibleBiasError(HtronError):
    pass


class TooManyInputsError(HtronError):
    pass


class EquivalenceError(HtronError):
    pass


class LocatedError(HtronError):
    """An error that can point at a line and column of its source text."""

    def __init__(
        self,
        message: str,
        line: typing.Optional[int] = None,
        column: typing.Optional[int] = None,
    ):
        self.message = message
        self.line = line
        self.column = column
        super().__init__(str(self))

    def __str__(self) -> str:
        if self.line is None:
            return self.message
        if self.column is None:
            return f"line {self.line}: {self.message}"
        return f"line {self.line}, column {self.column}: {self.message}"


class NetlistError(LocatedError):
    pass


class ExpressionError(LocatedError):
    pass


# errors that are a property of the inputs' meaning rather than their form
DOMAIN_ERRORS = (
    CalibrationError,
    UnsupportedOperatingPointError,
    SampleRangeError,
    ResetViolationError,
    NoFeasibleBiasError,
    TooManyInputsError,
    EquivalenceError,
)
