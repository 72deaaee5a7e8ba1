"""Exception hierarchy shared by the engine, the DSL and the CLI."""


class QSeriesError(Exception):
    """Base class for every error raised by qmock."""


class ZeroSeries(QSeriesError, ZeroDivisionError):
    pass


class BeyondTruncation(QSeriesError, IndexError):
    pass


class NonIntegralUnitPower(QSeriesError, ValueError):
    pass


class NoStabilization(QSeriesError):
    pass


class PolePochhammer(QSeriesError, ZeroDivisionError):
    pass


class FormalDivergence(QSeriesError):
    pass


class DivergentFamily(QSeriesError):
    pass


class PoleAppellLerch(QSeriesError, ZeroDivisionError):
    pass


class PrecisionExhausted(QSeriesError):
    pass


class ZeroFactor(QSeriesError, ZeroDivisionError):
    pass


class RootClassMismatch(QSeriesError, ValueError):
    pass


class DSLError(QSeriesError):
    """Problem in identity-definition text; carries a source location."""

    def __init__(self, message, line=None, column=None):
        self.line = line
        self.column = column
        if line is not None:
            message = f"{message} (line {line}, column {column})"
        super().__init__(message)


class DSLSyntaxError(DSLError, SyntaxError):
    pass


class ArityError(DSLError, TypeError):
    pass


class UnboundVariable(DSLError, NameError):
    pass


class UnknownIdentity(QSeriesError, KeyError):
    def __str__(self):
        return f"unknown identity: {self.args[0]}"


class OutsideUnitDisk(QSeriesError, ValueError):
    pass
