"""Exception types shared across lnslab."""


class LnsError(Exception):
    """Base class for all lnslab errors."""


class DomainError(LnsError, ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class CapacityError(LnsError):
    """A format or table is too large to enumerate."""


class DivideByZero(LnsError, ZeroDivisionError):
    pass


class RangeError(LnsError, IndexError):
    pass


class UnknownDecoder(LnsError, KeyError):
    """The ROM cost model has no calibrated cost for a decoder size."""

    def __init__(self, address_bits: int):
        self.address_bits = address_bits
        super().__init__(address_bits)

    def __str__(self) -> str:
        n = self.address_bits
        return f"no calibrated cost for a {n}->{2 ** n} decoder"


class ParseError(LnsError, ValueError):
    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
