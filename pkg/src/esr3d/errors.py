"""Exception types raised by esr3d."""


class ESRError(Exception):
    """Base class for all esr3d errors."""


class DimensionMismatch(ESRError, ValueError):
    pass


class NonFiniteValue(ESRError, ValueError):
    pass


class InvalidPartition(ESRError, ValueError):
    pass


class PartitionMismatch(ESRError, ValueError):
    pass


class NonSquareReversal(ESRError, ValueError):
    """A transposed (direction-reversed) candidate cannot match the reference partitions."""


class GridTooSmall(ESRError, ValueError):
    pass


class DegenerateSurface(ESRError, ArithmeticError):
    pass


class ParseError(ESRError, ValueError):
    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class UnknownCase(ESRError, KeyError):
    def __str__(self):
        return str(self.args[0]) if self.args else "unknown case"
