"""Exception hierarchy shared by all pcc modules."""


class PccError(Exception):
    """Base class for every error raised by pcc."""


class ShapeError(PccError, ValueError):
    """Array dimensions do not match what an operation requires."""


class DomainError(PccError, ValueError):
    """A scalar argument lies outside its admissible range."""


class PreconditionError(PccError, ValueError):
    """Input violates an operation's precondition (empty data, short class...)."""


class DataFormatError(PccError, ValueError):
    """A data or model file could not be parsed."""


class ChecksumError(DataFormatError):
    """A model file failed its integrity check."""


class NumericalError(PccError, ArithmeticError):
    """A numerical routine produced an unusable result."""


class ConvergenceError(NumericalError):
    """The eigensolver hit its iteration cap."""

    def __init__(self, index, max_iter):
        self.index = index
        self.max_iter = max_iter
        super().__init__(
            f"eigenvalue {index} did not converge within {max_iter} QL iterations"
        )
