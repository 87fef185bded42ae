"""Exception hierarchy.

Input problems derive from ``ValueError`` and numerical breakdowns from
``ArithmeticError`` so callers can catch either family with builtins.
"""


class PCEError(Exception):
    """Base class for all errors raised by sparsepce."""


class InputError(PCEError, ValueError):
    """Invalid user input (shapes, supports, configuration)."""


class InvalidInput(InputError):
    pass


class DimensionMismatch(InputError):
    pass


class DegreeOverflow(InputError):
    pass


class InvalidTruncation(InputError):
    pass


class OutOfSupport(InputError):
    pass


class InvalidParent(InputError):
    pass


class NumericalError(PCEError, ArithmeticError):
    """The data admit no well-posed fit."""


class RankDeficient(NumericalError):
    def __init__(self, rank, n_columns=None, message=None):
        self.rank = rank
        self.n_columns = n_columns
        if message is None:
            message = f"design matrix is rank deficient (numerical rank {rank}"
            message += f" of {n_columns})" if n_columns is not None else ")"
        super().__init__(message)


class SaturatedLeverage(NumericalError):
    def __init__(self, index, leverage):
        self.index = index
        self.leverage = leverage
        super().__init__(
            f"leverage of point {index} is {leverage:.12g}; the model interpolates it"
        )


class DegenerateOutput(NumericalError):
    pass


class NonFiniteCorrelation(NumericalError):
    pass
