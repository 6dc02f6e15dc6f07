class ModelValidationError(ValueError):
    """
    Raised when a tessellation model violates its invariants (non-unit directions, weights that
    do not sum to one, non-positive intensity, linearly dependent directions).
    """


class UnsupportedDimensionError(ValueError):
    """
    Raised when an operation is asked to work in a dimension it does not support, e.g. the
    planar reduction for d != 2 or a 3D size functional on a planar cell.
    """


class UndefinedShapeError(ValueError):
    """
    Raised when a shape functional is undefined, i.e. sigma of a cell whose edges are all zero.
    """


class ModelFileError(ValueError):
    """
    Raised when a model description file is malformed.
    """


class NumericFailure(ArithmeticError):
    """
    Base class for numerical failures: non-convergent quadrature or starved Monte Carlo
    estimators. The CLI maps these to exit code 2.
    """


class QuadratureError(NumericFailure):
    """
    Raised when adaptive quadrature does not reach the requested tolerance, or when independent
    evaluation methods disagree beyond tolerance.
    """


class StarvationError(NumericFailure):
    """
    Raised when the conditioning event of a Monte Carlo estimator never occurred.

    Args:
        message (str): Error message.
        total (int): Number of samples drawn.
    """

    def __init__(self, message: str, total: int):
        super().__init__(message)
        self.total = total
