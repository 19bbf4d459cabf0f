"""Exception hierarchy shared across the package."""


class ReluGPError(Exception):
    """Base class for all package errors."""


class DegenerateKernel(ReluGPError, ValueError):
    """The kernel angle is 0/0: zero bias variance with a zero input vector."""

    def __init__(self, message, pair=None):
        super().__init__(message)
        self.pair = pair


class NotPositiveDefinite(ReluGPError, ArithmeticError):
    """A Cholesky pivot was not strictly positive."""

    def __init__(self, row):
        super().__init__(f"matrix is not positive definite (pivot <= 0 at row {row})")
        self.row = row


class KernelFailure(ReluGPError):
    pass


class FactorizationFailure(ReluGPError):
    pass


class AllCellsFailed(ReluGPError):
    pass


class NonFiniteLoss(ReluGPError, FloatingPointError):
    def __init__(self, epoch, batch=None):
        where = f"epoch {epoch}" if batch is None else f"epoch {epoch}, batch {batch}"
        super().__init__(f"non-finite loss or parameters at {where}")
        self.epoch = epoch
        self.batch = batch


class DataError(ReluGPError, ValueError):
    """Raised for malformed or missing dataset files."""


class BadMagic(DataError):
    pass


class TruncatedFile(DataError):
    pass


class DimensionMismatch(DataError):
    pass


class LabelOutOfRange(DataError):
    pass
