"""Exception hierarchy.

Every numerical failure derives from :class:`GwGaussError`; the CLI maps those
to exit code 1 and :class:`SchemaError` to exit code 2.
"""


class GwGaussError(Exception):
    """Base class for numerical / contract failures."""


class InvalidMatrix(GwGaussError):
    pass


class NotPsd(GwGaussError):
    pass


class SingularBlock(GwGaussError):
    pass


class DimError(GwGaussError):
    pass


class NotPositiveDefinite(GwGaussError):
    pass


class DegenerateInput(GwGaussError):
    pass


class OrientationError(GwGaussError):
    """Source measure has lower rank than the target; swap the arguments."""


class InvalidPlan(GwGaussError):
    pass


class NotCentered(GwGaussError):
    pass


class ScaleError(GwGaussError):
    """Sinkhorn overflowed; retry with a larger epsilon."""


class TooLarge(GwGaussError):
    pass


class Unsupported(GwGaussError):
    pass


class SchemaError(ValueError):
    """Malformed input file. ``where`` names the offending field or line."""

    def __init__(self, message, where=None):
        self.where = where
        super().__init__(f"{where}: {message}" if where else message)
