"""Exception hierarchy shared by every module of the package."""


class FisheyeAdapterError(Exception):
    """Base class for all errors raised by this package."""


class ValidationError(FisheyeAdapterError, ValueError):
    """A parameter record or document violates a model invariant."""


class OutOfDomain(FisheyeAdapterError):
    """A point or pixel lies outside the model's valid projection/unprojection set."""


class NonFinite(FisheyeAdapterError, ValueError):
    """NaN or Inf input."""


class NoConvergence(FisheyeAdapterError):
    """An iterative solve exhausted its iteration budget."""


class SingularJacobian(FisheyeAdapterError):
    """Newton step undefined because the Jacobian determinant vanished."""


class RankDeficient(FisheyeAdapterError):
    """Linear least-squares design matrix has numerical rank below its column count."""


class TooFewValidSamples(FisheyeAdapterError):
    """Sampling produced fewer correspondences than the output model needs."""


class AllSamplesInvalid(FisheyeAdapterError):
    """No correspondence lies in the output model's domain at the current parameters."""


class NumericalFailure(FisheyeAdapterError):
    """The optimizer produced a non-finite cost."""


class DimensionMismatch(FisheyeAdapterError, ValueError):
    """Raster and model image sizes disagree."""


class ParseError(FisheyeAdapterError, ValueError):
    """A model document could not be parsed."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class UnsupportedFormat(FisheyeAdapterError, ValueError):
    """Raster file is a valid netpbm file we do not handle (e.g. 16-bit)."""


class MalformedHeader(FisheyeAdapterError, ValueError):
    """Raster header could not be parsed."""
