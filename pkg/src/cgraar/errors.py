"""Exception hierarchy shared by all cgraar modules."""


class CgraarError(Exception):
    """Base class for all errors raised by this package."""


class InvalidFieldError(CgraarError):
    """A raster violates its invariants (non-finite values, bad shape, bad spacing)."""


class ShapeMismatchError(CgraarError):
    """Two rasters that must share a shape do not."""


class OversamplingError(CgraarError):
    """Support occupies too large a fraction of the computational window."""


class AlignmentError(CgraarError):
    """Trial alignment is impossible (e.g. reference vanishes on the support)."""


class ZeroNormError(CgraarError):
    """A metric was asked to normalize by a zero or empty quantity."""


class SolverDivergenceError(CgraarError):
    """An iterate became non-finite; the message names the iteration."""


class ContainerError(CgraarError):
    """Base class for .cgr container format errors."""


class BadMagicError(ContainerError):
    """File does not start with the container magic string."""


class TruncatedPayloadError(ContainerError):
    """Payload is shorter than the header declares."""


class PayloadShapeError(ContainerError):
    """Declared shape does not match the payload length or an expected shape."""
