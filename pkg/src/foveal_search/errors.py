"""Exception hierarchy shared by all modules."""


class FovealSearchError(Exception):
    """Base class for every error raised by this package."""


class ValidationError(FovealSearchError, ValueError):
    """Input violates a documented precondition."""


class ImageFormatError(FovealSearchError, ValueError):
    """Raster file is readable but not in a supported format."""


class DegenerateInputError(FovealSearchError, ValueError):
    """Input is well-formed but leaves nothing to compute with (e.g. an all-zero map)."""


class DegenerateStateError(FovealSearchError, RuntimeError):
    """All posterior mass vanished during an update."""


class ResourceError(FovealSearchError, MemoryError):
    """A requested structure exceeds the configured memory budget."""
