class SpectralToolkitError(Exception):
    """Base class for every domain error raised by the toolkit."""


class GridError(SpectralToolkitError):
    """Raised for invalid wavelength grids or grid specifications."""


class DimensionError(SpectralToolkitError):
    """Raised when cube, measurement, mask or operator shapes disagree."""


class BandSplitError(SpectralToolkitError):
    """Raised for meaningless splits and invalid stitches."""


class OracleSizeError(SpectralToolkitError):
    """Raised when the dense operator matrix would exceed the configured cap."""


class PhantomError(SpectralToolkitError):
    """Raised when a synthetic scene or mask cannot be built as requested."""


class MetricError(SpectralToolkitError):
    """Raised when a metric is undefined for its inputs."""


class StorageError(SpectralToolkitError):
    """Raised when an artifact cannot be written or read from disk."""


class FormatError(StorageError):
    """Raised for malformed, truncated or inconsistent files."""


class UnsupportedVersionError(FormatError):
    """Raised when a file carries a known family magic with an unknown version."""


class ParameterError(SpectralToolkitError, ValueError):
    """Raised for out-of-range scalar arguments (densities, noise levels)."""
