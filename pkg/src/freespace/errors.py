"""Exception types raised across the package.

Every condition callers are expected to branch on gets its own class; all
inherit FreespaceError so the CLI can catch one thing at the top.
"""


class FreespaceError(Exception):
    """Base class for all package errors."""


class IoError(FreespaceError):
    """File missing or unreadable/unwritable."""


class FormatError(FreespaceError):
    """File on disk violates the interchange format contract."""


class ShapeError(FreespaceError):
    """Array has the wrong rank, shape, or dtype for its role."""


class ParamError(FreespaceError):
    """Parameter value outside its documented domain."""


class DegenerateInput(FreespaceError):
    """Input carries no usable signal (e.g. depth map with no valid pixel)."""


class SamplingExhausted(FreespaceError):
    """Dart throwing placed fewer than two centers within the attempt budget."""


class NoSeeds(FreespaceError):
    """No candidate region survived seed-extraction filtering."""


class UnknownLabel(FreespaceError):
    """Requested superpixel label does not exist in the map."""


class OutOfBounds(FreespaceError):
    """Query coordinates fall outside the image."""


class DegenerateWeights(FreespaceError):
    """Attraction weights are identically zero (constant-zero depth)."""


class TooFewDescriptors(FreespaceError):
    """Fewer descriptors than requested clusters."""


class UnsortedLog(FreespaceError):
    """Telemetry records are not strictly increasing in time."""


class EmptyLog(FreespaceError):
    """Telemetry log contains no records."""


class DimensionMismatch(FreespaceError):
    """Two rasters that must share dimensions do not."""


class InvalidSpec(FreespaceError):
    """Scene description is internally inconsistent."""


class MissingPair(FreespaceError):
    """A stem present in one directory has no partner in the other."""


class EmptyBatch(FreespaceError):
    """No evaluable pairs found."""


class ConfigError(FreespaceError):
    """Configuration file or CLI flags are unusable."""
