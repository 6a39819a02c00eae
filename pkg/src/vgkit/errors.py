"""Exception hierarchy shared by all vgkit modules.

Everything derives from VgkitError so the CLI can map any domain failure
to a structured JSON error and exit code 1. Most classes also subclass a
matching builtin so library users can catch ValueError / OSError as usual.
"""


class VgkitError(Exception):
    """Base class for all vgkit domain errors."""


class FormatError(VgkitError, ValueError):
    """Malformed binary tensor file or pyramid manifest."""


class WriteError(VgkitError, OSError):
    """Failed to write an output file."""


class DimensionError(VgkitError, ValueError):
    """Tensor dimensions incompatible with the requested transform."""


class DivisibilityError(VgkitError, ValueError):
    """Integer divisibility precondition violated."""


class StructureError(VgkitError, ValueError):
    """Pyramid or verdict structure is internally inconsistent."""


class DomainError(VgkitError, ValueError):
    """Scalar argument outside its mathematical domain."""


class RatioError(VgkitError, ValueError):
    """Invalid aspect ratio or sparse ratio."""


class ShapeError(VgkitError, ValueError):
    """Array argument has the wrong shape or length."""


class SizeError(VgkitError, ValueError):
    """Problem size exceeds an enforced cap."""


class StreamShapeError(VgkitError, ValueError):
    """Input frame count violates the streaming divisibility rule."""


class IndexRangeError(VgkitError, IndexError):
    """Token or element index out of range."""
