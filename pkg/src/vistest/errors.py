"""Exception types raised across the package.

File-level problems reuse the builtin ``FileNotFoundError`` / ``OSError``;
everything domain-specific derives from :class:`VistestError` so callers can
catch the whole family at once (the CLI maps it to exit code 2).
"""


class VistestError(Exception):
    """Base class for all vistest-specific errors."""


class UnsupportedFormatError(VistestError):
    """The file is recognizably not one of the supported image formats."""


class CorruptImageError(VistestError):
    """The file claims a supported format but its contents are broken."""


class InvalidParamsError(VistestError, ValueError):
    """An operator or option received parameters outside its schema."""


class DegenerateTransformError(InvalidParamsError):
    """An affine matrix is singular (|det| below the tolerance)."""


class DimensionMismatchError(VistestError, ValueError):
    """Two images that must share dimensions do not."""


class ImageTooSmallError(VistestError, ValueError):
    """An image is smaller than the metric window that must fit inside it."""


class SchemaViolationError(VistestError, ValueError):
    """A manifest failed validation.

    ``pointer`` is a JSON pointer ("/cases/3/id") locating the offending
    field inside the document.
    """

    def __init__(self, message: str, pointer: str = ""):
        super().__init__(f"{pointer}: {message}" if pointer else message)
        self.pointer = pointer


class TaskMismatchError(VistestError):
    """An expected output kind is incompatible with the suite's task."""


class MissingImageError(VistestError):
    """A suite references an image file that does not exist on disk."""


class EmptySuiteError(VistestError):
    """A run was requested over a suite with no test cases."""


class EmptyModificationListError(InvalidParamsError):
    """Suite generation was requested with no modifications."""
