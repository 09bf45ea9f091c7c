"""Exception types shared across the package."""


class InputError(ValueError):
    """A caller-supplied value violates an operation's preconditions."""


class ShapeError(InputError):
    """Array dimensions do not line up."""


class NonFiniteError(RuntimeError):
    """A loss or gradient became NaN/inf; the run is aborted."""


class DataFormatError(InputError):
    """An on-disk dataset fails validation (shape, checksum, schema)."""


class FetchError(RuntimeError):
    """A dataset download failed.

    ``retryable`` distinguishes transient network trouble from hard
    failures such as checksum mismatches.
    """

    def __init__(self, message, retryable=False):
        super().__init__(message)
        self.retryable = retryable
