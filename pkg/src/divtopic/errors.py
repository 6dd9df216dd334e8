class DivtopicError(Exception):
    """Base class for errors raised by this package."""


class DataError(DivtopicError):
    """Invalid input data: malformed files, out-of-range ids, bad counts.

    The CLI maps these to exit code 2.
    """
