"""Exception types shared across the package."""


class HomopartError(Exception):
    """Base class for all errors raised by homopart."""


class InputError(HomopartError):
    """Malformed or inconsistent input data (bad FASTA, unknown ids, ...)."""


class InfeasibleError(HomopartError):
    """A requested constraint cannot be satisfied by the data."""
