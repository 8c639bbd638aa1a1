"""Error types shared across the library and the command line tool."""


class BlurGpError(Exception):
    """Base class for all library-specific errors."""


class InvalidConfigError(BlurGpError):
    """A parameter or option violates its documented constraints."""


class DataFormatError(BlurGpError):
    """An input file or array is malformed or inconsistent."""


class IllConditionedBasisError(BlurGpError):
    """The basis Gram matrix could not be factorized, even with jitter.

    Carries the jitter levels that were attempted so callers can report
    them.
    """

    def __init__(self, message, attempted_jitters=None):
        super().__init__(message)
        self.attempted_jitters = list(attempted_jitters or [])


class NumericalDomainError(BlurGpError):
    """A quantity left its mathematically valid domain during a computation."""


class CavityCollapseError(BlurGpError):
    """Removing a site's message left a non-positive cavity variance.

    The sweep loop treats this as a per-site skip, not a fatal error.
    """
