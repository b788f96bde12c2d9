"""Exception types shared across the library.

Everything raised for bad inputs or degenerate math derives from
``SadisError`` so callers (and the CLI) can map the whole family to a
validation failure, while plain ``OSError`` keeps signalling I/O trouble.
"""


class SadisError(ValueError):
    """Base class for validation, domain, and numerical errors."""


class FormatError(SadisError):
    """A file does not conform to its declared on-disk format."""


class UnsupportedLayoutError(SadisError):
    """A file uses a memory layout this library does not read (e.g. Fortran order)."""


class UnsupportedDtypeError(SadisError):
    """A tensor file stores a dtype other than 32/64-bit floats."""


class UnsupportedFormatError(SadisError):
    """An image file uses a format or bit depth outside the supported set."""


class DimensionError(SadisError):
    """Operands have incompatible shapes."""


class DomainError(SadisError):
    """A value lies outside an operation's mathematical domain."""


class SizeError(SadisError):
    """An input is too small for the requested operation."""


class DegenerateInputError(SadisError):
    """The input has no variance where the operation needs some."""


class DegenerateReferenceError(SadisError):
    """The reference statistics are degenerate (zero variance / rank zero)."""


class NumericalError(SadisError):
    """A numerical routine failed to converge or produced an invalid result."""


class DecompositionError(SadisError):
    """A matrix factorization (e.g. Cholesky of a non-SPD matrix) failed."""
