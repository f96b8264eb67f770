"""Exception hierarchy shared by all plectic modules."""


class PlecticError(Exception):
    """Base class for every error raised by this package."""


class InputError(PlecticError):
    """Malformed or inconsistent input data (wrong shapes, bad JSON, ...)."""


class DegenerateInputError(PlecticError):
    """Numerically or structurally degenerate input (rank-deficient lattice,
    non-perfect pairing, projection that collapses the lattice, ...)."""


class SearchExhaustedError(PlecticError):
    """A bounded enumeration finished without finding the required witness."""
