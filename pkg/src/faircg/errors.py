"""Exception hierarchy shared across the package.

Exit codes used by the CLI are attached to the classes so command handlers
can map failures without a lookup table.
"""


class FairCGError(Exception):
    """Base class for all package errors."""

    exit_code = 1


class ConfigError(FairCGError):
    """Invalid configuration or precondition violation caught before work starts."""

    exit_code = 2


class DataError(FairCGError):
    """Malformed or unusable input data."""

    exit_code = 3


class InfeasibleError(FairCGError):
    """A model was proven infeasible (typically a fairness tolerance too tight)."""

    exit_code = 4


class TimeoutError_(FairCGError):
    """A time limit expired before any usable incumbent was found."""

    exit_code = 5


class SolverError(FairCGError):
    """Numerical failure inside the LP/MIP machinery."""

    exit_code = 6


class CyclingError(FairCGError):
    """Column generation generated an already-pooled column, indicating cycling."""

    exit_code = 6
