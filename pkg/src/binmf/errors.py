"""Exception types shared across the package.

Plain argument/contract misuse raises ValueError; the classes here mark
conditions a caller may reasonably want to catch separately (bad input
files, model infeasibility, oracle capacity).
"""


class BinmfError(Exception):
    """Base class for binmf-specific errors."""


class ParseError(BinmfError):
    """A cell token could not be interpreted. Carries 1-based location."""

    def __init__(self, message, row=None, col=None):
        if row is not None and col is not None:
            message = f"{message} (row {row}, column {col})"
        super().__init__(message)
        self.row = row
        self.col = col


class DimensionError(BinmfError):
    """Ragged or empty input, or shape mismatch between related arrays."""


class CapacityError(BinmfError):
    """Exact enumeration was asked to cover too many configurations."""


class InfeasibleModelError(BinmfError):
    """No valid latent configuration exists (e.g. K=1 with observed zeros
    under the double-indicator model)."""


class UnsupportedModelError(BinmfError):
    """Requested engine/model combination is not provided."""
