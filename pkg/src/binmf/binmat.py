"""Binary observation matrices with missing entries.

A matrix cell is 0, 1, or missing. Cells are stored densely (the inference
algorithms iterate over every observed cell, zeros included, so sparse
storage would buy nothing), with missing entries marked by a sentinel.
Observed cell coordinates are kept in row-major order alongside the grid;
all samplers walk cells in that order.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionError, ParseError

MISSING = -1
ZERO = 0
ONE = 1


@dataclass(frozen=True)
class CsvFormat:
    """Shape of a cell-grid CSV file.

    missing_tokens are matched after stripping surrounding whitespace; the
    empty string covers bare consecutive delimiters.
    """

    delimiter: str = ","
    missing_tokens: tuple[str, ...] = ("", "NA")
    header: bool = False


class BinaryMatrix:
    """An F x N grid of {0, 1, missing} cells, immutable after construction.

    Attributes
    ----------
    cells : (F, N) int8 array with values in {0, 1, MISSING}
    rows, cols : int64 arrays of observed cell coordinates, row-major order
    values : int8 array of the observed cells' 0/1 values, same order
    row_obs, col_obs : observed-cell counts per row / per column
    """

    def __init__(self, cells: np.ndarray):
        cells = np.array(cells, dtype=np.int8)  # private copy; frozen below
        if cells.ndim != 2 or cells.shape[0] < 1 or cells.shape[1] < 1:
            raise DimensionError(f"cell grid must be 2-D and non-empty, got shape {cells.shape}")
        bad = ~np.isin(cells, (MISSING, ZERO, ONE))
        if bad.any():
            f, n = np.argwhere(bad)[0]
            raise ValueError(f"invalid cell state {cells[f, n]} at ({f}, {n})")
        self.cells = cells
        self.cells.flags.writeable = False
        obs = np.argwhere(cells != MISSING)  # argwhere returns row-major order
        self.rows = np.ascontiguousarray(obs[:, 0], dtype=np.int64)
        self.cols = np.ascontiguousarray(obs[:, 1], dtype=np.int64)
        self.values = cells[self.rows, self.cols]
        self.row_obs = np.bincount(self.rows, minlength=self.n_rows).astype(np.int64)
        self.col_obs = np.bincount(self.cols, minlength=self.n_cols).astype(np.int64)

    @property
    def n_rows(self) -> int:
        return self.cells.shape[0]

    @property
    def n_cols(self) -> int:
        return self.cells.shape[1]

    @property
    def n_observed(self) -> int:
        return self.rows.shape[0]

    @property
    def observed(self) -> np.ndarray:
        """Observed (row, col) pairs as an (n_observed, 2) array."""
        return np.stack([self.rows, self.cols], axis=1)

    def cell_index(self, f: int, n: int) -> int:
        """Position of observed cell (f, n) in row-major observed order."""
        code = f * self.n_cols + n
        codes = self.rows * self.n_cols + self.cols
        i = int(np.searchsorted(codes, code))
        if i >= codes.shape[0] or codes[i] != code:
            raise ValueError(f"cell ({f}, {n}) is not observed")
        return i

    def with_cells_missing(self, rows, cols) -> "BinaryMatrix":
        """Copy with the given cells blanked out."""
        cells = self.cells.copy()
        cells[np.asarray(rows), np.asarray(cols)] = MISSING
        return BinaryMatrix(cells)

    def __eq__(self, other):
        return isinstance(other, BinaryMatrix) and np.array_equal(self.cells, other.cells)

    def __repr__(self):
        return (f"BinaryMatrix({self.n_rows}x{self.n_cols}, "
                f"{self.n_observed} observed)")


@dataclass(frozen=True)
class HoldoutSplit:
    """Train matrix with held-out cells blanked, plus the held-out triples.

    test rows are (row, col, value); together with train's observed cells
    they partition the source matrix's observed cells.
    """

    train: BinaryMatrix
    test: np.ndarray  # (n_test, 3) int64
    fraction: float
    seed: int

    def restore(self) -> BinaryMatrix:
        """Re-insert the test triples; reconstructs the source matrix."""
        cells = self.train.cells.copy()
        cells[self.test[:, 0], self.test[:, 1]] = self.test[:, 2].astype(np.int8)
        return BinaryMatrix(cells)


def load_csv(path, fmt: CsvFormat = CsvFormat()) -> BinaryMatrix:
    """Read a cell grid from CSV.

    Each token must be "0", "1", or one of fmt.missing_tokens. Raises
    ParseError with a 1-based location for anything else, DimensionError
    for ragged rows or an empty file.
    """
    with open(path, newline="") as fh:
        reader = csv.reader(fh, delimiter=fmt.delimiter)
        raw = [line for line in reader if line]  # skip fully blank lines
    if fmt.header and raw:
        raw = raw[1:]
    if not raw:
        raise DimensionError(f"{path}: no data rows")
    width = len(raw[0])
    grid = np.empty((len(raw), width), dtype=np.int8)
    for i, line in enumerate(raw):
        if len(line) != width:
            raise DimensionError(
                f"{path}: row {i + 1} has {len(line)} columns, expected {width}")
        for j, tok in enumerate(line):
            tok = tok.strip()
            if tok == "0":
                grid[i, j] = ZERO
            elif tok == "1":
                grid[i, j] = ONE
            elif tok in fmt.missing_tokens:
                grid[i, j] = MISSING
            else:
                raise ParseError(f"{path}: bad cell token {tok!r}", row=i + 1, col=j + 1)
    return BinaryMatrix(grid)


def write_csv(V: BinaryMatrix, path, fmt: CsvFormat = CsvFormat()) -> None:
    """Write the cell grid as CSV; missing cells are written as "NA"."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, delimiter=fmt.delimiter)
        if fmt.header:
            writer.writerow([f"c{j}" for j in range(V.n_cols)])
        for f in range(V.n_rows):
            writer.writerow(
                ["NA" if v == MISSING else str(int(v)) for v in V.cells[f]])


def split_holdout(V: BinaryMatrix, fraction: float, seed: int) -> HoldoutSplit:
    """Move a uniform random subset of observed cells into a test set.

    round(fraction * n_observed) cells are sampled without replacement
    (half-away-from-zero rounding); the train copy has them set missing.
    Deterministic for a given seed.
    """
    if not 0.0 < fraction < 1.0:
        raise ValueError(f"fraction must be in (0, 1), got {fraction}")
    if V.n_observed < 2:
        raise ValueError("need at least 2 observed cells to split")
    n_test = int(math.floor(fraction * V.n_observed + 0.5))
    rng = np.random.default_rng(seed)
    picked = np.sort(rng.choice(V.n_observed, size=n_test, replace=False))
    rows, cols = V.rows[picked], V.cols[picked]
    test = np.stack([rows, cols, V.values[picked].astype(np.int64)], axis=1)
    return HoldoutSplit(train=V.with_cells_missing(rows, cols), test=test,
                        fraction=fraction, seed=seed)


def density(V: BinaryMatrix) -> float:
    """Fraction of observed cells that are ones."""
    if V.n_observed == 0:
        raise ValueError("density undefined: no observed cells")
    return float(np.count_nonzero(V.values == ONE)) / V.n_observed
