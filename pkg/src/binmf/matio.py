"""CSV input/output for real-valued factor matrices and held-out triples.

Factor matrices (EW, EH, EV) are written with a header row of column
labels and a leading row-label column, so the files are self-describing;
held-out cells are triples (row, col, value) with a header.
"""

from __future__ import annotations

import csv

import numpy as np

from .errors import DimensionError, ParseError


def write_matrix(path, M: np.ndarray, row_prefix: str = "r", col_prefix: str = "c") -> None:
    M = np.asarray(M, dtype=np.float64)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow([""] + [f"{col_prefix}{j}" for j in range(M.shape[1])])
        for i, row in enumerate(M):
            writer.writerow([f"{row_prefix}{i}"] + [repr(float(x)) for x in row])


def read_matrix(path) -> np.ndarray:
    with open(path, newline="") as fh:
        raw = [line for line in csv.reader(fh) if line]
    if len(raw) < 2:
        raise DimensionError(f"{path}: expected a header row plus data rows")
    width = len(raw[0]) - 1
    out = np.empty((len(raw) - 1, width), dtype=np.float64)
    for i, line in enumerate(raw[1:], start=2):
        if len(line) != len(raw[0]):
            raise DimensionError(f"{path}: row {i} has {len(line)} fields, "
                                 f"expected {len(raw[0])}")
        try:
            out[i - 2] = [float(x) for x in line[1:]]
        except ValueError as exc:
            raise ParseError(f"{path}: {exc}", row=i) from exc
    return out


def write_triples(path, triples: np.ndarray) -> None:
    triples = np.asarray(triples)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["row", "col", "value"])
        for f, n, v in triples:
            writer.writerow([int(f), int(n), int(v)])


def read_triples(path) -> np.ndarray:
    with open(path, newline="") as fh:
        raw = [line for line in csv.reader(fh) if line]
    if not raw or raw[0][:2] != ["row", "col"]:
        raise ParseError(f"{path}: expected header row,col,value")
    out = np.empty((len(raw) - 1, 3), dtype=np.int64)
    for i, line in enumerate(raw[1:], start=2):
        try:
            out[i - 2] = [int(x) for x in line]
        except ValueError as exc:
            raise ParseError(f"{path}: {exc}", row=i) from exc
    return out
