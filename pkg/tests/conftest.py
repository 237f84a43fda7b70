import numpy as np
import pytest

from binmf import BinaryMatrix, HyperParams


def mat(text: str) -> BinaryMatrix:
    """Build a matrix from a compact literal: rows split on ';', cells on
    ',', 'NA' marks a missing cell. e.g. mat("1,0;NA,1")."""
    rows = []
    for row in text.split(";"):
        rows.append([-1 if tok.strip() == "NA" else int(tok) for tok in row.split(",")])
    return BinaryMatrix(np.array(rows, dtype=np.int8))


def random_instance(rng, max_dim=3, max_k=3, missing_rate=0.3, force_zero=False,
                    dirdir=False):
    """Tiny random matrix + hyperparameters for oracle cross-checks."""
    F = int(rng.integers(1, max_dim + 1))
    N = int(rng.integers(1, max_dim + 1))
    k_lo = 2 if dirdir else 1
    K = int(rng.integers(k_lo, max_k + 1))
    cells = rng.integers(0, 2, (F, N)).astype(np.int8)
    cells[rng.random((F, N)) < missing_rate] = -1
    if not np.any(cells != -1):
        cells[0, 0] = 1
    if force_zero and not np.any(cells == 0):
        f, n = np.argwhere(cells != -1)[0]
        cells[f, n] = 0
    V = BinaryMatrix(cells)
    if dirdir:
        hyper = HyperParams(k_max=K, gamma=rng.uniform(0.2, 2.0, K),
                            eta=rng.uniform(0.2, 2.0, K))
    else:
        hyper = HyperParams(k_max=K, alpha=rng.uniform(0.2, 2.0, K),
                            beta=rng.uniform(0.2, 2.0, K),
                            gamma=rng.uniform(0.2, 2.0, K))
    return V, hyper


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)
