"""Fit and prediction metrics for Bernoulli mean predictions.

Natural-log everywhere; a fair-coin predictor scores ln 2 per cell.
Predicted probabilities are clamped to [eps, 1-eps] before the log so a
degenerate estimate cannot produce an infinite score; how often the clamp
fired is reported alongside the metrics.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass

import numpy as np

from .binmat import BinaryMatrix
from .errors import DimensionError

CLAMP_EPS = 1e-12


@dataclass(frozen=True)
class MetricReport:
    neg_log_lik: float
    perplexity: float
    n_cells: int
    clamp_count: int

    def to_json(self) -> str:
        return json.dumps(asdict(self))


def _cell_nll(values: np.ndarray, probs: np.ndarray) -> tuple[float, int]:
    """Total Bernoulli negative log-likelihood and clamp count."""
    clamped = np.clip(probs, CLAMP_EPS, 1.0 - CLAMP_EPS)
    n_clamped = int(np.count_nonzero(clamped != probs))
    logp = np.where(values == 1, np.log(clamped), np.log1p(-clamped))
    return float(-logp.sum()), n_clamped


def neg_log_likelihood(V: BinaryMatrix, EV: np.ndarray) -> float:
    """Negative log-likelihood of the observed cells under the predicted
    means; serves as the measure of fit of a reconstruction."""
    EV = np.asarray(EV, dtype=np.float64)
    if EV.shape != (V.n_rows, V.n_cols):
        raise DimensionError(f"prediction shape {EV.shape} does not match "
                             f"matrix {V.n_rows}x{V.n_cols}")
    nll, _ = _cell_nll(V.values, EV[V.rows, V.cols])
    return nll


def perplexity(test: np.ndarray, EV: np.ndarray) -> float:
    """Per-cell negative log-likelihood (nats) of held-out triples."""
    test = np.asarray(test)
    if test.ndim != 2 or test.shape[1] != 3 or test.shape[0] < 1:
        raise ValueError("test must be a non-empty array of (row, col, value) triples")
    EV = np.asarray(EV, dtype=np.float64)
    nll, _ = _cell_nll(test[:, 2], EV[test[:, 0], test[:, 1]])
    return nll / test.shape[0]


def metric_report(EV: np.ndarray, V: BinaryMatrix | None = None,
                  test: np.ndarray | None = None) -> MetricReport:
    """Joint report over held-out triples if given, else over V's observed
    cells. neg_log_lik is always n_cells times perplexity."""
    EV = np.asarray(EV, dtype=np.float64)
    if test is not None:
        test = np.asarray(test)
        values, probs = test[:, 2], EV[test[:, 0], test[:, 1]]
    elif V is not None:
        if EV.shape != (V.n_rows, V.n_cols):
            raise DimensionError(f"prediction shape {EV.shape} does not match "
                                 f"matrix {V.n_rows}x{V.n_cols}")
        values, probs = V.values, EV[V.rows, V.cols]
    else:
        raise ValueError("need a matrix or a test set to evaluate")
    if values.shape[0] < 1:
        raise ValueError("no cells to evaluate")
    nll, n_clamped = _cell_nll(values, probs)
    return MetricReport(neg_log_lik=nll, perplexity=nll / values.shape[0],
                        n_cells=int(values.shape[0]), clamp_count=n_clamped)
