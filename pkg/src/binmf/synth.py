"""Synthetic data generation from the three generative models.

Each draw produces ground-truth factors together with a fully observed
binary matrix whose cells are independent Bernoulli draws with mean equal
to the factor product. Simplex rows/columns come from normalized gamma
variates and [0,1] entries from ratios of gamma variates, keeping
everything on one seeded generator.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .binmat import BinaryMatrix
from .config import HyperParams, ModelKind

PRESET_REGIMES = {"flat": 1.0, "sparse": 0.1}


@dataclass(frozen=True)
class SynthResult:
    V: BinaryMatrix
    W: np.ndarray   # (F, K)
    H: np.ndarray   # (K, N)
    kind: ModelKind

    @property
    def product(self) -> np.ndarray:
        return self.W @ self.H


def generate(kind: ModelKind, n_rows: int, n_cols: int, hyper: HyperParams,
             seed: int) -> SynthResult:
    """Draw (W, H) from the priors of `kind`, then V ~ Bernoulli(WH).

    Deterministic per seed; safe to call in parallel with distinct seeds.
    """
    if n_rows < 1 or n_cols < 1:
        raise ValueError("matrix dimensions must be >= 1")
    rng = np.random.default_rng(seed)
    K = hyper.k_max
    if kind is ModelKind.BETA_DIR:
        hyper.require("alpha", "beta", "gamma")
        W = _dirichlet_rows(rng, hyper.gamma, n_rows)
        H = _beta_matrix(rng, hyper.alpha, hyper.beta, K, n_cols)
    elif kind is ModelKind.DIR_BETA:
        hyper.require("alpha", "beta", "eta")
        H = _dirichlet_rows(rng, hyper.eta, n_cols).T
        W = _beta_matrix(rng, hyper.alpha, hyper.beta, K, n_rows).T
    elif kind is ModelKind.DIR_DIR:
        hyper.require("gamma", "eta")
        W = _dirichlet_rows(rng, hyper.gamma, n_rows)
        H = _dirichlet_rows(rng, hyper.eta, n_cols).T
    else:
        raise ValueError(f"unknown kind {kind}")
    P = W @ H
    cells = (rng.random((n_rows, n_cols)) < P).astype(np.int8)
    return SynthResult(V=BinaryMatrix(cells), W=W, H=H, kind=kind)


def regenerate_cells(result: SynthResult, seed: int) -> BinaryMatrix:
    """Fresh Bernoulli draw of V conditional on the stored (W, H)."""
    rng = np.random.default_rng(seed)
    P = result.product
    return BinaryMatrix((rng.random(P.shape) < P).astype(np.int8))


def preset_hyper(kind: ModelKind, k: int, regime: str = "flat") -> HyperParams:
    """The two demonstration regimes: every concentration/shape parameter
    set to 1 ("flat") or to 0.1 ("sparse", which yields blockier draws)."""
    if regime not in PRESET_REGIMES:
        raise ValueError(f"regime must be one of {sorted(PRESET_REGIMES)}")
    value = PRESET_REGIMES[regime]
    if kind is ModelKind.BETA_DIR:
        return HyperParams(k_max=k, alpha=value, beta=value, gamma=value)
    if kind is ModelKind.DIR_BETA:
        return HyperParams(k_max=k, alpha=value, beta=value, eta=value)
    return HyperParams(k_max=k, gamma=value, eta=value)


def _dirichlet_rows(rng, concentration, n) -> np.ndarray:
    """n simplex rows via normalized gamma draws."""
    g = rng.gamma(np.broadcast_to(concentration, (n, concentration.shape[0])))
    return g / g.sum(axis=1, keepdims=True)


def _beta_matrix(rng, a, b, k, n) -> np.ndarray:
    """(k, n) matrix of independent [0,1] draws, row k using (a_k, b_k),
    as a ratio of two gamma draws."""
    ga = rng.gamma(np.broadcast_to(a[:, None], (k, n)))
    gb = rng.gamma(np.broadcast_to(b[:, None], (k, n)))
    return ga / (ga + gb)
