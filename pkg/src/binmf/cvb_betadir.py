"""Collapsed variational inference for the beta-dir model.

The variational posterior factorizes over cells, one responsibility vector
per observed cell. Updates use the zero-order approximation: logs of
expected counts in place of expected logs of counts, which makes each cell
update identical in shape to the sampler's conditional, with expected
counters EL/EA/EB in place of the integer ones. Monotone progress is not
guaranteed under this approximation; convergence is tracked by the largest
per-cell L1 change per pass.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .binmat import BinaryMatrix
from .config import HyperParams, RunConfig

RECOUNT_EVERY = 50  # full expected-counter rebuild, bounds float drift


@dataclass
class Responsibilities:
    """Per-cell responsibility vectors plus their expected counters.

    q rows sum to one; EL/EA/EB are the q-weighted analogues of the
    sampler's counters and are maintained incrementally (rebuilt from q
    every RECOUNT_EVERY passes).
    """

    V: BinaryMatrix
    hyper: HyperParams
    q: np.ndarray         # (n_obs, K)
    EL: np.ndarray        # (F, K)
    EA_cols: np.ndarray   # (N, K)
    EB_cols: np.ndarray   # (N, K)
    max_change_history: np.ndarray = field(default_factory=lambda: np.empty(0))
    active_history: np.ndarray = field(default_factory=lambda: np.empty(0, np.int64))

    @property
    def EA(self) -> np.ndarray:
        return self.EA_cols.T

    @property
    def EB(self) -> np.ndarray:
        return self.EB_cols.T

    def remove_cell(self, i: int) -> None:
        f, n, v = self.V.rows[i], self.V.cols[i], self.V.values[i]
        self.EL[f] -= self.q[i]
        (self.EA_cols if v == 1 else self.EB_cols)[n] -= self.q[i]

    def insert_cell(self, i: int, q_new: np.ndarray) -> None:
        f, n, v = self.V.rows[i], self.V.cols[i], self.V.values[i]
        self.q[i] = q_new
        self.EL[f] += q_new
        (self.EA_cols if v == 1 else self.EB_cols)[n] += q_new

    def recount(self) -> None:
        """Rebuild expected counters from q."""
        self.EL, self.EA_cols, self.EB_cols = expected_counters(self.V, self.q)


def expected_counters(V: BinaryMatrix, q: np.ndarray):
    K = q.shape[1]
    EL = np.zeros((V.n_rows, K))
    EA_cols = np.zeros((V.n_cols, K))
    EB_cols = np.zeros((V.n_cols, K))
    np.add.at(EL, V.rows, q)
    ones = V.values == 1
    np.add.at(EA_cols, V.cols[ones], q[ones])
    np.add.at(EB_cols, V.cols[~ones], q[~ones])
    return EL, EA_cols, EB_cols


def init_onehot(V: BinaryMatrix, hyper: HyperParams, seed_or_rng) -> Responsibilities:
    """Start from point-mass responsibilities on uniform random components
    (empty components are hard for the variational updates to refill, so a
    spread-out start avoids those local optima)."""
    hyper.require("alpha", "beta", "gamma")
    rng = np.random.default_rng(seed_or_rng) \
        if not isinstance(seed_or_rng, np.random.Generator) else seed_or_rng
    k0 = rng.integers(0, hyper.k_max, V.n_observed)
    q = np.zeros((V.n_observed, hyper.k_max))
    q[np.arange(V.n_observed), k0] = 1.0
    EL, EA_cols, EB_cols = expected_counters(V, q)
    return Responsibilities(V=V, hyper=hyper, q=q, EL=EL,
                            EA_cols=EA_cols, EB_cols=EB_cols)


def cvb0_update(resp: Responsibilities, f: int, n: int) -> np.ndarray:
    """New responsibility vector for cell (f, n), normalized to sum one.

    The expected counters must already exclude the cell (remove_cell
    first); the caller reinserts with insert_cell.
    """
    v = int(resp.V.cells[f, n])
    if v not in (0, 1):
        raise ValueError(f"cell ({f}, {n}) is not observed")
    out = np.empty(resp.hyper.k_max, dtype=np.float64)
    total = kernels.betadir_cell_weights(
        resp.hyper.gamma, resp.hyper.alpha, resp.hyper.beta,
        resp.EL[f], resp.EA_cols[n], resp.EB_cols[n], v, out)
    return out / total


def full_pass(resp: Responsibilities) -> float:
    """Update every observed cell once, in row-major order; returns the
    largest per-cell L1 change."""
    work = np.empty(resp.hyper.k_max, dtype=np.float64)
    return kernels.cvb0_pass(resp.q, resp.V.rows, resp.V.cols, resp.V.values,
                             resp.EL, resp.EA_cols, resp.EB_cols,
                             resp.hyper.gamma, resp.hyper.alpha,
                             resp.hyper.beta, work)


def run_cvb(V: BinaryMatrix, hyper: HyperParams, cfg: RunConfig) -> Responsibilities:
    """vb_iterations full passes from a random one-hot start.

    Deterministic per cfg.seed. The flat-prior parametric configuration
    (alpha = beta = gamma = 1 with a hand-chosen K) is obtained by passing
    default_betadir(K, nonparametric=False).
    """
    rng = np.random.default_rng(cfg.seed)
    resp = init_onehot(V, hyper, rng)
    changes = np.empty(cfg.vb_iterations)
    active = np.empty(cfg.vb_iterations, dtype=np.int64)
    for it in range(cfg.vb_iterations):
        changes[it] = full_pass(resp)
        active[it] = _active_count(resp.EL)
        if (it + 1) % RECOUNT_EVERY == 0:
            resp.recount()
    resp.max_change_history = changes
    resp.active_history = active
    return resp


def variational_factors(resp: Responsibilities):
    """Variational posterior parameters of the factors.

    Returns (dirichlet_params, beta_params): dirichlet_params[f] governs
    row f of W; beta_params[0/1, k, n] are the two shape parameters of
    h_kn's posterior.
    """
    dir_params = resp.hyper.gamma[None, :] + resp.EL
    a = resp.hyper.alpha[:, None] + resp.EA
    b = resp.hyper.beta[:, None] + resp.EB
    return dir_params, np.stack([a, b])


def _active_count(EL, threshold=0.01):
    mass = EL.sum(axis=0)
    total = mass.sum()
    return int(np.count_nonzero(mass > threshold * total)) if total > 0 else 0
