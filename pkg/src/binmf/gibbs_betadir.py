"""Collapsed Gibbs sampler for the beta-dir model.

Both factors are integrated out analytically, leaving a chain over one
indicator per observed cell. The sufficient statistics are four counters:

    L[f, k]  cells in row f assigned to component k
    A[k, n]  one-valued cells in column n assigned to k
    B[k, n]  zero-valued cells in column n assigned to k
    M[k, n]  = A + B, all cells in column n assigned to k

Missing cells are skipped entirely, so row/column totals are the observed
counts of that row/column, not F or N. The conditional for a cell is a
product of pseudo-count ratios, strictly positive, evaluated in linear
space (each factor is bounded by count totals plus the prior parameters,
so overflow is impossible at sane matrix sizes).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln

from . import kernels
from .binmat import BinaryMatrix
from .config import HyperParams, RunConfig
from .estimators import GIBBS_BETADIR, SampleTrace, betadir_conditional_means


@dataclass
class BetaDirState:
    """Mutable sampler state: one component index per observed cell plus
    the counters derived from it. Single-writer; run independent chains
    for parallelism."""

    V: BinaryMatrix
    hyper: HyperParams
    z: np.ndarray        # (n_obs,) int64
    L: np.ndarray        # (F, K) int64
    A_cols: np.ndarray   # (N, K) int64, A transposed so columns are contiguous
    B_cols: np.ndarray   # (N, K) int64

    @property
    def A(self) -> np.ndarray:
        return self.A_cols.T

    @property
    def B(self) -> np.ndarray:
        return self.B_cols.T

    @property
    def M(self) -> np.ndarray:
        return self.A_cols.T + self.B_cols.T

    def remove_cell(self, i: int) -> None:
        """Take observed cell i's contribution out of the counters."""
        f, n, v, k = self.V.rows[i], self.V.cols[i], self.V.values[i], self.z[i]
        self.L[f, k] -= 1
        (self.A_cols if v == 1 else self.B_cols)[n, k] -= 1

    def insert_cell(self, i: int, k: int) -> None:
        """Assign observed cell i to component k and count it back in."""
        f, n, v = self.V.rows[i], self.V.cols[i], self.V.values[i]
        self.z[i] = k
        self.L[f, k] += 1
        (self.A_cols if v == 1 else self.B_cols)[n, k] += 1

    def recount(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Counters rebuilt from scratch from the assignment vector."""
        return counters_from_assignments(self.V, self.z, self.hyper.k_max)


def counters_from_assignments(V: BinaryMatrix, z: np.ndarray, k_max: int):
    """Build (L, A_cols, B_cols) from a per-cell assignment vector."""
    L = np.zeros((V.n_rows, k_max), dtype=np.int64)
    A_cols = np.zeros((V.n_cols, k_max), dtype=np.int64)
    B_cols = np.zeros((V.n_cols, k_max), dtype=np.int64)
    np.add.at(L, (V.rows, z), 1)
    ones = V.values == 1
    np.add.at(A_cols, (V.cols[ones], z[ones]), 1)
    np.add.at(B_cols, (V.cols[~ones], z[~ones]), 1)
    return L, A_cols, B_cols


def init_random(V: BinaryMatrix, hyper: HyperParams,
                seed_or_rng) -> BetaDirState:
    """Assign every observed cell a uniform random component."""
    hyper.require("alpha", "beta", "gamma")
    rng = np.random.default_rng(seed_or_rng) \
        if not isinstance(seed_or_rng, np.random.Generator) else seed_or_rng
    z = rng.integers(0, hyper.k_max, V.n_observed, dtype=np.int64)
    L, A_cols, B_cols = counters_from_assignments(V, z, hyper.k_max)
    return BetaDirState(V=V, hyper=hyper, z=z, L=L, A_cols=A_cols, B_cols=B_cols)


def conditional_weights(state: BetaDirState, f: int, n: int) -> np.ndarray:
    """Unnormalized collapsed conditional for cell (f, n)'s indicator.

    The counters must already exclude the cell (remove_cell first). All
    entries are strictly positive.
    """
    v = int(state.V.cells[f, n])
    if v not in (0, 1):
        raise ValueError(f"cell ({f}, {n}) is not observed")
    out = np.empty(state.hyper.k_max, dtype=np.float64)
    kernels.betadir_cell_weights(state.hyper.gamma, state.hyper.alpha,
                                 state.hyper.beta, state.L[f],
                                 state.A_cols[n], state.B_cols[n], v, out)
    return out


def sweep(state: BetaDirState, rng: np.random.Generator) -> None:
    """Resample every observed cell once, in row-major order."""
    u = rng.random(state.V.n_observed)
    work = np.empty(state.hyper.k_max, dtype=np.float64)
    kernels.betadir_sweep(state.z, state.V.rows, state.V.cols, state.V.values,
                          state.L, state.A_cols, state.B_cols,
                          state.hyper.gamma, state.hyper.alpha,
                          state.hyper.beta, u, work)


def log_joint(state: BetaDirState) -> float:
    """log p(V, Z): the product of a per-row simplex-factor marginal and a
    per-column [0,1]-factor marginal, both in closed form."""
    hyper, V = state.hyper, state.V
    gamma, alpha, beta = hyper.gamma, hyper.alpha, hyper.beta
    row_part = (
        V.n_rows * (gammaln(gamma.sum()) - gammaln(gamma).sum())
        + gammaln(gamma[None, :] + state.L).sum()
        - gammaln(gamma.sum() + V.row_obs).sum()
    )
    ab = alpha + beta
    col_part = (
        V.n_cols * (gammaln(ab) - gammaln(alpha) - gammaln(beta)).sum()
        + gammaln(alpha[None, :] + state.A_cols).sum()
        + gammaln(beta[None, :] + state.B_cols).sum()
        - gammaln(ab[None, :] + state.A_cols + state.B_cols).sum()
    )
    return float(row_part + col_part)


def run(V: BinaryMatrix, hyper: HyperParams, cfg: RunConfig, *,
        predictive: str = "mean", store_samples: bool = False) -> SampleTrace:
    """Run the sampler: burn in, then accumulate kept samples.

    predictive="mean" accumulates the product of conditional factor means
    given each kept sample (lower variance); "sample" draws the factors
    from their conditional posteriors instead. Deterministic per cfg.seed.
    """
    if predictive not in ("mean", "sample"):
        raise ValueError(f"predictive must be 'mean' or 'sample', got {predictive!r}")
    rng = np.random.default_rng(cfg.seed)
    state = init_random(V, hyper, rng)
    n_sweeps = cfg.burn_in + cfg.kept_samples * cfg.thin
    log_joints = np.empty(n_sweeps, dtype=np.float64)
    active = np.empty(n_sweeps, dtype=np.int64)

    F, N, K = V.n_rows, V.n_cols, hyper.k_max
    z_count_sum = np.zeros((F, K))
    eh_sum = np.zeros((K, N))
    ev_sum = np.zeros((F, N))
    z_samples = np.empty((cfg.kept_samples, V.n_observed), dtype=np.int32) \
        if store_samples else None

    kept = 0
    for sweep_no in range(n_sweeps):
        sweep(state, rng)
        log_joints[sweep_no] = log_joint(state)
        active[sweep_no] = _active_count(state.L)
        past_burn = sweep_no >= cfg.burn_in
        if past_burn and (sweep_no - cfg.burn_in) % cfg.thin == cfg.thin - 1:
            z_count_sum += state.L
            Ew, Eh = betadir_conditional_means(
                state.L, state.A, state.B, hyper, V.row_obs)
            if predictive == "mean":
                eh_sum += Eh
                ev_sum += Ew @ Eh
            else:
                W_draw = _draw_dirichlet_rows(rng, hyper.gamma, state.L)
                H_draw = rng.beta(hyper.alpha[:, None] + state.A,
                                  hyper.beta[:, None] + state.B)
                eh_sum += Eh
                ev_sum += W_draw @ H_draw
            if store_samples:
                z_samples[kept] = state.z
            kept += 1

    return SampleTrace(source=GIBBS_BETADIR, kept=kept,
                       z_count_sum=z_count_sum, eh_sum=eh_sum, ev_sum=ev_sum,
                       log_joint=log_joints, active_history=active,
                       predictive=predictive, z_samples=z_samples)


def _draw_dirichlet_rows(rng, gamma, counts):
    """One simplex draw per row from the conditional posterior, via
    normalized gamma variates."""
    g = rng.gamma(gamma[None, :] + counts)
    return g / g.sum(axis=1, keepdims=True)


def _active_count(L, threshold=0.01):
    mass = L.sum(axis=0)
    total = mass.sum()
    return int(np.count_nonzero(mass > threshold * total)) if total > 0 else 0
