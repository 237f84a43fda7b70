"""Collapsed Gibbs sampler for the dir-dir model.

Both factors are simplex-constrained, which needs two indicators per
observed cell: a row-side one (z, drawn from the row's simplex factor) and
a column-side one (c, from the column's). The observation is deterministic
given them: v = 1 exactly when both point at the same component. The
sampler therefore maintains, for every observed cell,

    v = 1  =>  z == c      (resampled jointly)
    v = 0  =>  z != c      (z resampled excluding c, then c excluding z)

with counters L[f, k] (cells in row f with z = k) and Q[k, n] (cells in
column n with c = k). A single-component model cannot explain an observed
zero, so K = 1 with zeros is rejected outright.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln

from . import kernels
from .binmat import BinaryMatrix
from .config import HyperParams, RunConfig
from .errors import InfeasibleModelError
from .estimators import GIBBS_DIRDIR, SampleTrace, dirdir_conditional_means


@dataclass
class DirDirState:
    """Mutable sampler state: both indicators per observed cell plus the
    counters derived from them. Single-writer."""

    V: BinaryMatrix
    hyper: HyperParams
    z: np.ndarray        # (n_obs,) int64
    c: np.ndarray        # (n_obs,) int64
    L: np.ndarray        # (F, K) int64, from z
    Q_cols: np.ndarray   # (N, K) int64, from c, transposed storage

    @property
    def Q(self) -> np.ndarray:
        return self.Q_cols.T

    def remove_cell(self, i: int) -> None:
        f, n = self.V.rows[i], self.V.cols[i]
        self.L[f, self.z[i]] -= 1
        self.Q_cols[n, self.c[i]] -= 1

    def insert_cell(self, i: int, k_z: int, k_c: int) -> None:
        f, n, v = self.V.rows[i], self.V.cols[i], self.V.values[i]
        if (v == 1) != (k_z == k_c):
            raise ValueError(f"assignment ({k_z}, {k_c}) violates the "
                             f"indicator constraint for a {v}-valued cell")
        self.z[i], self.c[i] = k_z, k_c
        self.L[f, k_z] += 1
        self.Q_cols[n, k_c] += 1

    def recount(self):
        return counters_from_assignments(self.V, self.z, self.c, self.hyper.k_max)


def counters_from_assignments(V: BinaryMatrix, z, c, k_max: int):
    L = np.zeros((V.n_rows, k_max), dtype=np.int64)
    Q_cols = np.zeros((V.n_cols, k_max), dtype=np.int64)
    np.add.at(L, (V.rows, z), 1)
    np.add.at(Q_cols, (V.cols, c), 1)
    return L, Q_cols


def check_feasible(V: BinaryMatrix, hyper: HyperParams) -> None:
    if hyper.k_max == 1 and np.any(V.values == 0):
        raise InfeasibleModelError(
            "K=1 cannot represent observed zeros: the two indicators of a "
            "zero cell must differ")


def init_consistent(V: BinaryMatrix, hyper: HyperParams,
                    seed_or_rng) -> DirDirState:
    """Random constraint-respecting start: ones get one shared component,
    zeros get an ordered pair of distinct components, uniformly."""
    hyper.require("gamma", "eta")
    check_feasible(V, hyper)
    rng = np.random.default_rng(seed_or_rng) \
        if not isinstance(seed_or_rng, np.random.Generator) else seed_or_rng
    K = hyper.k_max
    z = rng.integers(0, K, V.n_observed, dtype=np.int64)
    shift = rng.integers(0, max(K - 1, 1), V.n_observed, dtype=np.int64)
    c = z.copy()
    zeros = V.values == 0
    c[zeros] = (z[zeros] + 1 + shift[zeros]) % K  # uniform over k != z
    L, Q_cols = counters_from_assignments(V, z, c, K)
    return DirDirState(V=V, hyper=hyper, z=z, c=c, L=L, Q_cols=Q_cols)


def pair_weights_v1(state: DirDirState, f: int, n: int) -> np.ndarray:
    """Unnormalized joint conditional for the shared component of a
    one-valued cell; counters must exclude the cell."""
    if state.V.cells[f, n] != 1:
        raise ValueError(f"cell ({f}, {n}) is not an observed one")
    return (state.hyper.gamma + state.L[f]) * (state.hyper.eta + state.Q_cols[n])


def z_weights_v0(state: DirDirState, f: int, n: int) -> np.ndarray:
    """Unnormalized conditional for a zero cell's row indicator given the
    column indicator's current value; that component gets zero mass.
    Counters must exclude the cell."""
    if state.V.cells[f, n] != 0:
        raise ValueError(f"cell ({f}, {n}) is not an observed zero")
    i = state.V.cell_index(f, n)
    w = state.hyper.gamma + state.L[f]
    w[state.c[i]] = 0.0
    return w


def c_weights_v0(state: DirDirState, f: int, n: int) -> np.ndarray:
    """Mirror image of z_weights_v0 for the column indicator."""
    if state.V.cells[f, n] != 0:
        raise ValueError(f"cell ({f}, {n}) is not an observed zero")
    i = state.V.cell_index(f, n)
    w = state.hyper.eta + state.Q_cols[n]
    w[state.z[i]] = 0.0
    return w


def sweep(state: DirDirState, rng: np.random.Generator) -> None:
    """Resample every observed cell once, in row-major order (ones: joint
    draw; zeros: z then c)."""
    u = rng.random((state.V.n_observed, 2))
    work = np.empty(state.hyper.k_max, dtype=np.float64)
    kernels.dirdir_sweep(state.z, state.c, state.V.rows, state.V.cols,
                         state.V.values, state.L, state.Q_cols,
                         state.hyper.gamma, state.hyper.eta, u, work)


def log_joint(state: DirDirState) -> float:
    """log p(V, Z, C) for a constraint-consistent state: per-row and
    per-column simplex-factor marginals (the observation terms are all
    exactly one)."""
    bad = (state.V.values == 1) != (state.z == state.c)
    if np.any(bad):
        raise ValueError("state violates the indicator constraint; "
                         "the joint probability is zero")
    hyper, V = state.hyper, state.V
    gamma, eta = hyper.gamma, hyper.eta
    row_part = (
        V.n_rows * (gammaln(gamma.sum()) - gammaln(gamma).sum())
        + gammaln(gamma[None, :] + state.L).sum()
        - gammaln(gamma.sum() + V.row_obs).sum()
    )
    col_part = (
        V.n_cols * (gammaln(eta.sum()) - gammaln(eta).sum())
        + gammaln(eta[None, :] + state.Q_cols).sum()
        - gammaln(eta.sum() + V.col_obs).sum()
    )
    return float(row_part + col_part)


def run(V: BinaryMatrix, hyper: HyperParams, cfg: RunConfig, *,
        predictive: str = "mean", store_samples: bool = False) -> SampleTrace:
    """Run the sampler; see the beta-dir counterpart for the trace layout."""
    if predictive not in ("mean", "sample"):
        raise ValueError(f"predictive must be 'mean' or 'sample', got {predictive!r}")
    rng = np.random.default_rng(cfg.seed)
    state = init_consistent(V, hyper, rng)
    n_sweeps = cfg.burn_in + cfg.kept_samples * cfg.thin
    log_joints = np.empty(n_sweeps, dtype=np.float64)
    active = np.empty(n_sweeps, dtype=np.int64)

    F, N, K = V.n_rows, V.n_cols, hyper.k_max
    z_count_sum = np.zeros((F, K))
    eh_sum = np.zeros((K, N))
    ev_sum = np.zeros((F, N))
    z_samples = np.empty((cfg.kept_samples, V.n_observed), dtype=np.int32) \
        if store_samples else None
    c_samples = np.empty((cfg.kept_samples, V.n_observed), dtype=np.int32) \
        if store_samples else None

    kept = 0
    for sweep_no in range(n_sweeps):
        sweep(state, rng)
        log_joints[sweep_no] = log_joint(state)
        active[sweep_no] = _active_count(state.L)
        past_burn = sweep_no >= cfg.burn_in
        if past_burn and (sweep_no - cfg.burn_in) % cfg.thin == cfg.thin - 1:
            z_count_sum += state.L
            Ew, Eh = dirdir_conditional_means(
                state.L, state.Q, hyper, V.row_obs, V.col_obs)
            eh_sum += Eh
            if predictive == "mean":
                ev_sum += Ew @ Eh
            else:
                W_draw = _draw_dirichlet(rng, hyper.gamma[None, :] + state.L)
                H_draw = _draw_dirichlet(rng, hyper.eta[None, :] + state.Q_cols).T
                ev_sum += W_draw @ H_draw
            if store_samples:
                z_samples[kept] = state.z
                c_samples[kept] = state.c
            kept += 1

    return SampleTrace(source=GIBBS_DIRDIR, kept=kept,
                       z_count_sum=z_count_sum, eh_sum=eh_sum, ev_sum=ev_sum,
                       log_joint=log_joints, active_history=active,
                       predictive=predictive, z_samples=z_samples,
                       c_samples=c_samples)


def _draw_dirichlet(rng, params):
    g = rng.gamma(params)
    return g / g.sum(axis=1, keepdims=True)


def _active_count(L, threshold=0.01):
    mass = L.sum(axis=0)
    total = mass.sum()
    return int(np.count_nonzero(mass > threshold * total)) if total > 0 else 0
