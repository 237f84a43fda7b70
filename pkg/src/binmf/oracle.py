"""Exact brute-force ground truth on tiny instances.

Everything here recomputes from scratch: counters are rebuilt from full
assignment vectors and the closed-form marginal joints are evaluated
directly, so these results are independent of the samplers' incremental
bookkeeping. Enumeration covers every indicator configuration (every
constraint-valid pair of configurations for the double-indicator model),
works in log space, and is capacity-capped so a mistyped test cannot hang
the suite.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln, logsumexp

from .binmat import BinaryMatrix
from .config import HyperParams, ModelKind
from .errors import CapacityError, InfeasibleModelError

MAX_CONFIGS = 10 ** 6
_CHUNK = 1 << 15


@dataclass
class EnumerationResult:
    """Exact posterior over indicator configurations.

    assignments[c] is the row-indicator component per observed cell for
    configuration c (c_assignments likewise for the column indicator, when
    present). ev is the exact predictive mean per matrix cell;
    z_marginals[i, k] the exact posterior probability that observed cell i
    carries component k.
    """

    kind: ModelKind
    log_joints: np.ndarray       # (C,)
    posterior: np.ndarray        # (C,)
    assignments: np.ndarray      # (C, n_obs) int8
    c_assignments: np.ndarray | None
    z_marginals: np.ndarray      # (n_obs, K)
    ev: np.ndarray               # (F, N)
    _bases: np.ndarray           # per-cell mixed-radix sizes, last varies fastest

    def index_of(self, z, c=None) -> int:
        """Configuration index of a full assignment (mixed-radix decode of
        the enumeration order)."""
        K = self.z_marginals.shape[1]
        idx = 0
        for i in range(self._bases.shape[0]):
            if self.kind is ModelKind.DIR_DIR:
                zi, ci = int(z[i]), int(c[i])
                if self._bases[i] == K:          # one-valued cell: shared component
                    digit = zi
                else:
                    digit = zi * (K - 1) + (ci if ci < zi else ci - 1)
            else:
                digit = int(z[i])
            idx = idx * int(self._bases[i]) + digit
        return idx


def _counters(V: BinaryMatrix, Z: np.ndarray, K: int):
    """Per-configuration counters rebuilt from scratch.

    Z is (C, n_obs); returns L (C, F, K), A (C, K, N), B (C, K, N).
    """
    C = Z.shape[0]
    L = np.zeros((C, V.n_rows, K))
    A = np.zeros((C, K, V.n_cols))
    B = np.zeros((C, K, V.n_cols))
    sel = np.arange(C)
    for i in range(V.n_observed):
        f, n, v = V.rows[i], V.cols[i], V.values[i]
        L[sel, f, Z[:, i]] += 1
        (A if v == 1 else B)[sel, Z[:, i], n] += 1
    return L, A, B


def _row_marginal_logp(L, gamma, row_obs):
    """Sum over rows of the log simplex-factor marginal, per configuration."""
    const = (gammaln(gamma.sum()) - gammaln(gamma).sum()) * L.shape[1] \
        - gammaln(gamma.sum() + np.asarray(row_obs)).sum()
    return const + gammaln(gamma[None, None, :] + L).sum(axis=(1, 2))


def betadir_log_joint_of(V: BinaryMatrix, hyper: HyperParams,
                         z: np.ndarray) -> float:
    """log p(V, Z) for one full assignment, from first principles."""
    hyper.require("alpha", "beta", "gamma")
    Z = np.asarray(z, dtype=np.int64)[None, :]
    L, A, B = _counters(V, Z, hyper.k_max)
    alpha, beta = hyper.alpha, hyper.beta
    col_const = V.n_cols * (gammaln(alpha + beta) - gammaln(alpha)
                            - gammaln(beta)).sum()
    col_var = (gammaln(alpha[None, :, None] + A)
               + gammaln(beta[None, :, None] + B)
               - gammaln((alpha + beta)[None, :, None] + A + B)).sum(axis=(1, 2))
    lj = _row_marginal_logp(L, hyper.gamma, V.row_obs) + col_const + col_var
    return float(lj[0])


def dirdir_log_joint_of(V: BinaryMatrix, hyper: HyperParams,
                        z: np.ndarray, c: np.ndarray) -> float:
    """log p(V, Z, C) for one full double assignment; -inf when the
    observation constraint (shared component iff the cell is a one) is
    violated anywhere."""
    hyper.require("gamma", "eta")
    z = np.asarray(z, dtype=np.int64)
    c = np.asarray(c, dtype=np.int64)
    if np.any((V.values == 1) != (z == c)):
        return float("-inf")
    K = hyper.k_max
    L = np.zeros((V.n_rows, K))
    Q = np.zeros((K, V.n_cols))
    np.add.at(L, (V.rows, z), 1)
    np.add.at(Q, (c, V.cols), 1)
    gamma, eta = hyper.gamma, hyper.eta
    row = (V.n_rows * (gammaln(gamma.sum()) - gammaln(gamma).sum())
           + gammaln(gamma[None, :] + L).sum()
           - gammaln(gamma.sum() + V.row_obs).sum())
    col = (V.n_cols * (gammaln(eta.sum()) - gammaln(eta).sum())
           + gammaln(eta[:, None] + Q).sum()
           - gammaln(eta.sum() + V.col_obs).sum())
    return float(row + col)


def betadir_conditional_via_joints(V: BinaryMatrix, hyper: HyperParams,
                                   z: np.ndarray, i: int) -> np.ndarray:
    """Exact conditional distribution of cell i's indicator given all other
    assignments, as a ratio of full joints."""
    lj = np.empty(hyper.k_max)
    z2 = np.array(z, dtype=np.int64)
    for k in range(hyper.k_max):
        z2[i] = k
        lj[k] = betadir_log_joint_of(V, hyper, z2)
    p = np.exp(lj - lj.max())
    return p / p.sum()


def _dirdir_conditional(V, hyper, z, c, i, move):
    lj = np.full(hyper.k_max, -np.inf)
    z2 = np.array(z, dtype=np.int64)
    c2 = np.array(c, dtype=np.int64)
    for k in range(hyper.k_max):
        if move in ("pair", "z"):
            z2[i] = k
        if move in ("pair", "c"):
            c2[i] = k
        lj[k] = dirdir_log_joint_of(V, hyper, z2, c2)
        z2[i], c2[i] = z[i], c[i]
    finite = np.isfinite(lj)
    p = np.zeros(hyper.k_max)
    p[finite] = np.exp(lj[finite] - lj[finite].max())
    return p / p.sum()


def dirdir_pair_conditional_via_joints(V, hyper, z, c, i):
    """Exact conditional of the shared component at a one-valued cell."""
    return _dirdir_conditional(V, hyper, z, c, i, "pair")


def dirdir_z_conditional_via_joints(V, hyper, z, c, i):
    """Exact conditional of the row indicator at a zero cell, column
    indicator held fixed (its component gets exactly zero mass)."""
    return _dirdir_conditional(V, hyper, z, c, i, "z")


def dirdir_c_conditional_via_joints(V, hyper, z, c, i):
    """Exact conditional of the column indicator at a zero cell, row
    indicator held fixed."""
    return _dirdir_conditional(V, hyper, z, c, i, "c")


def enumerate_betadir(V: BinaryMatrix, hyper: HyperParams) -> EnumerationResult:
    """Exact posterior over all K^n_obs single-indicator configurations."""
    hyper.require("alpha", "beta", "gamma")
    K = hyper.k_max
    n_obs = V.n_observed
    n_configs = K ** n_obs
    if n_configs > MAX_CONFIGS:
        raise CapacityError(f"{n_configs} configurations exceed the "
                            f"{MAX_CONFIGS} enumeration cap")
    bases = np.full(n_obs, K, dtype=np.int64)

    def decode(start, stop):
        idx = np.arange(start, stop, dtype=np.int64)[:, None]
        place = K ** np.arange(n_obs - 1, -1, -1, dtype=np.int64)[None, :]
        return (idx // place) % K

    alpha, beta, gamma = hyper.alpha, hyper.beta, hyper.gamma
    col_const = V.n_cols * (gammaln(alpha + beta) - gammaln(alpha)
                            - gammaln(beta)).sum()

    log_joints = np.empty(n_configs)
    for start in range(0, n_configs, _CHUNK):
        stop = min(start + _CHUNK, n_configs)
        Zc = decode(start, stop)
        L, A, B = _counters(V, Zc, K)
        col_var = (gammaln(alpha[None, :, None] + A)
                   + gammaln(beta[None, :, None] + B)
                   - gammaln((alpha + beta)[None, :, None] + A + B)
                   ).sum(axis=(1, 2))
        log_joints[start:stop] = (_row_marginal_logp(L, gamma, V.row_obs)
                                  + col_const + col_var)

    posterior = np.exp(log_joints - logsumexp(log_joints))
    z_marg = np.zeros((n_obs, K))
    ev = np.zeros((V.n_rows, V.n_cols))
    assignments = np.empty((n_configs, n_obs), dtype=np.int8)
    for start in range(0, n_configs, _CHUNK):
        stop = min(start + _CHUNK, n_configs)
        Zc = decode(start, stop)
        assignments[start:stop] = Zc
        p = posterior[start:stop]
        L, A, B = _counters(V, Zc, K)
        Ew = (gamma[None, None, :] + L) / \
            (gamma.sum() + V.row_obs)[None, :, None]
        Eh = (alpha[None, :, None] + A) / \
            ((alpha + beta)[None, :, None] + A + B)
        ev += np.einsum("c,cfk,ckn->fn", p, Ew, Eh)
        for k in range(K):
            z_marg[:, k] += p @ (Zc == k)

    return EnumerationResult(kind=ModelKind.BETA_DIR, log_joints=log_joints,
                             posterior=posterior, assignments=assignments,
                             c_assignments=None, z_marginals=z_marg, ev=ev,
                             _bases=bases)


def enumerate_dirdir(V: BinaryMatrix, hyper: HyperParams) -> EnumerationResult:
    """Exact posterior over all constraint-valid double-indicator
    configurations: a one-valued cell contributes K choices (shared
    component), a zero cell K*(K-1) ordered distinct pairs."""
    hyper.require("gamma", "eta")
    K = hyper.k_max
    if K == 1 and np.any(V.values == 0):
        raise InfeasibleModelError("K=1 cannot represent observed zeros")
    n_obs = V.n_observed
    bases = np.where(V.values == 1, K, K * (K - 1)).astype(np.int64)
    n_configs = 1
    for b in bases:
        n_configs *= int(b)
        if n_configs > MAX_CONFIGS:
            raise CapacityError(f"more than {MAX_CONFIGS} valid configurations")

    place = np.ones(n_obs, dtype=np.int64)
    for i in range(n_obs - 2, -1, -1):
        place[i] = place[i + 1] * bases[i + 1]

    def decode(start, stop):
        idx = np.arange(start, stop, dtype=np.int64)[:, None]
        digits = (idx // place[None, :]) % bases[None, :]
        km1 = max(K - 1, 1)  # K=1 implies all-ones, where this path is unused
        Zc = np.where(V.values[None, :] == 1, digits, digits // km1)
        rem = digits % km1
        Cc = np.where(V.values[None, :] == 1, digits, rem + (rem >= Zc))
        return Zc, Cc

    gamma, eta = hyper.gamma, hyper.eta

    def batch_log_joints(Zc, Cc):
        C = Zc.shape[0]
        L = np.zeros((C, V.n_rows, K))
        Q = np.zeros((C, K, V.n_cols))
        sel = np.arange(C)
        for i in range(n_obs):
            L[sel, V.rows[i], Zc[:, i]] += 1
            Q[sel, Cc[:, i], V.cols[i]] += 1
        row = _row_marginal_logp(L, gamma, V.row_obs)
        col_const = (V.n_cols * (gammaln(eta.sum()) - gammaln(eta).sum())
                     - gammaln(eta.sum() + V.col_obs).sum())
        col = col_const + gammaln(eta[None, :, None] + Q).sum(axis=(1, 2))
        return row + col, L, Q

    log_joints = np.empty(n_configs)
    for start in range(0, n_configs, _CHUNK):
        stop = min(start + _CHUNK, n_configs)
        Zc, Cc = decode(start, stop)
        log_joints[start:stop] = batch_log_joints(Zc, Cc)[0]

    posterior = np.exp(log_joints - logsumexp(log_joints))
    z_marg = np.zeros((n_obs, K))
    ev = np.zeros((V.n_rows, V.n_cols))
    assignments = np.empty((n_configs, n_obs), dtype=np.int8)
    c_assignments = np.empty((n_configs, n_obs), dtype=np.int8)
    for start in range(0, n_configs, _CHUNK):
        stop = min(start + _CHUNK, n_configs)
        Zc, Cc = decode(start, stop)
        assignments[start:stop] = Zc
        c_assignments[start:stop] = Cc
        p = posterior[start:stop]
        _, L, Q = batch_log_joints(Zc, Cc)
        Ew = (gamma[None, None, :] + L) / \
            (gamma.sum() + V.row_obs)[None, :, None]
        Eh = (eta[None, :, None] + Q) / \
            (eta.sum() + V.col_obs)[None, None, :]
        ev += np.einsum("c,cfk,ckn->fn", p, Ew, Eh)
        for k in range(K):
            z_marg[:, k] += p @ (Zc == k)

    return EnumerationResult(kind=ModelKind.DIR_DIR, log_joints=log_joints,
                             posterior=posterior, assignments=assignments,
                             c_assignments=c_assignments, z_marginals=z_marg,
                             ev=ev, _bases=bases)


def ev_via_matmul(V: BinaryMatrix, hyper: HyperParams,
                  result: EnumerationResult) -> np.ndarray:
    """Exact predictive mean recomputed one configuration at a time as a
    posterior-weighted product of conditional factor means (a second code
    path for cross-checking EnumerationResult.ev)."""
    K = hyper.k_max
    ev = np.zeros((V.n_rows, V.n_cols))
    for cfg in range(result.posterior.shape[0]):
        z = result.assignments[cfg].astype(np.int64)
        if result.kind is ModelKind.DIR_DIR:
            c = result.c_assignments[cfg].astype(np.int64)
            L = np.zeros((V.n_rows, K))
            Q = np.zeros((K, V.n_cols))
            np.add.at(L, (V.rows, z), 1)
            np.add.at(Q, (c, V.cols), 1)
            Ew = (hyper.gamma[None, :] + L) / \
                (hyper.gamma.sum() + V.row_obs)[:, None]
            Eh = (hyper.eta[:, None] + Q) / \
                (hyper.eta.sum() + V.col_obs)[None, :]
        else:
            L = np.zeros((V.n_rows, K))
            A = np.zeros((K, V.n_cols))
            B = np.zeros((K, V.n_cols))
            np.add.at(L, (V.rows, z), 1)
            ones = V.values == 1
            np.add.at(A, (z[ones], V.cols[ones]), 1)
            np.add.at(B, (z[~ones], V.cols[~ones]), 1)
            Ew = (hyper.gamma[None, :] + L) / \
                (hyper.gamma.sum() + V.row_obs)[:, None]
            Eh = (hyper.alpha[:, None] + A) / \
                ((hyper.alpha + hyper.beta)[:, None] + A + B)
        ev += result.posterior[cfg] * (Ew @ Eh)
    return ev


def mc_marginal_check(kind: ModelKind, W: np.ndarray, H: np.ndarray,
                      cell: tuple[int, int], draws: int, seed: int) -> float:
    """Empirical P(v=1) at one cell by simulating the indicator-augmented
    generative path; converges to the factor product sum_k w_fk h_kn."""
    f, n = cell
    W = np.asarray(W, dtype=np.float64)
    H = np.asarray(H, dtype=np.float64)
    K = W.shape[1]
    rng = np.random.default_rng(seed)
    if kind is ModelKind.BETA_DIR:
        z = rng.choice(K, size=draws, p=W[f] / W[f].sum())
        v = rng.random(draws) < H[z, n]
    elif kind is ModelKind.DIR_BETA:
        c = rng.choice(K, size=draws, p=H[:, n] / H[:, n].sum())
        v = rng.random(draws) < W[f, c]
    elif kind is ModelKind.DIR_DIR:
        z = rng.choice(K, size=draws, p=W[f] / W[f].sum())
        c = rng.choice(K, size=draws, p=H[:, n] / H[:, n].sum())
        v = z == c
    else:
        raise ValueError(f"unknown kind {kind}")
    return float(np.count_nonzero(v)) / draws
