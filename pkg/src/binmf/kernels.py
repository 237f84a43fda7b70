"""JIT-compiled inner loops for the collapsed samplers and the collapsed
variational pass.

Collapsed updates are sequential by nature (each cell's conditional
depends on every other cell through the shared counters), so these loops
cannot be vectorized; numba compiles them to native code instead.

Counter layout: per-row counters are (F, K) so a row is contiguous;
per-column counters are stored transposed as (N, K) for the same reason.
Randomness enters only through pre-drawn uniforms (one per decision),
keeping the kernels deterministic and the stream layout independent of
branching.
"""

import numpy as np
from numba import njit


@njit(cache=True)
def pick(weights, r):
    """Index k with cumulative weight first exceeding r (single-uniform
    categorical draw; r is already scaled by the total). Zero-weight
    entries can never be picked."""
    acc = 0.0
    last = -1
    for k in range(weights.shape[0]):
        w = weights[k]
        if w > 0.0:
            last = k
            acc += w
            if r < acc:
                return k
    return last  # top-end rounding: fall back to the last positive entry


@njit(cache=True)
def betadir_cell_weights(gamma, alpha, beta, L_f, A_n, B_n, v, out):
    """Unnormalized conditional weights for one cell's indicator, with the
    cell's own contribution already removed from all counters.

    w_k = (gamma_k + L_fk) * (alpha_k + A_kn)^v (beta_k + B_kn)^(1-v)
          / (alpha_k + beta_k + A_kn + B_kn)

    Works for integer counters (sampler) and expected counters
    (variational). Returns the total weight.
    """
    total = 0.0
    for k in range(out.shape[0]):
        a = alpha[k] + A_n[k]
        b = beta[k] + B_n[k]
        num = a if v == 1 else b
        w = (gamma[k] + L_f[k]) * num / (a + b)
        out[k] = w
        total += w
    return total


@njit(cache=True)
def betadir_sweep(z, rows, cols, vals, L, A_cols, B_cols,
                  gamma, alpha, beta, u, work):
    """One full sampling sweep over observed cells in stored order.

    For each cell: remove it from the counters, draw a new component from
    the collapsed conditional, reinsert. u holds one uniform per cell.
    """
    for i in range(z.shape[0]):
        f = rows[i]
        n = cols[i]
        v = vals[i]
        k_old = z[i]
        L[f, k_old] -= 1
        if v == 1:
            A_cols[n, k_old] -= 1
        else:
            B_cols[n, k_old] -= 1
        total = betadir_cell_weights(gamma, alpha, beta,
                                     L[f], A_cols[n], B_cols[n], v, work)
        k_new = pick(work, u[i] * total)
        z[i] = k_new
        L[f, k_new] += 1
        if v == 1:
            A_cols[n, k_new] += 1
        else:
            B_cols[n, k_new] += 1


@njit(cache=True)
def cvb0_pass(q, rows, cols, vals, EL, EA_cols, EB_cols,
              gamma, alpha, beta, work):
    """One full variational pass, updating every cell's responsibility in
    place. Expected counters are maintained incrementally (subtract the
    old q, add the new). Returns the largest per-cell L1 change."""
    max_change = 0.0
    for i in range(q.shape[0]):
        f = rows[i]
        n = cols[i]
        v = vals[i]
        for k in range(q.shape[1]):
            EL[f, k] -= q[i, k]
            if v == 1:
                EA_cols[n, k] -= q[i, k]
            else:
                EB_cols[n, k] -= q[i, k]
        total = betadir_cell_weights(gamma, alpha, beta,
                                     EL[f], EA_cols[n], EB_cols[n], v, work)
        change = 0.0
        for k in range(q.shape[1]):
            q_new = work[k] / total
            change += abs(q_new - q[i, k])
            q[i, k] = q_new
            EL[f, k] += q_new
            if v == 1:
                EA_cols[n, k] += q_new
            else:
                EB_cols[n, k] += q_new
        if change > max_change:
            max_change = change
    return max_change


@njit(cache=True)
def dirdir_sweep(z, c, rows, cols, vals, L, Q_cols, gamma, eta, u, work):
    """One full sweep of the double-indicator sampler.

    Ones force both indicators onto one component, drawn jointly; zeros
    resample the row indicator excluding the column indicator's component,
    then the column indicator excluding the new row component. u holds two
    uniforms per cell (the second is unused for ones).
    """
    K = work.shape[0]
    for i in range(z.shape[0]):
        f = rows[i]
        n = cols[i]
        if vals[i] == 1:
            x = z[i]
            L[f, x] -= 1
            Q_cols[n, x] -= 1
            total = 0.0
            for k in range(K):
                w = (gamma[k] + L[f, k]) * (eta[k] + Q_cols[n, k])
                work[k] = w
                total += w
            x = pick(work, u[i, 0] * total)
            z[i] = x
            c[i] = x
            L[f, x] += 1
            Q_cols[n, x] += 1
        else:
            k_c = c[i]
            L[f, z[i]] -= 1
            total = 0.0
            for k in range(K):
                w = 0.0 if k == k_c else gamma[k] + L[f, k]
                work[k] = w
                total += w
            k_z = pick(work, u[i, 0] * total)
            z[i] = k_z
            L[f, k_z] += 1
            Q_cols[n, k_c] -= 1
            total = 0.0
            for k in range(K):
                w = 0.0 if k == k_z else eta[k] + Q_cols[n, k]
                work[k] = w
                total += w
            k_c = pick(work, u[i, 1] * total)
            c[i] = k_c
            Q_cols[n, k_c] += 1
