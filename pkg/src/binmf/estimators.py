"""Posterior-mean factor estimates and predictive expectations.

Both samplers emit a SampleTrace holding running sums that are sufficient
for the posterior-mean estimators, so memory stays O(FK + KN + FN) however
long the chain runs. The predictive accumulator is, per kept sample,
either the product of conditional factor means given the sampled
indicators (variance-reduced default) or the product of factors drawn from
their conditional posteriors.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .binmat import BinaryMatrix
from .config import HyperParams

GIBBS_BETADIR = "gibbs_betadir"
CVB_BETADIR = "cvb_betadir"
GIBBS_DIRDIR = "gibbs_dirdir"


@dataclass
class SampleTrace:
    """Accumulated kept-sample statistics from one (or several merged)
    chains.

    z_count_sum[f, k] sums, over kept samples, the number of observed
    cells in row f assigned to component k. eh_sum accumulates per-sample
    conditional means of the activation matrix; ev_sum accumulates
    per-sample predictive means (or draws). log_joint has one entry per
    sweep including burn-in; active_history the matching count of
    components holding >1% of assignments.
    """

    source: str
    kept: int
    z_count_sum: np.ndarray            # (F, K)
    eh_sum: np.ndarray                 # (K, N)
    ev_sum: np.ndarray                 # (F, N)
    log_joint: np.ndarray              # (sweeps,)
    active_history: np.ndarray         # (sweeps,) int
    predictive: str = "mean"           # "mean" | "sample"
    z_samples: np.ndarray | None = None   # (J, n_obs) optional snapshots
    c_samples: np.ndarray | None = None   # (J, n_obs), double-indicator only


@dataclass(frozen=True)
class FactorEstimate:
    """Posterior means of the dictionary, activations, and data expectation."""

    EW: np.ndarray   # (F, K)
    EH: np.ndarray   # (K, N)
    EV: np.ndarray   # (F, N)
    source: str


def betadir_conditional_means(L, A, B, hyper: HyperParams, row_obs):
    """Conditional posterior means of (W, H) given integer (or expected)
    counters.

    E[w_fk | counts] = (gamma_k + L_fk) / (sum gamma + row_obs_f)
    E[h_kn | counts] = (alpha_k + A_kn) / (alpha_k + beta_k + A_kn + B_kn)
    """
    gamma, alpha, beta = hyper.gamma, hyper.alpha, hyper.beta
    Ew = (gamma[None, :] + L) / (gamma.sum() + np.asarray(row_obs)[:, None])
    Eh = (alpha[:, None] + A) / ((alpha + beta)[:, None] + A + B)
    return Ew, Eh


def dirdir_conditional_means(L, Q, hyper: HyperParams, row_obs, col_obs):
    """Conditional posterior means of (W, H) given both indicator counters."""
    gamma, eta = hyper.gamma, hyper.eta
    Ew = (gamma[None, :] + L) / (gamma.sum() + np.asarray(row_obs)[:, None])
    Eh = (eta[:, None] + Q) / (eta.sum() + np.asarray(col_obs)[None, :])
    return Ew, Eh


def _estimate_from_trace(trace: SampleTrace, V: BinaryMatrix,
                         hyper: HyperParams) -> FactorEstimate:
    if trace.kept < 1:
        raise ValueError("trace holds no kept samples")
    J = trace.kept
    gamma = hyper.gamma
    EW = (gamma[None, :] + trace.z_count_sum / J) / \
        (gamma.sum() + V.row_obs[:, None])
    EH = trace.eh_sum / J
    EV = trace.ev_sum / J
    return FactorEstimate(EW=EW, EH=EH, EV=EV, source=trace.source)


def estimate_betadir(trace: SampleTrace, V: BinaryMatrix,
                     hyper: HyperParams) -> FactorEstimate:
    """Posterior means from a beta-dir sampling trace."""
    if trace.source != GIBBS_BETADIR:
        raise ValueError(f"expected a {GIBBS_BETADIR} trace, got {trace.source}")
    hyper.require("alpha", "beta", "gamma")
    return _estimate_from_trace(trace, V, hyper)


def estimate_dirdir(trace: SampleTrace, V: BinaryMatrix,
                    hyper: HyperParams) -> FactorEstimate:
    """Posterior means from a dir-dir sampling trace."""
    if trace.source != GIBBS_DIRDIR:
        raise ValueError(f"expected a {GIBBS_DIRDIR} trace, got {trace.source}")
    hyper.require("gamma", "eta")
    return _estimate_from_trace(trace, V, hyper)


def estimate_cvb(resp, V: BinaryMatrix, hyper: HyperParams) -> FactorEstimate:
    """Posterior means from converged responsibilities (variational factor
    means; the predictive mean is their product)."""
    from .cvb_betadir import variational_factors

    dir_params, beta_params = variational_factors(resp)
    EW = dir_params / dir_params.sum(axis=1, keepdims=True)
    EH = beta_params[0] / (beta_params[0] + beta_params[1])
    EV = EW @ EH
    return FactorEstimate(EW=EW, EH=EH, EV=EV, source=CVB_BETADIR)


def active_components(source, threshold: float = 0.01) -> int:
    """Number of components holding more than `threshold` of the total
    assignment mass.

    Accepts a SampleTrace (kept-sample assignment counts), a
    responsibilities object (expected counts), or a dictionary matrix
    (column mass).
    """
    if not 0.0 < threshold < 1.0:
        raise ValueError("threshold must be in (0, 1)")
    if isinstance(source, SampleTrace):
        mass = source.z_count_sum.sum(axis=0)
    elif hasattr(source, "EL"):
        mass = np.asarray(source.EL).sum(axis=0)
    else:
        mass = np.asarray(source, dtype=np.float64).sum(axis=0)
    total = mass.sum()
    if total <= 0.0:
        return 0
    return int(np.count_nonzero(mass / total > threshold))


def merge_traces(traces: list[SampleTrace]) -> SampleTrace:
    """Pool kept-sample statistics from independent chains.

    log_joint/active histories are concatenated in chain order; snapshots
    are stacked when every chain stored them.
    """
    if not traces:
        raise ValueError("no traces to merge")
    first = traces[0]
    if any(t.source != first.source or t.predictive != first.predictive
           for t in traces):
        raise ValueError("traces disagree on source engine or predictive mode")

    def _stack(name):
        parts = [getattr(t, name) for t in traces]
        return None if any(p is None for p in parts) else np.concatenate(parts)

    return SampleTrace(
        source=first.source,
        kept=sum(t.kept for t in traces),
        z_count_sum=sum(t.z_count_sum for t in traces),
        eh_sum=sum(t.eh_sum for t in traces),
        ev_sum=sum(t.ev_sum for t in traces),
        log_joint=np.concatenate([t.log_joint for t in traces]),
        active_history=np.concatenate([t.active_history for t in traces]),
        predictive=first.predictive,
        z_samples=_stack("z_samples"),
        c_samples=_stack("c_samples"),
    )
