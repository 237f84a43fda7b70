"""Bayesian mean-parameterized factorization of binary matrices.

The observed matrix is modeled cell-wise as Bernoulli with mean equal to
the factor product, no link function, with simplex/[0,1] priors keeping
the product a valid probability. Inference is by collapsed Gibbs sampling
(both model families) or collapsed variational updates (beta-dir family),
with a flat-split Dirichlet prior providing nonparametric self-pruning of
unused components.
"""

from .binmat import (BinaryMatrix, CsvFormat, HoldoutSplit, density,
                     load_csv, split_holdout, write_csv)
from .config import (HyperParams, ModelKind, RunConfig, default_betadir,
                     default_dirbeta, default_dirdir)
from .estimators import (FactorEstimate, SampleTrace, active_components,
                         estimate_betadir, estimate_cvb, estimate_dirdir,
                         merge_traces)
from .metrics import MetricReport, metric_report, neg_log_likelihood, perplexity
from .synth import SynthResult, generate, preset_hyper

__version__ = "0.1.0"

__all__ = [
    "BinaryMatrix", "CsvFormat", "HoldoutSplit", "density", "load_csv",
    "split_holdout", "write_csv",
    "HyperParams", "ModelKind", "RunConfig", "default_betadir",
    "default_dirbeta", "default_dirdir",
    "FactorEstimate", "SampleTrace", "active_components", "estimate_betadir",
    "estimate_cvb", "estimate_dirdir", "merge_traces",
    "MetricReport", "metric_report", "neg_log_likelihood", "perplexity",
    "SynthResult", "generate", "preset_hyper",
    "__version__",
]
