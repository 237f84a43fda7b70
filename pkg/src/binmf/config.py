"""Model selection and hyperparameter containers.

Three generative constraints keep the factor product a valid Bernoulli
mean: rows of W on the simplex with H entries in [0,1] (beta-dir), the
transpose-symmetric arrangement (dir-beta), or both factors simplex-
constrained (dir-dir). dir-beta never gets its own inference code path:
fitting it means fitting beta-dir to the transposed matrix with the factor
roles swapped.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np


class ModelKind(enum.Enum):
    BETA_DIR = "beta-dir"
    DIR_BETA = "dir-beta"
    DIR_DIR = "dir-dir"

    @classmethod
    def parse(cls, text: str) -> "ModelKind":
        for kind in cls:
            if kind.value == text:
                return kind
        raise ValueError(f"unknown model kind {text!r}; expected one of "
                         f"{[k.value for k in cls]}")


def _as_param_vector(value, k: int, name: str) -> np.ndarray | None:
    if value is None:
        return None
    vec = np.broadcast_to(np.asarray(value, dtype=np.float64), (k,)).copy()
    if not np.all(np.isfinite(vec)) or np.any(vec <= 0.0):
        raise ValueError(f"{name} entries must be strictly positive finite reals")
    vec.flags.writeable = False
    return vec


@dataclass(frozen=True)
class HyperParams:
    """Per-component prior parameters at truncation level k_max.

    alpha/beta parameterize the [0,1]-valued factor entries, gamma the
    simplex rows of W, eta the simplex columns of H. Fields not used by a
    model kind may be None. In nonparametric mode the gamma vector must be
    the flat gamma_total / k_max so that unused components self-prune.
    """

    k_max: int
    alpha: np.ndarray | None = None
    beta: np.ndarray | None = None
    gamma: np.ndarray | None = None
    eta: np.ndarray | None = None
    nonparametric: bool = False

    def __post_init__(self):
        if self.k_max < 1:
            raise ValueError(f"k_max must be >= 1, got {self.k_max}")
        for name in ("alpha", "beta", "gamma", "eta"):
            object.__setattr__(self, name,
                               _as_param_vector(getattr(self, name), self.k_max, name))
        if self.nonparametric:
            if self.gamma is None:
                raise ValueError("nonparametric mode requires gamma")
            if np.ptp(self.gamma) != 0.0:
                raise ValueError("nonparametric mode requires a flat gamma vector "
                                 "(gamma_total / k_max in every entry)")

    def require(self, *names: str) -> "HyperParams":
        for name in names:
            if getattr(self, name) is None:
                raise ValueError(f"hyperparameters are missing {name!r}")
        return self


def default_betadir(k: int, nonparametric: bool) -> HyperParams:
    """Flat priors: alpha = beta = 1; gamma = 1/K (nonparametric) or 1."""
    if k < 1:
        raise ValueError(f"K must be >= 1, got {k}")
    gamma = 1.0 / k if nonparametric else 1.0
    return HyperParams(k_max=k, alpha=1.0, beta=1.0, gamma=gamma,
                       nonparametric=nonparametric)


def default_dirdir(k: int, nonparametric: bool) -> HyperParams:
    """Flat priors: eta = 1; gamma = 1/K (nonparametric) or 1."""
    if k < 1:
        raise ValueError(f"K must be >= 1, got {k}")
    gamma = 1.0 / k if nonparametric else 1.0
    return HyperParams(k_max=k, gamma=gamma, eta=1.0,
                       nonparametric=nonparametric)


def default_dirbeta(k: int, nonparametric: bool) -> HyperParams:
    """Transpose-symmetric counterpart of default_betadir (eta plays
    gamma's role on the transposed matrix)."""
    if k < 1:
        raise ValueError(f"K must be >= 1, got {k}")
    eta = 1.0 / k if nonparametric else 1.0
    # nonparametric flag is not set: its gamma-flatness invariant is about
    # gamma; dir-beta fitting re-expresses eta as gamma on the transpose.
    return HyperParams(k_max=k, alpha=1.0, beta=1.0, eta=eta,
                       nonparametric=False)


@dataclass(frozen=True)
class RunConfig:
    """Inference schedule shared by the samplers and the variational loop.

    burn_in sweeps are discarded, then kept_samples snapshots are taken
    every `thin` sweeps. The variational loop runs vb_iterations full
    passes. All randomness flows from `seed`.
    """

    burn_in: int = 4000
    kept_samples: int = 1000
    vb_iterations: int = 500
    seed: int = 0
    thin: int = 1

    def __post_init__(self):
        if self.burn_in < 0:
            raise ValueError("burn_in must be >= 0")
        if self.kept_samples < 1:
            raise ValueError("kept_samples must be >= 1")
        if self.thin < 1:
            raise ValueError("thin must be >= 1")
        if self.vb_iterations < 1:
            raise ValueError("vb_iterations must be >= 1")


def load_config_file(path) -> dict:
    """Parse a flat `key = value` config file.

    Lines starting with '#' and blank lines are skipped. Values are
    coerced to bool ("true"/"false"), int, or float when they look like
    one; everything else stays a string.
    """
    out = {}
    with open(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{lineno}: expected 'key = value', got {line!r}")
            key, _, value = line.partition("=")
            out[key.strip()] = _coerce(value.strip())
    return out


def save_config_file(path, mapping: dict) -> None:
    with open(path, "w") as fh:
        for key, value in mapping.items():
            if isinstance(value, bool):
                value = "true" if value else "false"
            fh.write(f"{key} = {value}\n")


def _coerce(text: str):
    low = text.lower()
    if low == "true":
        return True
    if low == "false":
        return False
    try:
        return int(text)
    except ValueError:
        pass
    try:
        return float(text)
    except ValueError:
        pass
    return text
