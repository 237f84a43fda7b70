"""Seeded random-stream helpers.

Every stochastic entry point takes an integer seed; independent streams
(parallel chains, restarts) are derived from one base seed so a single
manifest value reproduces a whole run.
"""

from __future__ import annotations

import numpy as np


def rng_from(seed: int) -> np.random.Generator:
    return np.random.default_rng(seed)


def chain_seeds(base_seed: int, n_chains: int) -> list[int]:
    """Derive per-chain seeds from a base seed.

    Chain i gets stream i. A single chain keeps the base seed itself so
    that one-chain CLI runs match direct library calls bit for bit.
    """
    if n_chains < 1:
        raise ValueError("n_chains must be >= 1")
    if n_chains == 1:
        return [base_seed]
    words = np.random.SeedSequence(base_seed).generate_state(n_chains, np.uint64)
    return [int(w) for w in words]
