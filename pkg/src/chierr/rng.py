"""Reproducible random streams.

Every random draw in the package goes through :func:`stream`, which keys a
counter-based Philox generator by a tuple of non-negative integers.  Results
therefore depend only on the key, not on execution order, so work split
across threads or processes reproduces the serial result exactly.
"""
from __future__ import annotations

import os

import numpy as np

DEFAULT_SEED = 0


def default_seed() -> int:
    """``CHI_SEED`` from the environment, else :data:`DEFAULT_SEED`."""
    value = os.environ.get("CHI_SEED")
    return int(value) if value not in (None, "") else DEFAULT_SEED


def stream(*key: int) -> np.random.Generator:
    if any(int(k) < 0 for k in key):
        raise ValueError("stream keys must be non-negative integers")
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([int(k) for k in key])))
