"""Seeded generation of Gaussian matrices, sparse signals, and noise.

All randomness flows through a counter-based generator (Philox) keyed by
64-bit seeds, so outputs are identical across platforms, runs, and thread
counts. Seeds for subtasks are derived with a splitmix64 chain, which makes
trial-level work embarrassingly parallel without coordinating streams.
"""

from __future__ import annotations

import numpy as np

from .linalg import SensingMatrix, SparseSignal

_MASK64 = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15


def _splitmix64(x):
    x = (x + _GOLDEN) & _MASK64
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & _MASK64
    return x ^ (x >> 31)


def derive_seed(base_seed, *parts):
    """Mix a base seed with integer parts into a new 64-bit seed.

    splitmix64 is applied to the base and then re-applied after folding in
    each part, so every (base, parts) tuple maps to its own stable stream
    key. Used to give each experiment cell, trial, and noise draw an
    independent seed without coordinating streams.
    """
    h = _splitmix64(int(base_seed) & _MASK64)
    for p in parts:
        h = _splitmix64(h ^ (int(p) & _MASK64))
    return h


def generator(seed):
    """A numpy Generator over the Philox counter-based bit stream."""
    return np.random.Generator(np.random.Philox(key=int(seed) & _MASK64))


def gaussian_matrix(m, n, seed):
    """An m x n matrix of i.i.d. standard normal entries, as a SensingMatrix.

    Entries are drawn in a fixed row-major order from the seeded stream, so
    the same seed yields bit-identical matrices everywhere.
    """
    m = int(m)
    n = int(n)
    if m < 1 or n < 1:
        raise ValueError("matrix dimensions must be positive")
    entries = generator(seed).standard_normal((m, n))
    return SensingMatrix.from_array(entries)


def sparse_signal(n, s, seed, distribution="gaussian"):
    """A random s-sparse signal of dimension n.

    The support is drawn uniformly without replacement; nonzero values are
    i.i.d. standard normal (default) or Rademacher +/-1. Gaussian values
    with magnitude below 1e-12 are redrawn so the support is unambiguous.
    """
    n = int(n)
    s = int(s)
    if not 1 <= s <= n:
        raise ValueError("sparsity must satisfy 1 <= s <= n")
    rng = generator(seed)
    support = np.sort(rng.choice(n, size=s, replace=False))
    if distribution == "gaussian":
        values = rng.standard_normal(s)
        small = np.abs(values) < 1e-12
        while np.any(small):
            values[small] = rng.standard_normal(int(np.sum(small)))
            small = np.abs(values) < 1e-12
    elif distribution == "rademacher":
        values = rng.integers(0, 2, size=s) * 2.0 - 1.0
    else:
        raise ValueError(f"unknown value distribution {distribution!r}")
    return SparseSignal(n, support, values)


def noise_vector(m, eps, seed):
    """A standard normal direction rescaled to Euclidean norm exactly eps."""
    eps = float(eps)
    if eps < 0:
        raise ValueError("noise level must be nonnegative")
    if eps == 0.0:
        return np.zeros(int(m))
    v = generator(seed).standard_normal(int(m))
    return v * (eps / float(np.linalg.norm(v)))


def add_noise(b, eps, seed):
    """Return b plus a seeded noise vector of norm exactly eps."""
    b = np.asarray(b, dtype=np.float64).ravel()
    if float(eps) == 0.0:
        return b.copy()
    return b + noise_vector(b.size, eps, seed)
