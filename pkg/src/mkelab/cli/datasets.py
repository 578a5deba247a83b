"""Synthetic data families for experiments."""

import numpy as np
from sklearn.datasets import make_moons

FAMILIES = ("two-moons", "gaussian-blob", "1d-grid")


def make_dataset(family, n, noise=0.0, seed=0, dim=2, center=None, scale=1.0):
    """Return an (n, dim) point array from a named synthetic family.

    ``two-moons``: two interleaved half circles in 2-D; ``gaussian-blob``:
    isotropic Gaussian with standard deviation ``scale`` around ``center``;
    ``1d-grid``: ``n`` equispaced points on [0, 1]. ``noise`` adds Gaussian
    jitter with that standard deviation.
    """
    n = int(n)
    if n < 1:
        raise ValueError("dataset size n must be >= 1")
    rng = np.random.default_rng(seed)
    if family == "two-moons":
        X, _ = make_moons(n_samples=n, noise=None, random_state=int(seed) % 2**32)
    elif family == "gaussian-blob":
        c = np.zeros(dim) if center is None else np.asarray(center, dtype=float)
        X = c + scale * rng.standard_normal((n, int(dim)))
    elif family == "1d-grid":
        X = np.linspace(0.0, 1.0, n).reshape(-1, 1)
    else:
        raise ValueError(f"unknown synthetic family {family!r}; expected one of {FAMILIES}")
    if noise:
        X = X + noise * rng.standard_normal(X.shape)
    return X
