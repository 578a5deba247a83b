"""Discrete probability measures, latent samplers and pushforwards."""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ._validation import as_points

WEIGHT_TOL = 1e-12
RENORMALIZE_TOL = 1e-9
ROUNDING_TOL = 1e-12

LATENT_FAMILIES = ("uniform-box", "standard-gaussian")


@dataclass(frozen=True, eq=False)
class DiscreteMeasure:
    """Finitely supported probability measure ``sum_i w_i delta_{x_i}``.

    Parameters
    ----------
    points : array-like, shape (n, d)
        Atom locations. A 1-D array is read as ``n`` atoms in dimension 1.
    weights : array-like, shape (n,)
        Nonnegative masses. Totals within 1e-9 of one are renormalized,
        anything further off is rejected.
    """

    points: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        points = as_points(self.points, name="points")
        weights = np.asarray(self.weights, dtype=float).reshape(-1)
        if weights.shape[0] != points.shape[0]:
            raise ValueError(
                f"got {weights.shape[0]} weights for {points.shape[0]} points"
            )
        if not np.all(np.isfinite(weights)) or np.any(weights < 0):
            raise ValueError("weights must be finite and nonnegative")
        total = weights.sum()
        if abs(total - 1.0) > RENORMALIZE_TOL:
            raise ValueError(f"weights sum to {total!r}, expected 1")
        # rounding-level drift is left alone so re-wrapping weights is exact
        if abs(total - 1.0) > ROUNDING_TOL:
            weights = weights / total
        points = points.copy()
        points.flags.writeable = False
        weights.flags.writeable = False
        object.__setattr__(self, "points", points)
        object.__setattr__(self, "weights", weights)

    @property
    def n_atoms(self) -> int:
        return self.points.shape[0]

    @property
    def dim(self) -> int:
        return self.points.shape[1]

    def is_uniform(self) -> bool:
        return bool(np.all(self.weights == self.weights[0]))

    def __len__(self):
        return self.n_atoms

    def __repr__(self):
        return f"DiscreteMeasure(n_atoms={self.n_atoms}, dim={self.dim})"


def empirical(points) -> DiscreteMeasure:
    """Uniform measure ``(1/n) sum_j delta_{y_j}`` on the given points."""
    points = as_points(points, name="points")
    n = points.shape[0]
    return DiscreteMeasure(points, np.full(n, 1.0 / n))


def pushforward(g, mu: DiscreteMeasure) -> DiscreteMeasure:
    """Move every atom of ``mu`` through ``g``, keeping its weight.

    ``g`` is a :class:`~mkelab.models.ParamMap` or any callable mapping an
    ``(n, d)`` array to an ``(n, p)`` array. Coincident images are kept as
    separate atoms so that atom ``i`` of the result is the image of atom ``i``.
    """
    fn = g.forward if hasattr(g, "forward") else g
    expected = getattr(g, "input_dim", None)
    if expected is not None and expected != mu.dim:
        raise ValueError(f"map expects dimension {expected}, measure has {mu.dim}")
    out = as_points(fn(mu.points), name="pushforward image")
    if out.shape[0] != mu.n_atoms:
        raise ValueError("map must return one image per atom")
    return DiscreteMeasure(out, mu.weights)


@dataclass
class LatentSampler:
    """Seeded sampler for the latent distribution.

    ``uniform-box`` draws from ``[low, high]^dim``; ``standard-gaussian``
    from ``N(0, I_dim)``. Each instance owns one random stream, so two
    samplers built with the same arguments produce identical draws.
    """

    family: str
    dim: int
    seed: int = 0
    low: float = 0.0
    high: float = 1.0
    _rng: np.random.Generator = field(init=False, repr=False)

    def __post_init__(self):
        if self.family not in LATENT_FAMILIES:
            raise ValueError(
                f"unknown latent family {self.family!r}; expected one of {LATENT_FAMILIES}"
            )
        if int(self.dim) < 1:
            raise ValueError("latent dimension must be >= 1")
        if self.family == "uniform-box" and not self.high > self.low:
            raise ValueError("uniform-box needs high > low")
        self.dim = int(self.dim)
        self._rng = np.random.Generator(np.random.PCG64(int(self.seed) % 2**64))

    def sample(self, m: int) -> np.ndarray:
        if int(m) < 1:
            raise ValueError("cannot draw an empty latent sample (m must be >= 1)")
        shape = (int(m), self.dim)
        if self.family == "uniform-box":
            return self._rng.uniform(self.low, self.high, size=shape)
        return self._rng.standard_normal(shape)

    def mean(self) -> np.ndarray:
        if self.family == "uniform-box":
            return np.full(self.dim, 0.5 * (self.low + self.high))
        return np.zeros(self.dim)

    def std(self) -> np.ndarray:
        if self.family == "uniform-box":
            return np.full(self.dim, (self.high - self.low) / np.sqrt(12.0))
        return np.ones(self.dim)


def sample(sampler: LatentSampler, m: int) -> np.ndarray:
    return sampler.sample(m)


def _fmt_header(d: int) -> list[str]:
    return ["w"] + [f"x_{k + 1}" for k in range(d)]


def read_measure_csv(path) -> DiscreteMeasure:
    """Read a measure from CSV with header ``w,x_1,...,x_d``."""
    path = Path(path)
    with path.open(newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise ValueError(f"{path}: empty file")
    header = [h.strip() for h in rows[0]]
    d = len(header) - 1
    if d < 1 or header != _fmt_header(d):
        raise ValueError(f"{path}: header must be 'w,x_1,...,x_d', got {rows[0]}")
    body = [r for r in rows[1:] if r and any(c.strip() for c in r)]
    if not body:
        raise ValueError(f"{path}: no atoms")
    try:
        data = np.array([[float(c) for c in r] for r in body])
    except ValueError as exc:
        raise ValueError(f"{path}: {exc}") from None
    if data.ndim != 2 or data.shape[1] != d + 1:
        raise ValueError(f"{path}: ragged rows")
    return DiscreteMeasure(data[:, 1:], data[:, 0])


def write_measure_csv(mu: DiscreteMeasure, path) -> None:
    from .io import format_float

    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(_fmt_header(mu.dim))
        for w, x in zip(mu.weights, mu.points):
            writer.writerow([format_float(w)] + [format_float(v) for v in x])
