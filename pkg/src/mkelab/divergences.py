"""Sample divergences for the marginal penalty: Gaussian MMD^2 and energy distance.

Both are V-statistics, i.e. the divergence between the two empirical
measures themselves, so ``D(a, a) == 0`` and ``D >= 0``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._validation import as_points, check_same_dim

DIVERGENCE_KINDS = ("mmd-gaussian", "energy-distance")


@dataclass(frozen=True)
class DivergenceSpec:
    """``bandwidth`` is a positive float or ``"median"`` (resolved per fit)."""

    kind: str = "mmd-gaussian"
    bandwidth: object = "median"

    def __post_init__(self):
        if self.kind not in DIVERGENCE_KINDS:
            raise ValueError(f"unknown divergence {self.kind!r}; expected one of {DIVERGENCE_KINDS}")
        bw = self.bandwidth
        if bw != "median":
            try:
                bw = float(bw)
            except (TypeError, ValueError):
                raise ValueError(f"bandwidth must be 'median' or a positive number, got {bw!r}") from None
            if not bw > 0:
                raise ValueError("bandwidth must be > 0")
            object.__setattr__(self, "bandwidth", bw)

    @classmethod
    def from_config(cls, cfg):
        if isinstance(cfg, cls):
            return cfg
        if isinstance(cfg, str):
            return cls(cfg)
        return cls(cfg.get("kind", "mmd-gaussian"), cfg.get("bandwidth", "median"))

    def to_config(self):
        return {"kind": self.kind, "bandwidth": self.bandwidth}

    def resolve(self, a, b) -> "DivergenceSpec":
        """Fix a median-heuristic bandwidth from the pooled sample."""
        if self.kind != "mmd-gaussian" or self.bandwidth != "median":
            return self
        return DivergenceSpec(self.kind, median_bandwidth(a, b))


def _pairwise_dist(X, Y):
    diff = X[:, None, :] - Y[None, :, :]
    return np.sqrt(np.einsum("ijk,ijk->ij", diff, diff))


def median_bandwidth(a, b, fallback=1.0) -> float:
    """Median of pooled pairwise distances; ``fallback`` if that is zero."""
    P = np.vstack([as_points(a, "a"), as_points(b, "b")])
    iu = np.triu_indices(P.shape[0], k=1)
    d = _pairwise_dist(P, P)[iu]
    med = float(np.median(d)) if d.size else 0.0
    return med if med > 0 else fallback


def _check(spec, a, b):
    a, b = as_points(a, "a"), as_points(b, "b")
    check_same_dim(a, b, "sample sets")
    spec = DivergenceSpec.from_config(spec).resolve(a, b)
    return spec, a, b


def _gauss(X, Y, bw):
    diff = X[:, None, :] - Y[None, :, :]
    return np.exp(-np.einsum("ijk,ijk->ij", diff, diff) / (2.0 * bw * bw))


def divergence(spec, a, b) -> float:
    spec, a, b = _check(spec, a, b)
    if spec.kind == "mmd-gaussian":
        bw = spec.bandwidth
        val = _gauss(a, a, bw).mean() + _gauss(b, b, bw).mean() - 2.0 * _gauss(a, b, bw).mean()
    else:
        val = (2.0 * _pairwise_dist(a, b).mean() - _pairwise_dist(a, a).mean()
               - _pairwise_dist(b, b).mean())
    # V-statistics are nonnegative; clamp rounding noise only
    return max(float(val), 0.0)


def _unit(diff):
    norm = np.sqrt(np.einsum("ijk,ijk->ij", diff, diff))
    safe = np.where(norm > 0, norm, 1.0)
    return np.where(norm[..., None] > 0, diff / safe[..., None], 0.0)


def grad_divergence_a(spec, a, b) -> np.ndarray:
    """Gradient of ``divergence(spec, a, b)`` with respect to each point of ``a``."""
    spec, a, b = _check(spec, a, b)
    na, nb = a.shape[0], b.shape[0]
    daa = a[:, None, :] - a[None, :, :]
    dab = a[:, None, :] - b[None, :, :]
    if spec.kind == "mmd-gaussian":
        s2 = spec.bandwidth ** 2
        kaa = _gauss(a, a, spec.bandwidth)
        kab = _gauss(a, b, spec.bandwidth)
        g_aa = -(kaa[..., None] * daa).sum(axis=1) / s2
        g_ab = -(kab[..., None] * dab).sum(axis=1) / s2
        return 2.0 * g_aa / na ** 2 - 2.0 * g_ab / (na * nb)
    return 2.0 * _unit(dab).sum(axis=1) / (na * nb) - 2.0 * _unit(daa).sum(axis=1) / na ** 2
