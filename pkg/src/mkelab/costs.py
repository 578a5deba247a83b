"""Ground costs ``c(x, y)``, their first-argument gradients and cost matrices."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._validation import as_points, as_vector, check_same_dim

COST_KINDS = ("sqeuclidean", "euclidean")
_ALIASES = {"squared-euclidean": "sqeuclidean", "sqeuclidean": "sqeuclidean",
            "euclidean": "euclidean"}


@dataclass(frozen=True)
class GroundCost:
    """``sqeuclidean``: ``|x - y|^2``; ``euclidean``: ``|x - y|``."""

    kind: str = "sqeuclidean"

    def __post_init__(self):
        try:
            object.__setattr__(self, "kind", _ALIASES[self.kind])
        except (KeyError, TypeError):
            raise ValueError(
                f"unknown cost kind {self.kind!r}; expected one of {COST_KINDS}"
            ) from None

    def __str__(self):
        return self.kind

    def pairwise(self, X, Y) -> np.ndarray:
        """Cost matrix between the rows of ``X`` (n, d) and ``Y`` (m, d)."""
        diff = X[:, None, :] - Y[None, :, :]
        sq = np.einsum("ijk,ijk->ij", diff, diff)
        return sq if self.kind == "sqeuclidean" else np.sqrt(sq)

    def pairwise_grad1(self, X, Y) -> np.ndarray:
        """Gradients ``grad_1 c(x_i, y_j)`` stacked as an (n, m, d) array."""
        diff = X[:, None, :] - Y[None, :, :]
        if self.kind == "sqeuclidean":
            return 2.0 * diff
        norm = np.sqrt(np.einsum("ijk,ijk->ij", diff, diff))
        safe = np.where(norm > 0, norm, 1.0)
        # zero subgradient on the diagonal x == y
        return np.where(norm[..., None] > 0, diff / safe[..., None], 0.0)

    def rowwise(self, X, Y) -> np.ndarray:
        """``c(x_i, y_i)`` for paired rows."""
        diff = X - Y
        sq = np.einsum("ij,ij->i", diff, diff)
        return sq if self.kind == "sqeuclidean" else np.sqrt(sq)

    def rowwise_grad1(self, X, Y) -> np.ndarray:
        diff = X - Y
        if self.kind == "sqeuclidean":
            return 2.0 * diff
        norm = np.sqrt(np.einsum("ij,ij->i", diff, diff))
        safe = np.where(norm > 0, norm, 1.0)
        return np.where(norm[:, None] > 0, diff / safe[:, None], 0.0)


def as_cost(c) -> GroundCost:
    return c if isinstance(c, GroundCost) else GroundCost(c)


def cost(c, x, y) -> float:
    c = as_cost(c)
    x, y = as_vector(x, "x"), as_vector(y, "y")
    check_same_dim(x, y, "x and y")
    return float(c.rowwise(x[None, :], y[None, :])[0])


def grad1(c, x, y) -> np.ndarray:
    """Gradient of ``c(., y)`` at ``x``; the zero vector at ``x == y`` for euclidean."""
    c = as_cost(c)
    x, y = as_vector(x, "x"), as_vector(y, "y")
    check_same_dim(x, y, "x and y")
    return c.rowwise_grad1(x[None, :], y[None, :])[0]


def cost_matrix(c, mu, nu) -> np.ndarray:
    """Matrix ``C[i, j] = c(x_i, y_j)`` over the supports of two measures.

    ``mu`` and ``nu`` may be :class:`DiscreteMeasure` instances or raw point
    arrays.
    """
    X = as_points(getattr(mu, "points", mu), "mu")
    Y = as_points(getattr(nu, "points", nu), "nu")
    check_same_dim(X, Y, "supports")
    return as_cost(c).pairwise(X, Y)
