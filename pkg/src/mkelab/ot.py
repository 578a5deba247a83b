"""Exact discrete optimal transport, dual potentials, c-transforms and Sinkhorn."""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy.optimize import linear_sum_assignment
from scipy.special import logsumexp

from ._simplex import SolverError, transport_simplex
from ._validation import as_vector, check_same_dim
from .costs import as_cost
from .measures import DiscreteMeasure

__all__ = [
    "Coupling",
    "DualPotentials",
    "NonFiniteCostError",
    "OTSolution",
    "SinkhornResult",
    "SolverError",
    "c_transform",
    "c_transform_points",
    "dual_objective",
    "duality_gap",
    "is_scaled_permutation",
    "sinkhorn",
    "solve_exact",
    "wasserstein_1d",
]

MARGINAL_TOL = 1e-9


class NonFiniteCostError(FloatingPointError):
    """The cost matrix overflowed or contains NaN."""


@dataclass(frozen=True, eq=False)
class Coupling:
    """Transport plan between two discrete measures."""

    plan: np.ndarray
    mu: DiscreteMeasure
    nu: DiscreteMeasure

    def __post_init__(self):
        plan = np.array(self.plan, dtype=float)
        if plan.shape != (self.mu.n_atoms, self.nu.n_atoms):
            raise ValueError(
                f"plan shape {plan.shape} does not match supports "
                f"({self.mu.n_atoms}, {self.nu.n_atoms})"
            )
        if np.any(plan < 0):
            raise ValueError("plan has negative entries")
        row_err = np.abs(plan.sum(axis=1) - self.mu.weights).sum()
        col_err = np.abs(plan.sum(axis=0) - self.nu.weights).sum()
        if row_err > MARGINAL_TOL or col_err > MARGINAL_TOL:
            raise ValueError(
                f"plan marginals off by {row_err:.3g} (rows) / {col_err:.3g} (cols)"
            )
        plan.flags.writeable = False
        object.__setattr__(self, "plan", plan)

    def cost(self, C) -> float:
        return float(np.sum(C * self.plan))


@dataclass(frozen=True, eq=False)
class DualPotentials:
    """Kantorovich potentials on the two supports: ``h`` on mu, ``h_tilde`` on nu."""

    h: np.ndarray
    h_tilde: np.ndarray

    def max_violation(self, C) -> float:
        """Largest ``h_i + h_tilde_j - C_ij``; nonpositive when feasible."""
        return float(np.max(self.h[:, None] + self.h_tilde[None, :] - C))


@dataclass(frozen=True, eq=False)
class OTSolution:
    coupling: Coupling
    duals: DualPotentials
    primal_value: float
    dual_value: float
    cost_matrix: np.ndarray
    method: str = "simplex"

    @property
    def value(self) -> float:
        return self.primal_value

    @property
    def plan(self) -> np.ndarray:
        return self.coupling.plan


def dual_objective(duals: DualPotentials, mu: DiscreteMeasure, nu: DiscreteMeasure) -> float:
    return float(mu.weights @ duals.h + nu.weights @ duals.h_tilde)


def duality_gap(sol: OTSolution) -> float:
    """``|primal - dual|`` of a solution record."""
    return abs(sol.primal_value - sol.dual_value)


def is_scaled_permutation(plan, atol=1e-12) -> bool:
    """True when ``plan`` is square with exactly one nonzero per row and column."""
    plan = np.asarray(plan)
    n, m = plan.shape
    if n != m:
        return False
    support = plan > atol
    return bool(np.all(support.sum(axis=0) == 1) and np.all(support.sum(axis=1) == 1))


def _karp_min_mean_cycle(W):
    """Minimum mean cycle weight of the dense digraph ``W`` (inf = no edge)."""
    n = W.shape[0]
    D = np.empty((n + 1, n))
    D[0] = 0.0
    for k in range(1, n + 1):
        D[k] = np.min(D[k - 1][:, None] + W, axis=0)
    with np.errstate(invalid="ignore"):
        ratios = (D[n][None, :] - D[:n]) / (n - np.arange(n))[:, None]
    ratios = np.where(np.isnan(ratios), -np.inf, ratios)
    return float(np.min(np.max(ratios, axis=0)))


def _assignment_duals(C, perm):
    """Optimal potentials for a permutation plan, centred in the optimal face.

    With row potential ``u`` and ``v[perm[k]] = C[k, perm[k]] - u[k]``, the
    remaining constraints are the difference constraints
    ``u[i] - u[k] <= C[i, perm[k]] - C[k, perm[k]] - t``. The largest uniform
    slack ``t`` is the minimum mean cycle; half of it is used so that every
    cell off the matching is strictly slack whenever the matching is the
    unique optimum. That makes the c-transform argmin unambiguous.
    """
    n = C.shape[0]
    if n == 1:
        u = np.zeros(1)
    else:
        matched = C[np.arange(n), perm]
        W = C[:, perm].T - matched[:, None]  # W[k, i]: edge k -> i
        np.fill_diagonal(W, np.inf)
        t = _karp_min_mean_cycle(W)
        t = 0.5 * t if np.isfinite(t) and t > 0 else 0.0
        Wt = W - t
        dist = np.zeros(n)
        for _ in range(n):
            new = np.minimum(dist, np.min(dist[:, None] + Wt, axis=0))
            if np.array_equal(new, dist):
                break
            dist = new
        u = dist - dist[0]
    v = np.empty(n)
    v[perm] = C[np.arange(n), perm] - u
    return u, v


def solve_exact(mu: DiscreteMeasure, nu: DiscreteMeasure, c="sqeuclidean", method="auto",
                max_iter=None) -> OTSolution:
    """Exact optimal transport between two discrete measures.

    Parameters
    ----------
    mu, nu : DiscreteMeasure
    c : GroundCost or str
    method : {"auto", "simplex", "assignment"}
        ``assignment`` (Hungarian matching plus shortest-path potentials)
        needs uniform weights and equal atom counts; ``auto`` uses it when
        applicable and the transportation simplex otherwise.

    Returns
    -------
    OTSolution
        Optimal coupling, potentials with ``h[0] = 0``, and both objective
        values.
    """
    c = as_cost(c)
    check_same_dim(mu.points, nu.points, "mu and nu")
    with np.errstate(over="ignore", invalid="ignore"):
        C = c.pairwise(mu.points, nu.points)
    if not np.all(np.isfinite(C)):
        raise NonFiniteCostError("cost matrix has non-finite entries")
    n, m = C.shape
    assignable = n == m and mu.is_uniform() and nu.is_uniform()
    if method == "auto":
        method = "assignment" if assignable else "simplex"
    if method == "assignment":
        if not assignable:
            raise ValueError("assignment method needs uniform measures of equal size")
        rows, perm = linear_sum_assignment(C)
        plan = np.zeros((n, n))
        plan[rows, perm] = mu.weights
        u, v = _assignment_duals(C, perm)
    elif method == "simplex":
        plan, u, v, _ = transport_simplex(mu.weights, nu.weights, C, max_iter=max_iter)
    else:
        raise ValueError(f"unknown method {method!r}")
    coupling = Coupling(plan, mu, nu)
    duals = DualPotentials(u, v)
    primal = float(np.sum(C * plan))
    dual = dual_objective(duals, mu, nu)
    if duals.max_violation(C) > 1e-9 * (1.0 + np.abs(C).max()):
        raise SolverError(f"{method} returned infeasible potentials on a {n}x{m} instance")
    return OTSolution(coupling, duals, primal, dual, C, method)


def c_transform_points(h_tilde, Y, c, X):
    """Vectorised c-transform: values and argmin indices at the rows of ``X``.

    ``h(x) = min_j c(x, y_j) - h_tilde[j]``; ties go to the lowest index.
    """
    vals = as_cost(c).pairwise(X, Y) - h_tilde[None, :]
    idx = np.argmin(vals, axis=1)
    return vals[np.arange(X.shape[0]), idx], idx


def c_transform(h_tilde, nu: DiscreteMeasure, c, x) -> float:
    """Tightest potential at ``x`` compatible with ``h_tilde`` on supp nu."""
    h_tilde = as_vector(h_tilde, "h_tilde")
    if h_tilde.shape[0] != nu.n_atoms:
        raise ValueError(f"h_tilde has length {h_tilde.shape[0]}, nu has {nu.n_atoms} atoms")
    x = as_vector(x, "x")
    check_same_dim(x, nu.points, "x and nu")
    vals, _ = c_transform_points(h_tilde, nu.points, c, x[None, :])
    return float(vals[0])


def wasserstein_1d(mu: DiscreteMeasure, nu: DiscreteMeasure, c="sqeuclidean") -> float:
    """Cost of the monotone (sorted) matching between two uniform 1-D measures."""
    if mu.dim != 1 or nu.dim != 1:
        raise ValueError("wasserstein_1d needs 1-D measures")
    if mu.n_atoms != nu.n_atoms:
        raise ValueError("wasserstein_1d needs equal atom counts")
    if not (mu.is_uniform() and nu.is_uniform()):
        raise ValueError("wasserstein_1d needs uniform weights")
    x = np.sort(mu.points[:, 0])
    y = np.sort(nu.points[:, 0])
    return float(np.mean(as_cost(c).rowwise(x[:, None], y[:, None])))


class SinkhornResult(NamedTuple):
    plan: np.ndarray
    value: float
    converged: bool
    n_iter: int
    marginal_error: float


def sinkhorn(mu: DiscreteMeasure, nu: DiscreteMeasure, c="sqeuclidean", epsilon=1e-2,
             max_iter=10_000, tol=1e-9) -> SinkhornResult:
    """Entropic OT by log-domain Sinkhorn iterations.

    The plan is ``a_i b_j exp((f_i + g_j - C_ij) / epsilon)``. Iteration
    stops once the L1 row-marginal violation drops below ``tol``; when
    ``max_iter`` is hit first the last iterate is returned with
    ``converged=False``. ``value`` is the unregularised cost ``<C, plan>``.
    """
    if not epsilon > 0:
        raise ValueError("epsilon must be > 0")
    check_same_dim(mu.points, nu.points, "mu and nu")
    C = as_cost(c).pairwise(mu.points, nu.points)
    with np.errstate(divide="ignore"):
        loga, logb = np.log(mu.weights), np.log(nu.weights)
    f = np.zeros(C.shape[0])
    g = np.zeros(C.shape[1])
    err = np.inf
    it = 0
    for it in range(1, max_iter + 1):
        f = -epsilon * logsumexp(logb[None, :] + (g[None, :] - C) / epsilon, axis=1)
        g = -epsilon * logsumexp(loga[:, None] + (f[:, None] - C) / epsilon, axis=0)
        logp = loga[:, None] + logb[None, :] + (f[:, None] + g[None, :] - C) / epsilon
        plan = np.exp(logp)
        err = float(np.abs(plan.sum(axis=1) - mu.weights).sum())
        if err <= tol:
            return SinkhornResult(plan, float(np.sum(C * plan)), True, it, err)
    return SinkhornResult(plan, float(np.sum(C * plan)), False, it, err)

