"""The fitting energy ``E(theta) = W_c(g_theta # latent, data)`` and its gradients."""

from __future__ import annotations

import numpy as np

from ..measures import DiscreteMeasure
from ..ot import NonFiniteCostError, c_transform_points, is_scaled_permutation, solve_exact
from ._config import SEMIDUAL, FitConfig, NonFiniteObjectiveError, child_seed


def _pushed(theta, cfg: FitConfig):
    g = cfg.generator.with_params(theta)
    with np.errstate(over="ignore", invalid="ignore"):
        X = g.forward(cfg.latent)
    if not np.all(np.isfinite(X)):
        raise NonFiniteObjectiveError("generator produced non-finite points")
    mu = DiscreteMeasure(X, np.full(cfg.m, 1.0 / cfg.m))
    return g, X, mu


def _solve(mu, cfg: FitConfig):
    try:
        return solve_exact(mu, cfg.data, cfg.cost)
    except NonFiniteCostError as exc:
        raise NonFiniteObjectiveError(f"energy is not finite: {exc}") from None


def solve_energy(theta, cfg: FitConfig):
    """Exact OT between the pushed latent sample and the data; returns (solution, points)."""
    _, X, mu = _pushed(theta, cfg)
    return _solve(mu, cfg), X


def true_energy(theta, cfg: FitConfig) -> float:
    """``W_c(g_theta # latent, data)`` on the frozen latent sample."""
    return solve_energy(theta, cfg)[0].primal_value


def _primal_grad(g, X, sol, cfg):
    G = cfg.cost.pairwise_grad1(X, cfg.data.points)
    V = np.einsum("ij,ijk->ik", sol.plan, G)
    return g.vjp_params(cfg.latent, V)


def energy_and_grad_primal(theta, cfg: FitConfig):
    """Energy and its gradient integrated against the optimal coupling."""
    g, X, mu = _pushed(theta, cfg)
    sol = _solve(mu, cfg)
    return sol.primal_value, _primal_grad(g, X, sol, cfg)


def grad_energy_primal(theta, cfg: FitConfig) -> np.ndarray:
    return energy_and_grad_primal(theta, cfg)[1]


def grad_energy_dual(theta, cfg: FitConfig) -> np.ndarray:
    """Gradient through the optimal potential on the generated points.

    The potential on generated points is the c-transform of the optimal
    data-side potential, so its gradient at ``x_i`` is
    ``grad_1 c(x_i, y_j*)`` with ``j*`` the (lowest-index) argmin.
    """
    g, X, mu = _pushed(theta, cfg)
    sol = _solve(mu, cfg)
    _, jstar = c_transform_points(sol.duals.h_tilde, cfg.data.points, cfg.cost, X)
    V = cfg.cost.rowwise_grad1(X, cfg.data.points[jstar]) * mu.weights[:, None]
    return g.vjp_params(cfg.latent, V)


def finite_difference_grad(theta, cfg: FitConfig, step=1e-4, return_plans=False):
    """Central differences of :func:`true_energy`, one coordinate at a time."""
    theta = np.asarray(theta, dtype=float)
    grad = np.empty_like(theta)
    plans = []
    for k in range(theta.shape[0]):
        e = np.zeros_like(theta)
        e[k] = step
        sp, _ = solve_energy(theta + e, cfg)
        sm, _ = solve_energy(theta - e, cfg)
        grad[k] = (sp.primal_value - sm.primal_value) / (2.0 * step)
        plans += [sp.plan, sm.plan]
    return (grad, plans) if return_plans else grad


def is_nondegenerate(theta, cfg: FitConfig, fd_plans=None) -> bool:
    """The optimal plan is a scaled permutation that stays put under the FD probes."""
    sol, _ = solve_energy(theta, cfg)
    if not is_scaled_permutation(sol.plan):
        return False
    if fd_plans is None:
        return True
    support = sol.plan > 0
    return all(np.array_equal(p > 0, support) for p in fd_plans)


def semidual_objective(h_tilde, C, a, b) -> float:
    """``sum_i a_i min_j (C_ij - h_tilde_j) + sum_j b_j h_tilde_j``."""
    return float(a @ np.min(C - h_tilde[None, :], axis=1) + b @ h_tilde)


def semidual_ascent(C, a, b, n_iter=10_000, step=1.0, seed=0, eval_every=10):
    """Averaged stochastic supergradient ascent on the semi-dual.

    Each step samples one generated point ``i`` with probability ``a_i``;
    the supergradient is ``b - e_{j*}``. Step sizes decay as
    ``step / sqrt(k + 1)`` and the running average of iterates is scored on
    the full objective every ``eval_every`` steps and at the end. The
    checkpoint schedule does not depend on ``n_iter``, so with a fixed seed
    the returned value is nondecreasing in the budget.

    Returns
    -------
    h_tilde : ndarray
        Best averaged iterate seen.
    value : float
        Its semi-dual objective, a lower bound on the OT value.
    """
    C = np.asarray(C, dtype=float)
    m, n = C.shape
    rng = np.random.default_rng(seed)
    h = np.zeros(n)
    avg = np.zeros(n)
    best_val, best_h = semidual_objective(avg, C, a, b), avg.copy()
    # inverse-CDF draws keep the stream a prefix of any longer run
    cdf = np.cumsum(a)
    idx = np.minimum(np.searchsorted(cdf, rng.random(n_iter) * cdf[-1], side="right"), m - 1)
    for k in range(n_iter):
        i = idx[k]
        j = int(np.argmin(C[i] - h))
        grad = b.copy()
        grad[j] -= 1.0
        h += step / np.sqrt(k + 1.0) * grad
        avg += (h - avg) / (k + 1.0)
        if (k + 1) % eval_every == 0 or k + 1 == n_iter:
            val = semidual_objective(avg, C, a, b)
            if not np.isfinite(val):
                raise NonFiniteObjectiveError(f"semi-dual ascent diverged at step {k + 1} (value {val})")
            if val > best_val:
                best_val, best_h = val, avg.copy()
    return best_h, best_val


def semidual_sgd(theta, cfg: FitConfig, n_iter=None):
    """Estimate ``E(theta)`` from below by stochastic semi-dual ascent."""
    _, X, mu = _pushed(theta, cfg)
    C = cfg.cost.pairwise(X, cfg.data.points)
    return semidual_ascent(C, mu.weights, cfg.data.weights,
                           n_iter=cfg.semidual_iter if n_iter is None else n_iter,
                           step=cfg.semidual_step, seed=child_seed(cfg.seed, SEMIDUAL))
