"""Fitting loops for the three estimators: MKE, WGAN and WVAE."""

from __future__ import annotations

import time

import numpy as np

from ..divergences import DivergenceSpec, divergence, grad_divergence_a
from ..measures import DiscreteMeasure
from ..ot import solve_exact
from ._config import WGAN_VARIANTS, FitConfig, FitResult, NonFiniteObjectiveError
from .energy import energy_and_grad_primal, true_energy


def _finite_or_raise(what, k, *values):
    for v in values:
        if not np.all(np.isfinite(v)):
            raise NonFiniteObjectiveError(f"{what}: non-finite value at iteration {k}")


def fit_mke(cfg: FitConfig, theta0=None) -> FitResult:
    """Gradient descent on the exact energy using the primal gradient.

    ``trace[k]`` is the energy at the iterate before step ``k``.
    """
    t0 = time.perf_counter()
    theta = np.array(cfg.generator.params if theta0 is None else theta0, dtype=float)
    trace = np.empty(cfg.n_iter)
    history = np.empty((cfg.n_iter, theta.shape[0]))
    for k in range(cfg.n_iter):
        E, grad = energy_and_grad_primal(theta, cfg)
        _finite_or_raise("fit_mke", k, E, grad)
        trace[k] = E
        history[k] = theta
        theta = theta - cfg.step * grad
    E_final = true_energy(theta, cfg)
    _finite_or_raise("fit_mke", cfg.n_iter, E_final)
    return FitResult(
        estimator="mke",
        params={"theta": theta},
        trace=trace,
        final_objective=E_final,
        true_energy=E_final,
        wallclock_s=time.perf_counter() - t0,
        extras={"theta_history": history},
        energy_trace=trace.copy(),
        config=cfg.summary(),
    )


# -- WGAN ---------------------------------------------------------------------

def feasible_dual_value(h_vals_x, X, cfg: FitConfig) -> float:
    """Dual objective of the pair (h, h^c) on the generated support.

    ``h^c(y_j) = min_i c(x_i, y_j) - h(x_i)``, so the pair is feasible for
    the discrete transport problem and the value never exceeds ``E``.
    """
    C = cfg.cost.pairwise(X, cfg.data.points)
    hc = np.min(C - h_vals_x[:, None], axis=0)
    return float(np.mean(h_vals_x) + cfg.data.weights @ hc)


def wgan_objective(h, X, cfg: FitConfig, variant: str):
    """Inner objective and its gradient in the potential parameters."""
    m = X.shape[0]
    w = np.full((m, 1), 1.0 / m)
    hx = h.forward(X)[:, 0]
    if variant == "lipschitz-neg":
        Y, b = cfg.data.points, cfg.data.weights
        val = float(np.mean(hx) - b @ h.forward(Y)[:, 0])
        grad = h.vjp_params(X, w) - h.vjp_params(Y, b[:, None])
        return val, grad
    C = cfg.cost.pairwise(X, cfg.data.points)
    slack = C - hx[:, None]
    istar = np.argmin(slack, axis=0)
    b = cfg.data.weights
    val = float(np.mean(hx) + b @ slack[istar, np.arange(len(b))])
    grad = h.vjp_params(X, w) - h.vjp_params(X[istar], b[:, None])
    return val, grad


def _wgan_theta_grad(g, h, Z, X, cfg: FitConfig, variant: str):
    m = X.shape[0]
    V = h.grad_input(X) / m
    if variant == "lipschitz-neg":
        return g.vjp_params(Z, V)
    hx = h.forward(X)[:, 0]
    Y, b = cfg.data.points, cfg.data.weights
    C = cfg.cost.pairwise(X, Y)
    istar = np.argmin(C - hx[:, None], axis=0)
    contrib = b[:, None] * (cfg.cost.rowwise_grad1(X[istar], Y) - h.grad_input(X[istar]))
    np.add.at(V, istar, contrib)
    return g.vjp_params(Z, V)


def _check_variant(cfg, variant):
    variant = cfg.wgan_variant_ if variant is None else variant
    if variant not in WGAN_VARIANTS:
        raise ValueError(f"variant must be one of {WGAN_VARIANTS}")
    if variant == "lipschitz-neg" and cfg.cost.kind != "euclidean":
        raise ValueError("the lipschitz-neg variant needs the euclidean cost")
    if cfg.potential is None:
        raise ValueError("fit_wgan needs a potential map")
    return variant


def maximize_potential(g, h, cfg: FitConfig, variant: str, n_steps: int, k=0):
    """Gradient ascent on the inner objective with the generator held fixed.

    Returns the final potential, the generated points, the inner objective
    at the final potential and the feasible dual value after every step.
    """
    X = g.forward(cfg.latent)
    feas = []
    for _ in range(n_steps):
        _, grad = wgan_objective(h, X, cfg, variant)
        _finite_or_raise("fit_wgan", k, grad)
        h = h.with_params(h.params + cfg.potential_step_ * grad)
        if variant == "lipschitz-neg":
            h = h.clip(cfg.clip)
        feas.append(feasible_dual_value(h.forward(X)[:, 0], X, cfg))
    val, _ = wgan_objective(h, X, cfg, variant)
    _finite_or_raise("fit_wgan", k, val, feas)
    return h, X, val, feas


def fit_wgan(cfg: FitConfig, variant=None, theta0=None, xi0=None) -> FitResult:
    """Alternating optimisation of the restricted dual.

    Each outer iteration takes ``cfg.n_inner`` ascent steps on the potential
    (clipping its parameters for ``lipschitz-neg``) followed by one descent
    step on the generator. ``trace[k]`` is the inner objective reached at
    outer iteration ``k``; ``extras["feasible_dual"]`` holds the value of the
    feasible pair (h, h^c) after every inner step.
    """
    variant = _check_variant(cfg, variant)
    t0 = time.perf_counter()
    g = cfg.generator if theta0 is None else cfg.generator.with_params(theta0)
    h = cfg.potential if xi0 is None else cfg.potential.with_params(xi0)
    if variant == "lipschitz-neg":
        h = h.clip(cfg.clip)
    Z = cfg.latent

    trace = np.empty(cfg.n_iter)
    feasible, feasible_outer = [], []
    theta_hist = np.empty((cfg.n_iter, g.n_params))
    for k in range(cfg.n_iter):
        h, X, val, feas = maximize_potential(g, h, cfg, variant, cfg.n_inner, k)
        trace[k] = val
        theta_hist[k] = g.params
        feasible += feas
        feasible_outer += [k] * len(feas)
        grad = _wgan_theta_grad(g, h, Z, X, cfg, variant)
        _finite_or_raise("fit_wgan", k, grad)
        g = g.with_params(g.params - cfg.step * grad)
    h, X, final_val, feas = maximize_potential(g, h, cfg, variant, cfg.n_inner, cfg.n_iter)
    final_feasible = feas[-1]
    return FitResult(
        estimator="wgan",
        params={"theta": g.params, "xi": h.params},
        trace=trace,
        final_objective=final_val,
        true_energy=true_energy(g.params, cfg),
        wallclock_s=time.perf_counter() - t0,
        extras={
            "variant": variant,
            "feasible_dual": np.array(feasible),
            "feasible_dual_outer": np.array(feasible_outer),
            "final_feasible_dual": final_feasible,
            "theta_history": theta_hist,
        },
        config=cfg.summary(),
    )


# -- WVAE ---------------------------------------------------------------------

def wvae_terms(g, f, cfg: FitConfig, spec):
    """Reconstruction cost and marginal penalty for decoder ``g``, encoder ``f``."""
    Y = cfg.data.points
    codes = f.forward(Y)
    recon = g.forward(codes)
    rec = float(cfg.data.weights @ cfg.cost.rowwise(recon, Y))
    pen = divergence(spec, codes, cfg.latent)
    return rec, pen, codes, recon


def reconstruction_ot_bound(theta, xi, cfg: FitConfig) -> float:
    """Exact OT between the reconstructed data and the data."""
    Y = cfg.data.points
    recon = cfg.generator.with_params(theta).forward(cfg.encoder.with_params(xi).forward(Y))
    rec_measure = DiscreteMeasure(recon, cfg.data.weights)
    return solve_exact(rec_measure, cfg.data, cfg.cost).primal_value


def fit_wvae(cfg: FitConfig, divergence_spec=None, theta0=None, xi0=None) -> FitResult:
    """Joint gradient descent on reconstruction cost plus ``lam`` times the penalty."""
    if cfg.encoder is None:
        raise ValueError("fit_wvae needs an encoder map")
    t0 = time.perf_counter()
    g = cfg.generator if theta0 is None else cfg.generator.with_params(theta0)
    f = cfg.encoder if xi0 is None else cfg.encoder.with_params(xi0)
    Y, b = cfg.data.points, cfg.data.weights
    spec = cfg.divergence if divergence_spec is None else divergence_spec
    # bandwidth fixed once per fit so the objective is stationary
    spec = DivergenceSpec.from_config(spec).resolve(f.forward(Y), cfg.latent)
    lam = cfg.lam

    n = cfg.n_iter
    trace, recs, pens = np.empty(n), np.empty(n), np.empty(n)
    theta_hist = np.empty((n, g.n_params))
    xi_hist = np.empty((n, f.n_params))
    for k in range(n):
        rec, pen, codes, recon = wvae_terms(g, f, cfg, spec)
        total = rec + lam * pen
        _finite_or_raise("fit_wvae", k, total)
        trace[k], recs[k], pens[k] = total, rec, pen
        theta_hist[k], xi_hist[k] = g.params, f.params
        Gc = b[:, None] * cfg.cost.rowwise_grad1(recon, Y)
        g_theta = g.vjp_params(codes, Gc)
        d_codes = g.vjp_input(codes, Gc) + lam * grad_divergence_a(spec, codes, cfg.latent)
        g_xi = f.vjp_params(Y, d_codes)
        _finite_or_raise("fit_wvae", k, g_theta, g_xi)
        g = g.with_params(g.params - cfg.step * g_theta)
        f = f.with_params(f.params - cfg.encoder_step_ * g_xi)
    rec, pen, _, _ = wvae_terms(g, f, cfg, spec)
    _finite_or_raise("fit_wvae", n, rec, pen)
    return FitResult(
        estimator="wvae",
        params={"theta": g.params, "xi": f.params},
        trace=trace,
        final_objective=rec + lam * pen,
        true_energy=true_energy(g.params, cfg),
        wallclock_s=time.perf_counter() - t0,
        extras={
            "divergence": spec.to_config(),
            "lambda": lam,
            "reconstruction": recs,
            "penalty": pens,
            "final_reconstruction": rec,
            "final_penalty": pen,
            "theta_history": theta_hist,
            "xi_history": xi_hist,
        },
        config=cfg.summary(),
    )
