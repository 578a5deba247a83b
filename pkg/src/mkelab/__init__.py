"""Desk-scale laboratory for minimum Kantorovich estimation of generative models."""

from .costs import GroundCost, cost, cost_matrix, grad1
from .divergences import DivergenceSpec, divergence, grad_divergence_a
from .estimators import (
    FitConfig,
    FitResult,
    MKEGenerator,
    WGANGenerator,
    WVAEGenerator,
    fit_mke,
    fit_wgan,
    fit_wvae,
    grad_energy_dual,
    grad_energy_primal,
    make_config,
    sandwich_report,
    semidual_sgd,
    true_energy,
)
from .measures import DiscreteMeasure, LatentSampler, empirical, pushforward, sample
from .models import MLP, Affine, ParamMap, clip_params, grad_input, vjp_params
from .ot import (
    Coupling,
    DualPotentials,
    NonFiniteCostError,
    OTSolution,
    SolverError,
    c_transform,
    duality_gap,
    sinkhorn,
    solve_exact,
    wasserstein_1d,
)

__version__ = "0.1.0"

__all__ = [
    "Affine",
    "Coupling",
    "DiscreteMeasure",
    "DivergenceSpec",
    "DualPotentials",
    "FitConfig",
    "FitResult",
    "GroundCost",
    "LatentSampler",
    "MKEGenerator",
    "MLP",
    "NonFiniteCostError",
    "OTSolution",
    "ParamMap",
    "SolverError",
    "WGANGenerator",
    "WVAEGenerator",
    "c_transform",
    "clip_params",
    "cost",
    "cost_matrix",
    "divergence",
    "duality_gap",
    "empirical",
    "fit_mke",
    "fit_wgan",
    "fit_wvae",
    "grad1",
    "grad_divergence_a",
    "grad_energy_dual",
    "grad_energy_primal",
    "grad_input",
    "make_config",
    "pushforward",
    "sample",
    "sandwich_report",
    "semidual_sgd",
    "sinkhorn",
    "solve_exact",
    "true_energy",
    "vjp_params",
    "wasserstein_1d",
]
