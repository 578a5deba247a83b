"""Minimum Kantorovich estimation: energy, gradients, fits and the sandwich report."""

from ._config import (
    WGAN_VARIANTS,
    FitConfig,
    FitResult,
    NonFiniteObjectiveError,
    child_seed,
    make_config,
)
from .energy import (
    energy_and_grad_primal,
    finite_difference_grad,
    grad_energy_dual,
    grad_energy_primal,
    is_nondegenerate,
    semidual_ascent,
    semidual_objective,
    semidual_sgd,
    solve_energy,
    true_energy,
)
from .fitting import (
    feasible_dual_value,
    fit_mke,
    fit_wgan,
    fit_wvae,
    maximize_potential,
    reconstruction_ot_bound,
    wgan_objective,
    wvae_terms,
)
from .sandwich import ARMS, arm_objective, check_ordering, sandwich_report
from .sklearn_api import MKEGenerator, WGANGenerator, WVAEGenerator

__all__ = [
    "ARMS",
    "FitConfig",
    "FitResult",
    "MKEGenerator",
    "NonFiniteObjectiveError",
    "WGANGenerator",
    "WGAN_VARIANTS",
    "WVAEGenerator",
    "arm_objective",
    "check_ordering",
    "child_seed",
    "energy_and_grad_primal",
    "feasible_dual_value",
    "finite_difference_grad",
    "fit_mke",
    "fit_wgan",
    "fit_wvae",
    "grad_energy_dual",
    "grad_energy_primal",
    "is_nondegenerate",
    "make_config",
    "maximize_potential",
    "reconstruction_ot_bound",
    "sandwich_report",
    "semidual_ascent",
    "semidual_objective",
    "semidual_sgd",
    "solve_energy",
    "true_energy",
    "wgan_objective",
    "wvae_terms",
]
