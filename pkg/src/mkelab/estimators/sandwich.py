"""Side-by-side run of the three estimators on one instance."""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor

from ._config import FitConfig
from .fitting import fit_mke, fit_wgan, fit_wvae

ARMS = ("wgan", "mke", "wvae")


def _run_arm(arm, cfg):
    if arm == "mke":
        return fit_mke(cfg)
    if arm == "wgan":
        return fit_wgan(cfg)
    return fit_wvae(cfg)


def arm_objective(arm, result) -> float:
    """Objective compared in the ordering: WVAE contributes its reconstruction term only."""
    if arm == "wvae":
        return float(result.extras["final_reconstruction"])
    return float(result.final_objective)


def sandwich_report(cfg: FitConfig, jobs=1) -> dict:
    """Fit WGAN, MKE and WVAE on the same latent sample, data and cost.

    Returns a dict with ``results`` (arm -> FitResult), ``objectives`` and
    ``true_energies`` (arm -> float), in the fixed order wgan, mke, wvae.
    """
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=min(jobs, len(ARMS))) as pool:
            futures = {arm: pool.submit(_run_arm, arm, cfg) for arm in ARMS}
            results = {arm: futures[arm].result() for arm in ARMS}
    else:
        results = {arm: _run_arm(arm, cfg) for arm in ARMS}
    return {
        "results": results,
        "objectives": {arm: arm_objective(arm, results[arm]) for arm in ARMS},
        "true_energies": {arm: float(results[arm].true_energy) for arm in ARMS},
    }


def check_ordering(objectives: dict, slack=1e-2):
    """``wgan <= mke <= wvae`` up to ``slack``; returns (ok, violating pairs)."""
    bad = []
    for lo, hi in (("wgan", "mke"), ("mke", "wvae")):
        if not objectives[lo] <= objectives[hi] + slack:
            bad.append((lo, hi))
    return not bad, bad
