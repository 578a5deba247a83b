from pathlib import Path

import numpy as np
import pytest

from mkelab.cli.config import load_experiment
from mkelab.divergences import DivergenceSpec
from mkelab.estimators import (
    NonFiniteObjectiveError,
    check_ordering,
    feasible_dual_value,
    fit_mke,
    fit_wgan,
    fit_wvae,
    make_config,
    maximize_potential,
    reconstruction_ot_bound,
    sandwich_report,
    true_energy,
    wvae_terms,
)

CONFIGS = Path(__file__).resolve().parents[1] / "configs"


def load(name, **changes):
    cfg = load_experiment(CONFIGS / name).fit
    return cfg.replace(**changes) if changes else cfg


# -- MKE ------------------------------------------------------------------------

def test_mke_benchmark_converges_to_analytic_minimizer():
    res = fit_mke(load("affine_1d_benchmark.json"))
    assert abs(res.params["theta"][0] - 2.0) <= 1e-4
    assert res.true_energy <= 1e-6
    assert res.trace[0] == 4.0
    assert len(res.trace) == res.n_iter == 2000
    assert np.all(np.diff(res.trace) <= 0)


def test_mke_flat_at_minimizer():
    cfg = load("affine_1d_benchmark.json", n_iter=50)
    res = fit_mke(cfg, theta0=[2.0])
    assert np.ptp(res.trace) <= 1e-10


def test_mke_rotated_gaussian_regression():
    res = fit_mke(load("rotated_gaussian_mke.json"))
    assert res.trace[-1] >= 0
    assert res.true_energy <= 0.1 * res.trace[0]


def test_mke_is_deterministic():
    cfg = load("rotated_gaussian_mke.json", n_iter=30)
    a, b = fit_mke(cfg), fit_mke(cfg)
    np.testing.assert_array_equal(a.trace, b.trace)
    np.testing.assert_array_equal(a.params["theta"], b.params["theta"])


def test_nonfinite_objective_aborts():
    cfg = load("affine_1d_benchmark.json", step=10.0, n_iter=2000)
    with pytest.raises(NonFiniteObjectiveError):
        with np.errstate(over="ignore", invalid="ignore"):
            fit_mke(cfg)


# -- WGAN -----------------------------------------------------------------------

def test_wgan_matched_instance_value_small():
    res = fit_wgan(load("matched_trivial.json"))
    assert res.extras["variant"] == "lipschitz-neg"
    assert res.final_objective <= 1e-3
    assert np.all(np.abs(res.params["xi"]) <= 0.1)


def test_wgan_benchmark_final_dual_below_energy():
    cfg = load("affine_1d_benchmark.json", n_iter=300)
    res = fit_wgan(cfg)
    assert res.extras["variant"] == "c-transform"
    assert res.extras["final_feasible_dual"] <= res.true_energy + 1e-6
    assert res.final_objective <= res.true_energy + 1e-6


@pytest.mark.parametrize("variant,kind", [("c-transform", "sqeuclidean"),
                                          ("lipschitz-neg", "euclidean")])
def test_wgan_feasible_dual_never_exceeds_energy(variant, kind):
    rng = np.random.default_rng(0)
    cfg = make_config(rng.normal(size=(8, 2)), {"arch": "mlp", "layers": [1, 6, 2]}, latent_dim=1,
                      potential={"arch": "mlp", "layers": [2, 6, 1]}, cost=kind, n_iter=40, seed=1)
    res = fit_wgan(cfg, variant=variant)
    feas, outer = res.extras["feasible_dual"], res.extras["feasible_dual_outer"]
    assert len(feas) == cfg.n_iter * cfg.n_inner
    for k in range(cfg.n_iter):
        E = true_energy(res.extras["theta_history"][k], cfg)
        assert np.all(feas[outer == k] <= E + 1e-9)


def test_wgan_rejects_variant_cost_mismatch():
    with pytest.raises(ValueError):
        fit_wgan(load("affine_1d_benchmark.json"), variant="lipschitz-neg")
    with pytest.raises(ValueError):
        fit_wgan(load("affine_1d_benchmark.json"), variant="maxent")


@pytest.mark.parametrize("variant,kind", [("c-transform", "sqeuclidean"),
                                          ("lipschitz-neg", "euclidean")])
def test_wgan_capacity_does_not_lower_inner_maximum(variant, kind):
    Y = np.random.default_rng(0).normal(size=(20, 2))
    for seed in range(3):
        vals = []
        for width in (4, 64):
            cfg = make_config(Y, {"arch": "mlp", "layers": [1, 8, 2]}, latent_dim=1,
                              potential={"arch": "mlp", "layers": [2, width, 1]},
                              cost=kind, potential_step=1e-2, seed=seed)
            h0 = cfg.potential.clip(cfg.clip) if variant == "lipschitz-neg" else cfg.potential
            _, _, val, _ = maximize_potential(cfg.generator, h0, cfg, variant, 2000)
            vals.append(val)
        assert vals[1] >= vals[0] - 1e-3


def test_feasible_dual_value_of_zero_potential():
    cfg = make_config([[0.0], [2.0]], latent_points=[[1.0], [1.0]])
    X = cfg.generator.forward(cfg.latent)
    assert feasible_dual_value(np.zeros(2), X, cfg) == 1.0


# -- WVAE -----------------------------------------------------------------------

def test_identity_autoencoder_has_zero_reconstruction():
    Y = np.random.default_rng(1).normal(size=(6, 2))
    cfg = make_config(Y, latent_dim=2)  # affine identities
    spec = DivergenceSpec("mmd-gaussian", 1.0)
    rec, pen, _, _ = wvae_terms(cfg.generator, cfg.encoder, cfg, spec)
    assert rec == 0 and pen >= 0


def test_wvae_gaussian_blob_penalty_regression():
    res = fit_wvae(load("gaussian_blob_wvae.json"))
    assert res.extras["final_penalty"] < 1e-2
    assert res.extras["divergence"]["bandwidth"] > 0  # median resolved once
    np.testing.assert_allclose(res.trace, res.extras["reconstruction"] + 1000 * res.extras["penalty"],
                               rtol=1e-12)


def test_wvae_reconstruction_bounds_exact_ot():
    cfg = load("moons_mlp.json", n_iter=200)
    res = fit_wvae(cfg)
    idx = np.linspace(0, cfg.n_iter - 1, 10).astype(int)
    for k in idx:
        bound = reconstruction_ot_bound(res.extras["theta_history"][k], res.extras["xi_history"][k], cfg)
        assert res.extras["reconstruction"][k] >= bound - 1e-9


def test_wvae_lambda_tradeoff_is_monotone():
    Y = np.random.default_rng(0).normal(size=(40, 2)) * [1.0, 0.3]
    recs, pens = [], []
    for lam in (1.0, 10.0, 100.0, 1000.0):
        cfg = make_config(Y, {"arch": "mlp", "layers": [1, 16, 2]}, latent_dim=1,
                          encoder={"arch": "mlp", "layers": [2, 16, 1]}, step=1e-2,
                          encoder_step=1e-2 / lam, lam=lam, n_iter=3000, seed=0)
        res = fit_wvae(cfg)
        recs.append(res.extras["final_reconstruction"])
        pens.append(res.extras["final_penalty"])
    assert np.all(np.diff(recs) >= 0)
    assert np.all(np.diff(pens) <= 0)


def test_wvae_energy_distance_variant_runs():
    res = fit_wvae(load("gaussian_blob_wvae.json", n_iter=50), divergence_spec="energy-distance")
    assert res.extras["divergence"]["kind"] == "energy-distance"
    assert np.all(np.isfinite(res.trace))


# -- sandwich -------------------------------------------------------------------

def test_sandwich_matched_instance():
    rep = sandwich_report(load("matched_trivial.json"))
    assert all(v <= 1e-3 for v in rep["objectives"].values())
    assert check_ordering(rep["objectives"], 1e-2)[0]


def test_sandwich_benchmark_true_energies():
    rep = sandwich_report(load("affine_1d_benchmark.json"))
    E = rep["true_energies"]
    assert E["mke"] <= E["wgan"] + 1e-6 and E["mke"] <= E["wvae"] + 1e-6
    assert check_ordering(rep["objectives"], 1e-2) == (True, [])


def test_check_ordering_reports_pairs():
    ok, bad = check_ordering({"wgan": 1.0, "mke": 0.5, "wvae": 0.0}, slack=0.1)
    assert not ok and bad == [("wgan", "mke"), ("mke", "wvae")]


def test_parallel_sandwich_matches_serial():
    cfg = load("affine_1d_benchmark.json", n_iter=100)
    a, b = sandwich_report(cfg), sandwich_report(cfg, jobs=3)
    assert a["objectives"] == b["objectives"]
