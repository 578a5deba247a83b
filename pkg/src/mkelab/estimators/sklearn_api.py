"""scikit-learn estimators wrapping the three fitting procedures.

Each estimator is fitted on a data matrix ``X`` of shape (n_samples,
n_features), treated as the uniform empirical measure on its rows.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_array, check_is_fitted, validate_data

from ..measures import LatentSampler, empirical
from ..ot import solve_exact
from ._config import make_config
from .fitting import fit_mke, fit_wgan, fit_wvae


class _KantorovichGenerativeModel(BaseEstimator):
    """Shared parameters and sampling for latent-variable generators."""

    def __init__(self, generator=None, latent_dim=1, n_latent=None, latent="uniform-box",
                 cost="sqeuclidean", step=1e-2, max_iter=500, random_state=0):
        self.generator = generator
        self.latent_dim = latent_dim
        self.n_latent = n_latent
        self.latent = latent
        self.cost = cost
        self.step = step
        self.max_iter = max_iter
        self.random_state = random_state

    def _config(self, X, **extra):
        X = validate_data(self, X, ensure_min_samples=1, dtype=np.float64)
        seed = 0 if self.random_state is None else int(self.random_state)
        return make_config(
            X, self.generator, latent_dim=self.latent_dim, m=self.n_latent,
            latent_family=self.latent, cost=self.cost, step=self.step,
            n_iter=self.max_iter, seed=seed, **extra,
        )

    def _store(self, cfg, result):
        self.config_ = cfg
        self.result_ = result
        self.generator_ = cfg.generator.with_params(result.params["theta"])
        self.latent_sample_ = cfg.latent
        self.energy_ = result.true_energy
        self.objective_ = result.final_objective
        self.trace_ = result.trace
        self.n_iter_ = result.n_iter
        return self

    def decode(self, Z):
        """Push latent codes through the fitted generator."""
        check_is_fitted(self, "generator_")
        Z = check_array(Z, dtype=np.float64)
        return self.generator_.forward(Z)

    def sample(self, n_samples=1, random_state=None):
        """Draw fresh latent points and decode them."""
        check_is_fitted(self, "generator_")
        seed = self.random_state if random_state is None else random_state
        sampler = LatentSampler(self.latent, self.generator_.input_dim, 0 if seed is None else seed)
        return self.generator_.forward(sampler.sample(n_samples))

    def score(self, X, y=None):
        """Negative exact transport cost between the fitted model and ``X``."""
        check_is_fitted(self, "generator_")
        X = validate_data(self, X, reset=False, dtype=np.float64)
        model = empirical(self.generator_.forward(self.latent_sample_))
        return -solve_exact(model, empirical(X), self.config_.cost).primal_value


class MKEGenerator(_KantorovichGenerativeModel):
    """Minimum Kantorovich estimator: gradient descent on the exact energy.

    Parameters
    ----------
    generator : dict or None
        Architecture config, e.g. ``{"arch": "mlp", "layers": [1, 16, 2]}``.
        ``None`` is an affine map from latent to data space.
    latent_dim : int
    n_latent : int or None
        Size of the frozen latent sample; defaults to the number of rows of X.
    latent : {"uniform-box", "standard-gaussian"}
    cost : {"sqeuclidean", "euclidean"}
    step : float
    max_iter : int
    random_state : int

    Attributes
    ----------
    generator_ : ParamMap
    energy_ : float
        Exact transport cost at the fitted parameters.
    trace_ : ndarray
    """

    def fit(self, X, y=None):
        cfg = self._config(X)
        return self._store(cfg, fit_mke(cfg))


class WGANGenerator(_KantorovichGenerativeModel):
    """Generator trained against a parametric Kantorovich potential."""

    def __init__(self, generator=None, latent_dim=1, n_latent=None, latent="uniform-box",
                 cost="euclidean", step=1e-2, max_iter=500, random_state=0,
                 potential=None, potential_step=None, n_inner=5, clip=0.1, variant=None):
        super().__init__(generator, latent_dim, n_latent, latent, cost, step, max_iter, random_state)
        self.potential = potential
        self.potential_step = potential_step
        self.n_inner = n_inner
        self.clip = clip
        self.variant = variant

    def fit(self, X, y=None):
        cfg = self._config(X, potential=self.potential, potential_step=self.potential_step,
                           n_inner=self.n_inner, clip=self.clip, wgan_variant=self.variant)
        self._store(cfg, fit_wgan(cfg))
        self.potential_ = cfg.potential.with_params(self.result_.params["xi"])
        return self


class WVAEGenerator(TransformerMixin, _KantorovichGenerativeModel):
    """Encoder/decoder pair fitted on reconstruction cost plus a latent penalty.

    ``transform`` encodes data into the latent space and
    ``inverse_transform`` decodes latent codes.
    """

    def __init__(self, generator=None, latent_dim=1, n_latent=None, latent="uniform-box",
                 cost="sqeuclidean", step=1e-2, max_iter=500, random_state=0,
                 encoder=None, encoder_step=None, lam=1000.0, divergence="mmd-gaussian",
                 bandwidth="median"):
        super().__init__(generator, latent_dim, n_latent, latent, cost, step, max_iter, random_state)
        self.encoder = encoder
        self.encoder_step = encoder_step
        self.lam = lam
        self.divergence = divergence
        self.bandwidth = bandwidth

    def fit(self, X, y=None):
        cfg = self._config(X, encoder=self.encoder, encoder_step=self.encoder_step, lam=self.lam,
                           divergence={"kind": self.divergence, "bandwidth": self.bandwidth})
        self._store(cfg, fit_wvae(cfg))
        self.encoder_ = cfg.encoder.with_params(self.result_.params["xi"])
        self.reconstruction_ = self.result_.extras["final_reconstruction"]
        self.penalty_ = self.result_.extras["final_penalty"]
        return self

    def transform(self, X):
        check_is_fitted(self, "encoder_")
        X = validate_data(self, X, reset=False, dtype=np.float64)
        return self.encoder_.forward(X)

    def inverse_transform(self, Z):
        return self.decode(Z)
