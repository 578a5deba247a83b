import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError

from mkelab import MKEGenerator, WGANGenerator, WVAEGenerator


@pytest.fixture
def X():
    rng = np.random.default_rng(0)
    return rng.normal(size=(12, 2)) @ np.array([[1.0, 0.4], [0.0, 0.5]]) + [1.0, -1.0]


def test_get_params_and_clone():
    est = WVAEGenerator(latent_dim=2, lam=10.0, max_iter=7)
    params = est.get_params()
    assert params["lam"] == 10.0 and params["max_iter"] == 7 and params["latent_dim"] == 2
    twin = clone(est)
    assert twin.get_params() == params and twin is not est
    est.set_params(lam=3.0)
    assert est.lam == 3.0


def test_mke_fit_reduces_energy(X):
    est = MKEGenerator(latent_dim=2, latent="standard-gaussian", max_iter=200, random_state=1).fit(X)
    assert est.n_features_in_ == 2
    assert est.trace_.shape == (200,)
    assert est.energy_ < est.trace_[0]
    assert est.score(X) == pytest.approx(-est.energy_, rel=1e-12)
    assert est.sample(5).shape == (5, 2)
    assert est.decode(np.zeros((3, 2))).shape == (3, 2)


def test_fit_is_reproducible(X):
    a = MKEGenerator(latent_dim=2, max_iter=20, random_state=4).fit(X)
    b = clone(a).fit(X)
    np.testing.assert_array_equal(a.trace_, b.trace_)
    np.testing.assert_array_equal(a.sample(4, random_state=2), b.sample(4, random_state=2))


def test_wgan_estimator(X):
    est = WGANGenerator(latent_dim=2, max_iter=30, random_state=0).fit(X)
    assert est.result_.extras["variant"] == "lipschitz-neg"
    assert np.all(np.abs(est.potential_.params) <= est.clip)
    assert np.isfinite(est.objective_)


def test_wvae_transform_round_trip_shapes(X):
    est = WVAEGenerator(latent_dim=1, max_iter=30, lam=10.0, encoder_step=1e-3).fit(X)
    Z = est.transform(X)
    assert Z.shape == (12, 1)
    assert est.inverse_transform(Z).shape == X.shape
    assert est.reconstruction_ >= 0 and est.penalty_ >= 0


def test_not_fitted_and_bad_input(X):
    with pytest.raises(NotFittedError):
        MKEGenerator().sample(2)
    with pytest.raises(ValueError):
        MKEGenerator(max_iter=2).fit(np.array([[np.nan, 1.0]]))
    est = MKEGenerator(latent_dim=2, max_iter=2).fit(X)
    with pytest.raises(ValueError):
        est.score(np.zeros((3, 5)))
