import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from mkelab.measures import (
    DiscreteMeasure,
    LatentSampler,
    empirical,
    pushforward,
    read_measure_csv,
    sample,
    write_measure_csv,
)
from mkelab.models import Affine, ParamMap


def test_empirical_weights():
    mu = empirical([(0,), (2,)])
    np.testing.assert_array_equal(mu.weights, [0.5, 0.5])
    one = empirical([(1, 1)])
    assert one.n_atoms == 1 and one.weights[0] == 1.0
    five = empirical(np.arange(5.0))
    np.testing.assert_allclose(five.weights, 0.2)
    assert abs(five.weights.sum() - 1) <= 1e-12


@pytest.mark.parametrize("bad", [[], [[1.0, 2.0], [1.0]]])
def test_empirical_rejects_empty_and_ragged(bad):
    with pytest.raises(ValueError):
        empirical(bad)


def test_weight_normalisation_rules():
    mu = DiscreteMeasure([[0.0], [1.0]], [0.5, 0.5 + 5e-10])
    assert abs(mu.weights.sum() - 1.0) <= 1e-12
    with pytest.raises(ValueError):
        DiscreteMeasure([[0.0], [1.0]], [0.5, 0.6])
    with pytest.raises(ValueError):
        DiscreteMeasure([[0.0], [1.0]], [1.5, -0.5])
    with pytest.raises(ValueError):
        DiscreteMeasure([[0.0], [1.0]], [1.0])


def test_measure_is_immutable():
    mu = empirical([[0.0], [1.0]])
    with pytest.raises(ValueError):
        mu.points[0, 0] = 3.0


def test_sampler_determinism_and_shape():
    a = LatentSampler("uniform-box", 1, seed=11).sample(3)
    b = sample(LatentSampler("uniform-box", 1, seed=11), 3)
    np.testing.assert_array_equal(a, b)
    assert a.shape == (3, 1) and np.all((a >= 0) & (a <= 1))
    g = LatentSampler("standard-gaussian", 2, seed=1).sample(1)
    assert g.shape == (1, 2)


def test_sampler_stream_is_stateful():
    s = LatentSampler("standard-gaussian", 2, seed=5)
    first, second = s.sample(4), s.sample(4)
    assert not np.array_equal(first, second)
    np.testing.assert_array_equal(LatentSampler("standard-gaussian", 2, seed=5).sample(8),
                                  np.vstack([first, second]))


def test_sampler_errors():
    with pytest.raises(ValueError):
        LatentSampler("uniform-box", 1).sample(0)
    with pytest.raises(ValueError):
        LatentSampler("uniform-box", 0)
    with pytest.raises(ValueError):
        LatentSampler("laplace", 1)


@pytest.mark.parametrize("family", ["uniform-box", "standard-gaussian"])
def test_sampler_law_of_large_numbers(family):
    s = LatentSampler(family, 3, seed=2024)
    m = 10_000
    Z = s.sample(m)
    assert np.all(np.abs(Z.mean(axis=0) - s.mean()) <= 5 * s.std() / np.sqrt(m))


def test_pushforward_examples():
    mu = empirical([[0.0], [1.0]])
    ident = ParamMap(Affine(1, 1), [1.0, 0.0])
    same = pushforward(ident, mu)
    np.testing.assert_array_equal(same.points, mu.points)
    np.testing.assert_array_equal(same.weights, mu.weights)

    doubled = pushforward(ParamMap(Affine(1, 1), [2.0, 0.0]), mu)
    np.testing.assert_array_equal(doubled.points, [[0.0], [2.0]])
    np.testing.assert_array_equal(doubled.weights, [0.5, 0.5])

    const = pushforward(lambda Z: np.full((Z.shape[0], 2), 7.0), mu)
    assert const.n_atoms == 2  # duplicates kept
    np.testing.assert_array_equal(const.points, 7.0)
    np.testing.assert_array_equal(const.weights, mu.weights)


def test_pushforward_dimension_mismatch():
    with pytest.raises(ValueError):
        pushforward(ParamMap(Affine(2, 1), [1.0, 0.0, 0.0]), empirical([[0.0], [1.0]]))


points_st = arrays(np.float64, st.tuples(st.integers(1, 8), st.integers(1, 3)),
                   elements=st.floats(-10, 10, allow_nan=False))


@settings(max_examples=50, deadline=None)
@given(points_st, st.floats(-3, 3), st.floats(-3, 3))
def test_pushforward_preserves_mass_and_composes(pts, s1, s2):
    mu = empirical(pts)
    f = lambda Z: s1 * Z + 1.0
    g = lambda Z: np.tanh(s2 * Z)
    once = pushforward(lambda Z: g(f(Z)), mu)
    twice = pushforward(g, pushforward(f, mu))
    np.testing.assert_array_equal(once.weights, mu.weights)
    assert abs(once.weights.sum() - 1.0) <= 1e-12
    np.testing.assert_array_equal(once.weights, twice.weights)
    np.testing.assert_array_equal(np.sort(once.points, axis=0), np.sort(twice.points, axis=0))


def test_csv_round_trip(tmp_path):
    mu = DiscreteMeasure([[0.1, -2.0], [3.0, 1e-7]], [0.25, 0.75])
    path = tmp_path / "mu.csv"
    write_measure_csv(mu, path)
    assert path.read_text(encoding="utf-8").splitlines()[0] == "w,x_1,x_2"
    back = read_measure_csv(path)
    np.testing.assert_array_equal(back.points, mu.points)
    np.testing.assert_array_equal(back.weights, mu.weights)


def test_csv_requires_header(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("0.5,1\n0.5,2\n", encoding="utf-8")
    with pytest.raises(ValueError):
        read_measure_csv(path)
