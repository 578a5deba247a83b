import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mkelab.costs import GroundCost, cost, cost_matrix, grad1
from mkelab.measures import empirical


def test_cost_values():
    assert cost("sqeuclidean", (0, 0), (3, 4)) == 25
    assert cost("euclidean", (0, 0), (3, 4)) == 5
    for kind in ("sqeuclidean", "euclidean"):
        assert cost(kind, (1.5, -2), (1.5, -2)) == 0


def test_grad1_values():
    np.testing.assert_array_equal(grad1("sqeuclidean", (0, 0), (3, 4)), [-6, -8])
    np.testing.assert_allclose(grad1("euclidean", (3, 4), (0, 0)), [0.6, 0.8])
    np.testing.assert_array_equal(grad1("euclidean", (1, 2), (1, 2)), [0, 0])


def test_dimension_mismatch():
    with pytest.raises(ValueError):
        cost("euclidean", (0, 0), (1,))
    with pytest.raises(ValueError):
        grad1("euclidean", (0, 0), (1,))
    with pytest.raises(ValueError):
        cost_matrix("euclidean", empirical([[0, 0]]), empirical([[0]]))


def test_cost_kind_names():
    assert GroundCost("squared-euclidean").kind == "sqeuclidean"
    with pytest.raises(ValueError):
        GroundCost("manhattan")


def test_cost_matrix_examples():
    np.testing.assert_array_equal(cost_matrix("euclidean", empirical([[1, 1]]), empirical([[1, 1]])), [[0]])
    C = cost_matrix("euclidean", empirical([[0], [2]]), empirical([[1], [3]]))
    np.testing.assert_array_equal(C, [[1, 3], [1, 1]])
    pts = np.random.default_rng(0).random((5, 2))
    assert np.all(np.diag(cost_matrix("sqeuclidean", pts, pts)) == 0)


@pytest.mark.parametrize("kind", ["sqeuclidean", "euclidean"])
def test_grad1_matches_central_differences(kind):
    rng = np.random.default_rng(1)
    h = 1e-5
    checked = 0
    while checked < 100:
        d = rng.integers(1, 4)
        x, y = rng.normal(size=d), rng.normal(size=d)
        if np.linalg.norm(x - y) < 1e-2:
            continue
        fd = np.array([(cost(kind, x + h * e, y) - cost(kind, x - h * e, y)) / (2 * h)
                       for e in np.eye(d)])
        g = grad1(kind, x, y)
        np.testing.assert_allclose(g, fd, rtol=1e-6, atol=1e-6 * np.abs(g).max())
        checked += 1


vec = st.lists(st.floats(-1e3, 1e3, allow_nan=False), min_size=3, max_size=3)


@settings(max_examples=100, deadline=None)
@given(vec, vec, st.sampled_from(["sqeuclidean", "euclidean"]))
def test_cost_symmetric_and_nonnegative(x, y, kind):
    assert cost(kind, x, y) == cost(kind, y, x)
    assert cost(kind, x, y) >= 0
