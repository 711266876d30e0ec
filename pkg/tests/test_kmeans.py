import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays
from sklearn.base import clone
from sklearn.metrics import adjusted_rand_score

from pedinteract.analytics import KMeans, kmeans
from pedinteract.analytics.cluster import best_of_restarts, derive_seed
from pedinteract.errors import InvalidKError


def blobs(seed=0, n_per=100, sigma=0.5, side=20.0):
    rng = np.random.default_rng(seed)
    corners = np.array([[0, 0], [side, 0], [0, side], [side, side]], float)
    x = np.concatenate([c + rng.normal(scale=sigma, size=(n_per, 2)) for c in corners])
    return x, np.repeat(np.arange(4), n_per)


def test_k_one_is_column_mean():
    x = np.random.default_rng(0).normal(size=(30, 3))
    c = kmeans(x, 1, seed=0)
    assert np.allclose(c.centroids[0], x.mean(axis=0))
    assert c.inertia == pytest.approx(x.var(axis=0).sum() * x.shape[0])


def test_k_equals_n():
    x = np.random.default_rng(1).normal(size=(12, 2))
    c = kmeans(x, 12, seed=3)
    assert c.inertia == 0.0
    assert sorted(c.labels.tolist()) == list(range(12))


@pytest.mark.parametrize("seed", range(20))
def test_four_blobs_recovered(seed):
    x, truth = blobs()
    c = best_of_restarts(x, 4, seed)
    assert adjusted_rand_score(truth, c.labels) == 1.0


def test_deterministic():
    x, _ = blobs(5)
    a, b = kmeans(x, 4, seed=11), kmeans(x, 4, seed=11)
    assert np.array_equal(a.labels, b.labels)
    assert a.centroids.tobytes() == b.centroids.tobytes()
    assert a.inertia == b.inertia


def test_invalid_k():
    x = np.zeros((3, 2))
    with pytest.raises(InvalidKError):
        kmeans(x, 4, seed=0)
    with pytest.raises(InvalidKError):
        kmeans(x, 0, seed=0)


def test_duplicate_points_more_clusters_than_distinct():
    x = np.array([[0.0, 0.0]] * 5 + [[1.0, 1.0]] * 5)
    c = kmeans(x, 3, seed=0)
    assert c.inertia == 0.0
    assert len(c.labels) == 10


@settings(max_examples=40, deadline=None)
@given(
    arrays(float, st.tuples(st.integers(4, 40), st.just(2)), elements=st.floats(-50, 50)),
    st.integers(1, 4),
    st.integers(0, 2**32 - 1),
)
def test_inertia_monotone_and_nearest_centroid(x, k, seed):
    c = kmeans(x, k, seed)
    hist = np.asarray(c.inertia_history)
    assert np.all(np.diff(hist) <= 1e-9 * max(1.0, hist[0]))
    d2 = ((x[:, None, :] - c.centroids[None]) ** 2).sum(-1)
    own = d2[np.arange(len(x)), c.labels]
    assert np.all(own <= d2.min(axis=1) + 1e-9)
    assert c.inertia >= 0


def test_restart_seeds_independent_of_order():
    a = derive_seed(7, 3, 2).generate_state(4)
    b = derive_seed(7, 3, 2).generate_state(4)
    assert np.array_equal(a, b)
    assert not np.array_equal(a, derive_seed(7, 4, 2).generate_state(4))


def test_estimator():
    x, truth = blobs(2)
    est = KMeans(n_clusters=4, seed=3).fit(x)
    assert adjusted_rand_score(truth, est.labels_) == 1.0
    assert np.array_equal(est.predict(x), est.labels_)
    assert clone(est).get_params()["n_clusters"] == 4
