import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.stats import spearmanr

from oracles import cartesian_locations
from trajopt.density import pipe_weights


def diameter_spokes(n_spokes, n_samples, offset=0.5):
    """Full-diameter spokes over [0, pi); ``offset`` shifts samples off the origin."""
    theta = np.pi * np.arange(n_spokes) / n_spokes
    r = (np.arange(n_samples) - n_samples // 2 + offset) / n_samples
    pts = np.stack([r[None] * np.cos(theta)[:, None], r[None] * np.sin(theta)[:, None]], axis=-1)
    return pts, r


@pytest.mark.parametrize("kernel", ["fejer", "dirichlet"])
@pytest.mark.parametrize("iters", [1, 2, 5])
def test_cartesian_grid_gives_uniform_weights(kernel, iters):
    N = 16
    w = pipe_weights(cartesian_locations(N), N, iters, kernel=kernel)
    np.testing.assert_allclose(w, 1.0 / N**2, rtol=1e-10)


@pytest.mark.parametrize("kernel", ["fejer", "dirichlet"])
def test_single_sample(kernel, rng):
    w = pipe_weights(rng.uniform(-0.5, 0.5, (1, 2)), 12, 1, kernel=kernel)
    assert w[0] == pytest.approx(1.0 / 144, rel=1e-12)


def test_weights_ramp_on_nyquist_radial_sampling():
    # 64 diameters of 32 samples satisfy the angular Nyquist condition at N = 32
    N = 32
    pts, r = diameter_spokes(64, 32)
    w = pipe_weights(pts.reshape(-1, 2), N, 10).reshape(pts.shape[:2])
    center = np.argsort(np.abs(r))[:3]
    for spoke in w:
        outer = spoke[center.max() + 1:]
        inner = spoke[:center.min()][::-1]
        assert np.all(np.diff(outer) > 0)
        assert np.all(np.diff(inner) > 0)
    rho = spearmanr(w.ravel(), np.tile(np.abs(r), len(w))).correlation
    assert rho >= 0.99


def test_sparse_radial_weights_saturate():
    # with 8 spokes the outer k-space is angularly undersampled: weights grow
    # from the center but level off just below 1 / N^2
    N = 32
    pts, r = diameter_spokes(8, 32)
    w = pipe_weights(pts.reshape(-1, 2), N, 10).reshape(pts.shape[:2])
    inner = np.abs(r) < 0.1
    outer = np.abs(r) > 0.3
    assert w[:, inner].max() < w[:, outer].min()
    assert w.max() <= 1.0 / N**2
    assert w[:, outer].min() > 0.5 / N**2


@given(st.integers(0, 2**32 - 1), st.integers(1, 60))
def test_fejer_weights_are_positive_and_bounded(seed, M):
    N = 8
    locs = np.random.default_rng(seed).uniform(-0.5, 0.5, (M, 2))
    w = pipe_weights(locs, N, 5)
    assert np.all(w > 0)
    assert np.all(w <= (1 + 1e-12) / N**2)


def test_permutation_equivariance(rng):
    locs = rng.uniform(-0.5, 0.5, (40, 2))
    perm = rng.permutation(40)
    w = pipe_weights(locs, 16)
    np.testing.assert_allclose(pipe_weights(locs[perm], 16), w[perm], rtol=1e-12)


def test_quarter_turn_invariance(rng):
    locs = rng.uniform(-0.45, 0.45, (30, 2))
    rotated = np.stack([-locs[:, 1], locs[:, 0]], axis=1)
    np.testing.assert_allclose(pipe_weights(rotated, 16), pipe_weights(locs, 16), rtol=1e-9)


def test_argument_checks(rng):
    locs = rng.uniform(-0.5, 0.5, (4, 2))
    with pytest.raises(ValueError):
        pipe_weights(locs, 8, 0)
    with pytest.raises(ValueError):
        pipe_weights(locs, 8, kernel="voronoi")

