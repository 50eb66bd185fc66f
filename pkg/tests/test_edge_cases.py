"""Degenerate grids, empty-cluster re-seeding, and disconnected components."""

import numpy as np
import pytest

from tvclust.grid import GridGeometry
from tvclust.initialization import KMEANSPP, SVD, InitMethod
from tvclust.multiplicative import MUL1, MUL2, Mul1Params, Mul2Params, run_mul
from tvclust.palm import PalmParams, spring_run
from tvclust.separated import kmeans_cluster
from tvclust.tv import (build_neighborhoods, tv_divergence, tv_eps_value,
                        tv_prox)


def test_single_row_grid_divergence_and_prox():
    geometry = GridGeometry.full(1, 7)
    rng = np.random.default_rng(0)
    u = rng.uniform(size=7)
    # vertical stencils collapse to the center value; no NaNs, finite output
    div = tv_divergence(u, geometry, 0.1)
    assert np.all(np.isfinite(div))
    assert np.allclose(tv_divergence(np.full(7, 2.0), geometry, 0.1), 0.0)

    graph = build_neighborhoods(geometry)
    out = tv_prox(u, 0.4, graph, 50)
    assert np.all(np.isfinite(out))
    # 1-D chain smoothing keeps the mean
    assert out.mean() == pytest.approx(u.mean(), abs=1e-8)


def test_single_column_grid_matches_transposed_row_grid():
    rng = np.random.default_rng(1)
    u = rng.uniform(size=6)
    row = tv_divergence(u, GridGeometry.full(1, 6), 0.2)
    col = tv_divergence(u, GridGeometry.full(6, 1), 0.2)
    assert np.allclose(row, col)


def test_tv_floor_attained_per_connected_component():
    # two disconnected 2x2 blocks holding different constants still attain
    # the smoothing floor M*K*eps
    keep = np.zeros((2, 5), dtype=bool)
    keep[:, :2] = True
    keep[:, 3:] = True
    geometry = GridGeometry(2, 5, np.argwhere(keep))
    graph = build_neighborhoods(geometry)
    u = np.where(geometry.pixel_of_row[:, 1] < 2, 1.0, 5.0)[:, None]
    eps = 0.3
    assert tv_eps_value(u, graph, eps) == pytest.approx(geometry.n_rows * eps)


def test_kmeans_reseeds_empty_clusters():
    # a centroid planted far from every point captures nothing on the first
    # assignment and must be revived with the farthest point
    rng = np.random.default_rng(4)
    x = np.vstack([rng.normal(size=(5, 2)),
                   rng.normal(loc=50.0, size=(5, 2))])
    dead = np.array([[0.0, 0.0], [50.0, 50.0], [1e6, 1e6]])
    u, v = kmeans_cluster(x, 3, InitMethod(KMEANSPP, seed=0),
                          initial_centroids=dead)
    labels = np.argmax(u, axis=1)
    assert len(np.unique(labels)) == 3  # every cluster alive after reseeding
    assert u.shape == (10, 3)
    with pytest.raises(ValueError):
        kmeans_cluster(x, 3, InitMethod(KMEANSPP, 0),
                       initial_centroids=np.zeros((2, 2)))


@pytest.mark.parametrize("which,params", [
    (MUL1, Mul1Params(i_max=30)),
    (MUL2, Mul2Params(i_max=30)),
])
def test_run_mul_with_single_cluster(which, params):
    rng = np.random.default_rng(2)
    geometry = GridGeometry.full(4, 5)
    x = rng.uniform(0.5, 1.5, size=(20, 8))
    result = run_mul(x, 1, which, params, InitMethod(SVD, seed=0), geometry)
    assert np.array_equal(result.labels, np.zeros(20, dtype=int))
    assert np.all(np.isfinite(result.cost_trace))


def test_spring_with_uneven_batches():
    rng = np.random.default_rng(3)
    geometry = GridGeometry.full(3, 5)
    x = rng.uniform(size=(15, 7))
    # s_r=3 over 7 columns: batch sizes 3/2/2
    result = spring_run(x, 2, PalmParams(i_max=3, s_r=3, tau=0.01),
                        InitMethod(SVD, seed=1), geometry)
    assert result.u.shape == (15, 2)
    assert np.all(np.isfinite(result.u))
