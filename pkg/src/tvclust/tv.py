"""Total-variation machinery on the pixel grid.

Two discrete flavours coexist:

* a graph flavour built on forward-difference neighbourhoods N_m (the
  smoothed TV value, its exact gradient, and the surrogate weights P/Z of
  the first multiplicative solver),
* an image flavour built on central differences (the curvature-style
  divergence term of the second multiplicative solver).

The TV proximal operator (isotropic, unsmoothed) is solved on the graph by
an accelerated dual projected-gradient method with momentum restart.
"""

from __future__ import annotations

import numpy as np
import scipy.sparse as sp

from .grid import GridGeometry

# forward neighbourhood of an interior pixel (i, j): {(i+1, j), (i, j+1)}
_FORWARD_OFFSETS = ((1, 0), (0, 1))


class NeighborGraph:
    """Forward/adjoint pixel neighbourhoods plus sparse difference operators.

    Edges run from each pixel m to every forward neighbour; the adjoint
    neighbourhood of m collects all pixels that list m as forward neighbour.
    """

    def __init__(self, geometry: GridGeometry):
        src, dst = [], []
        rop = geometry.row_of_pixel
        d1, d2 = geometry.height, geometry.width
        for m, (i, j) in enumerate(geometry.pixel_of_row):
            for di, dj in _FORWARD_OFFSETS:
                ii, jj = i + di, j + dj
                if ii < d1 and jj < d2 and rop[ii, jj] >= 0:
                    src.append(m)
                    dst.append(rop[ii, jj])

        n = geometry.n_rows
        self.n_pixels = n
        self.edge_src = np.asarray(src, dtype=int)
        self.edge_dst = np.asarray(dst, dtype=int)
        self.n_edges = len(src)
        self.forward_degree = np.bincount(self.edge_src, minlength=n)

        e = self.n_edges
        ones = np.ones(e)
        # (Dy)_e = y[src_e] - y[dst_e]
        self.diff_op = sp.csr_matrix(
            (np.concatenate([ones, -ones]),
             (np.concatenate([np.arange(e), np.arange(e)]),
              np.concatenate([self.edge_src, self.edge_dst]))),
            shape=(e, n),
        )
        # scatter edge values to their source / destination pixel
        self.scatter_src = sp.csr_matrix(
            (ones, (self.edge_src, np.arange(e))), shape=(n, e))
        self.scatter_dst = sp.csr_matrix(
            (ones, (self.edge_dst, np.arange(e))), shape=(n, e))

    @property
    def forward(self) -> list:
        """N_m as a list of index arrays."""
        out = [[] for _ in range(self.n_pixels)]
        for s, d in zip(self.edge_src, self.edge_dst):
            out[s].append(d)
        return [np.asarray(lst, dtype=int) for lst in out]

    @property
    def adjoint(self) -> list:
        """Adjoint neighbourhoods: m~ in adjoint[m] iff m in forward[m~]."""
        out = [[] for _ in range(self.n_pixels)]
        for s, d in zip(self.edge_src, self.edge_dst):
            out[d].append(s)
        return [np.asarray(lst, dtype=int) for lst in out]


def build_neighborhoods(geometry: GridGeometry) -> NeighborGraph:
    return NeighborGraph(geometry)


def _as_columns(u: np.ndarray, graph: NeighborGraph) -> np.ndarray:
    u = np.asarray(u, dtype=float)
    if u.ndim == 1:
        u = u[:, None]
    if u.ndim != 2 or u.shape[0] != graph.n_pixels:
        raise ValueError(
            f"expected {graph.n_pixels} rows matching the pixel grid, "
            f"got shape {u.shape}"
        )
    return u


def local_gradient_norms(u: np.ndarray, graph: NeighborGraph, eps_tv: float) -> np.ndarray:
    """|nabla_mk U| = sqrt(eps^2 + sum of squared forward differences)."""
    u = _as_columns(u, graph)
    diffs = graph.diff_op @ u
    per_pixel = graph.scatter_src @ (diffs * diffs)
    return np.sqrt(eps_tv * eps_tv + per_pixel)


def tv_eps_value(u: np.ndarray, graph: NeighborGraph, eps_tv: float) -> float:
    """Smoothed isotropic TV: sum over pixels and columns of |nabla_mk U|."""
    if eps_tv < 0:
        raise ValueError("eps_tv must be nonnegative")
    return float(np.sum(local_gradient_norms(u, graph, eps_tv)))


def tv_eps_gradient(u: np.ndarray, graph: NeighborGraph, eps_tv: float) -> np.ndarray:
    """Exact gradient of ``tv_eps_value`` with respect to U.

    Equals minus the graph divergence of the normalized forward-difference
    field; requires eps_tv > 0 (or nonvanishing local gradients).
    """
    u = _as_columns(u, graph)
    nabla = local_gradient_norms(u, graph, eps_tv)
    _check_positive_norms(nabla, graph, eps_tv)
    inv = _safe_reciprocal(nabla, graph)
    diffs = graph.diff_op @ u
    own = (graph.scatter_src @ diffs) * inv
    adj = graph.scatter_dst @ (-diffs * inv[graph.edge_src])
    return own + adj


def _safe_reciprocal(nabla: np.ndarray, graph: NeighborGraph) -> np.ndarray:
    """1/|nabla| on pixels with forward neighbours, 0 elsewhere (those rows
    never contribute a difference term)."""
    inv = np.zeros_like(nabla)
    used = graph.forward_degree > 0
    inv[used] = 1.0 / nabla[used]
    return inv


def _check_positive_norms(nabla: np.ndarray, graph: NeighborGraph, eps_tv: float):
    if eps_tv > 0:
        return
    used = graph.forward_degree > 0
    if np.any(nabla[used] == 0.0):
        raise ZeroDivisionError(
            "local TV gradient vanished with eps_tv = 0; the surrogate "
            "weights are undefined"
        )


def tv_weights_P(u: np.ndarray, graph: NeighborGraph, eps_tv: float) -> np.ndarray:
    """Surrogate curvature weights: |N_m| / |nabla_mk| plus the adjoint sum
    of reciprocal local gradient norms."""
    u = _as_columns(u, graph)
    nabla = local_gradient_norms(u, graph, eps_tv)
    _check_positive_norms(nabla, graph, eps_tv)
    inv = _safe_reciprocal(nabla, graph)
    own = graph.forward_degree[:, None] * inv
    adj = graph.scatter_dst @ inv[graph.edge_src]
    return own + adj


def tv_targets_Z(u: np.ndarray, graph: NeighborGraph, eps_tv: float) -> np.ndarray:
    """Surrogate targets: P-normalized averages (U_m + U_m~)/2 over forward
    and adjoint neighbours.  Isolated pixels (P = 0) keep their own value so
    the multiplicative update leaves them untouched."""
    u = _as_columns(u, graph)
    nabla = local_gradient_norms(u, graph, eps_tv)
    _check_positive_norms(nabla, graph, eps_tv)
    p = tv_weights_P(u, graph, eps_tv)

    inv = _safe_reciprocal(nabla, graph)
    pair = 0.5 * (u[graph.edge_src] + u[graph.edge_dst])
    own = (graph.scatter_src @ pair) * inv
    adj = graph.scatter_dst @ (pair * inv[graph.edge_src])
    num = own + adj

    coupled = p > 0
    z = u.copy()
    z[coupled] = num[coupled] / p[coupled]
    return z


# ---------------------------------------------------------------------------
# central-difference divergence (image flavour)
# ---------------------------------------------------------------------------

def _neighbor_rows(geometry: GridGeometry, di: int, dj: int) -> np.ndarray:
    """Row index supplying the value of neighbour (i+di, j+dj) of each row.

    Out-of-grid or masked accesses replicate the nearest valid value:
    coordinates are clamped into the grid componentwise (which reproduces
    edge padding on full masks); accesses landing on mask holes fall back
    axis-wise and finally to the center pixel.
    """
    pix = geometry.pixel_of_row
    rop = geometry.row_of_pixel
    i, j = pix[:, 0], pix[:, 1]
    ci = np.clip(i + di, 0, geometry.height - 1)
    cj = np.clip(j + dj, 0, geometry.width - 1)

    out = rop[ci, cj]
    for fi, fj in ((i, cj), (ci, j), (i, j)):
        missing = out < 0
        if not np.any(missing):
            break
        out = np.where(missing, rop[fi, fj], out)
    return out


def tv_divergence(u: np.ndarray, geometry: GridGeometry, eps_tv: float) -> np.ndarray:
    """Discretized div(grad u / ||grad u||_eps), column-wise on the grid.

    Central differences with replicate (Neumann) boundary handling; the
    vertical axis i is the x direction.  May contain negative entries.
    """
    if eps_tv <= 0:
        raise ValueError("eps_tv must be positive for the divergence term")
    u = np.asarray(u, dtype=float)
    squeeze = u.ndim == 1
    if squeeze:
        u = u[:, None]
    if u.shape[0] != geometry.n_rows:
        raise ValueError(
            f"expected {geometry.n_rows} rows matching the pixel grid, "
            f"got shape {u.shape}"
        )

    rows = {off: _neighbor_rows(geometry, *off) for off in
            ((1, 0), (-1, 0), (0, 1), (0, -1), (1, 1), (1, -1), (-1, 1), (-1, -1))}

    c = u
    dn, up = u[rows[(1, 0)]], u[rows[(-1, 0)]]
    rt, lf = u[rows[(0, 1)]], u[rows[(0, -1)]]
    dx = 0.5 * (dn - up)
    dy = 0.5 * (rt - lf)
    dxx = dn - 2.0 * c + up
    dyy = rt - 2.0 * c + lf
    dxy = 0.25 * (u[rows[(1, 1)]] - u[rows[(1, -1)]]
                  - u[rows[(-1, 1)]] + u[rows[(-1, -1)]])

    norm_cubed = (dx * dx + dy * dy + eps_tv * eps_tv) ** 1.5
    div = (eps_tv * eps_tv * (dxx + dyy) + dx * dx * dyy + dy * dy * dxx
           - 2.0 * dx * dy * dxy) / norm_cubed
    return div[:, 0] if squeeze else div


def tv_central_value(u: np.ndarray, geometry: GridGeometry, eps_tv: float) -> float:
    """Central-difference companion energy of ``tv_divergence``:
    sum over pixels of sqrt((dx u)^2 + (dy u)^2 + eps^2), column-wise."""
    u = np.asarray(u, dtype=float)
    if u.ndim == 1:
        u = u[:, None]
    dn = u[_neighbor_rows(geometry, 1, 0)]
    up = u[_neighbor_rows(geometry, -1, 0)]
    rt = u[_neighbor_rows(geometry, 0, 1)]
    lf = u[_neighbor_rows(geometry, 0, -1)]
    dx = 0.5 * (dn - up)
    dy = 0.5 * (rt - lf)
    return float(np.sum(np.sqrt(dx * dx + dy * dy + eps_tv * eps_tv)))


# ---------------------------------------------------------------------------
# TV proximal operator (isotropic, eps_tv = 0)
# ---------------------------------------------------------------------------

def prox_objective(y: np.ndarray, x: np.ndarray, tau: float, graph: NeighborGraph) -> float:
    """Primal denoising objective 0.5 ||y - x||^2 + tau ||y||_TV."""
    y = np.asarray(y, dtype=float)
    x = np.asarray(x, dtype=float)
    return 0.5 * float(np.sum((y - x) ** 2)) + tau * tv_eps_value(y, graph, 0.0)


def _project_dual(p: np.ndarray, graph: NeighborGraph) -> np.ndarray:
    """Scale each pixel's edge group onto the unit Euclidean ball."""
    norms = np.sqrt(graph.scatter_src @ (p * p))
    scale = 1.0 / np.maximum(1.0, norms)
    return p * scale[graph.edge_src]


def tv_prox(x: np.ndarray, tau: float, graph: NeighborGraph, max_iter: int) -> np.ndarray:
    """Approximate prox of tau * ||.||_TV at x for one grid column.

    Accelerated dual projected gradient with fixed step 1/8 (the standard
    bound on the squared norm of the 2-D difference operator) and momentum
    restart whenever the dual step reverses direction.  Returns the iterate
    with the lowest primal objective seen, so the output never increases the
    objective relative to x.
    """
    if max_iter < 1:
        raise ValueError("max_iter must be at least 1")
    x = np.asarray(x, dtype=float)
    if x.shape != (graph.n_pixels,):
        raise ValueError(
            f"expected a vector of {graph.n_pixels} pixel values, got shape {x.shape}"
        )
    if tau < 0:
        raise ValueError("tau must be nonnegative")
    if tau == 0.0 or graph.n_edges == 0:
        return x.copy()

    d = graph.diff_op
    p = np.zeros(graph.n_edges)
    q = p.copy()
    t = 1.0
    best = x.copy()
    best_obj = prox_objective(x, x, tau, graph)
    inv_step = 1.0 / (8.0 * tau)

    for _ in range(max_iter):
        u = x - tau * (d.T @ q)
        p_new = _project_dual(q + inv_step * (d @ u), graph)
        if float(np.dot(q - p_new, p_new - p)) > 0.0:
            t = 1.0
            q = p_new.copy()
        else:
            t_next = 0.5 * (1.0 + np.sqrt(1.0 + 4.0 * t * t))
            q = p_new + ((t - 1.0) / t_next) * (p_new - p)
            t = t_next
        p = p_new

        candidate = x - tau * (d.T @ p)
        obj = prox_objective(candidate, x, tau, graph)
        if obj < best_obj:
            best_obj = obj
            best = candidate
    return best


def tv_prox_columns(u: np.ndarray, tau: float, graph: NeighborGraph, max_iter: int) -> np.ndarray:
    """Apply ``tv_prox`` independently to every column of U."""
    u = _as_columns(u, graph)
    out = np.empty_like(u)
    for k in range(u.shape[1]):
        out[:, k] = tv_prox(u[:, k], tau, graph, max_iter)
    return out
