"""Proximal alternating linearized minimization family.

Shared model: a smooth part (data fidelity, orthogonality penalty routed
through the auxiliary factor W, and a W-U coupling term) plus the
nonsmooth isotropic TV of the membership matrix, handled by its proximal
operator column-wise.  Step sizes are inverse block-Lipschitz constants
estimated by power iteration on the relevant Gram matrices.

Three runners: full-gradient steps, the inertial variant with an
extrapolation point per block, and the stochastic variant with mini-batch
gradient estimates for the U and V blocks.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .grid import GridGeometry
from .initialization import InitMethod, init_factors
from .linalg import frobenius_sq, project_nonnegative
from .separated import harden
from .tv import build_neighborhoods, tv_eps_value, tv_prox_columns

LIPSCHITZ_FLOOR = 1e-12


@dataclass(frozen=True)
class PalmParams:
    sigma1: float = 0.1
    sigma2: float = 0.1
    tau: float = 0.1
    i_max: int = 400
    s_r: int = 40
    power_iters: int = 5
    prox_iters: int = 5
    tau_eta_cap: float = 1e-3
    # fixed momentum weight; None selects the dynamic (i-1)/(i+2) schedule,
    # which underperforms at the fixed 0.9/L steps once beta approaches 1
    inertia: float | None = 0.3

    def __post_init__(self):
        if self.s_r < 1 or self.power_iters < 1 or self.prox_iters < 1:
            raise ValueError("s_r, power_iters and prox_iters must be >= 1")
        if min(self.sigma1, self.sigma2, self.tau) < 0:
            raise ValueError("penalty weights must be nonnegative")


# ---------------------------------------------------------------------------
# gradients of the smooth part
# ---------------------------------------------------------------------------

def _penalty_grad_u(u: np.ndarray, w: np.ndarray, sigma1: float, sigma2: float) -> np.ndarray:
    return sigma1 * (w @ (w.T @ u) - w) + sigma2 * (u - w)


def grad_u(x: np.ndarray, u: np.ndarray, v: np.ndarray, w: np.ndarray,
           sigma1: float, sigma2: float) -> np.ndarray:
    """d/dU of the smooth objective: UVV' - XV' + s1 (WW'U - W) + s2 (U - W)."""
    return u @ (v @ v.T) - x @ v.T + _penalty_grad_u(u, w, sigma1, sigma2)


def grad_v(x: np.ndarray, u: np.ndarray, v: np.ndarray) -> np.ndarray:
    """d/dV of the smooth objective: U'UV - U'X."""
    return (u.T @ u) @ v - u.T @ x


def grad_w(u: np.ndarray, w: np.ndarray, sigma1: float, sigma2: float) -> np.ndarray:
    """d/dW of the smooth objective: s1 (UU'W - U) + s2 (W - U)."""
    return sigma1 * (u @ (u.T @ w) - u) + sigma2 * (w - u)


def _check_batch(batch: np.ndarray, limit: int) -> np.ndarray:
    batch = np.asarray(batch, dtype=int)
    if batch.ndim != 1 or batch.size == 0:
        raise ValueError("mini-batch must be a nonempty 1-D index array")
    if batch.min() < 0 or batch.max() >= limit:
        raise ValueError(f"mini-batch indices must lie in [0, {limit})")
    return batch


def sgd_grad_u(x: np.ndarray, u: np.ndarray, v: np.ndarray, w: np.ndarray,
               batch: np.ndarray, sigma1: float, sigma2: float) -> np.ndarray:
    """Mini-batch estimate of grad_u restricted to the given data columns;
    the penalty part is scaled by |batch| / N.  Summing the estimates over a
    disjoint partition of all columns reproduces the full gradient."""
    n = x.shape[1]
    batch = _check_batch(batch, n)
    vb = v[:, batch]
    xb = x[:, batch]
    return (u @ (vb @ vb.T) - xb @ vb.T
            + (batch.size / n) * _penalty_grad_u(u, w, sigma1, sigma2))


def sgd_grad_v(x: np.ndarray, u: np.ndarray, v: np.ndarray,
               batch: np.ndarray) -> np.ndarray:
    """Mini-batch estimate of grad_v restricted to the given data rows."""
    batch = _check_batch(batch, x.shape[0])
    ub = u[batch]
    xb = x[batch]
    return (ub.T @ ub) @ v - ub.T @ xb


# ---------------------------------------------------------------------------
# Lipschitz constants via power iteration
# ---------------------------------------------------------------------------

def power_lambda_max(matvec, dim: int, iters: int, rng: np.random.Generator) -> float:
    """Largest eigenvalue of a PSD operator: ``iters`` normalized power steps
    from a seeded uniform start, read out as a Rayleigh quotient."""
    v = rng.uniform(size=dim)
    nrm = np.linalg.norm(v)
    if nrm == 0.0:
        return LIPSCHITZ_FLOOR
    v = v / nrm
    for _ in range(iters):
        w = matvec(v)
        nrm = np.linalg.norm(w)
        if nrm < LIPSCHITZ_FLOOR:
            return LIPSCHITZ_FLOOR
        v = w / nrm
    return max(float(v @ matvec(v)), LIPSCHITZ_FLOOR)


def lipschitz_u(v: np.ndarray, w: np.ndarray, sigma1: float, sigma2: float,
                power_iters: int, rng: np.random.Generator,
                penalty_scale: float = 1.0) -> float:
    """L_U = lambda_max(VV') + penalty_scale * lambda_max(s1 WW' + s2 I).

    ``penalty_scale`` carries the |batch|/N factor of the stochastic
    estimator; it is 1 for the full gradient.
    """
    gram = v @ v.T
    lam1 = power_lambda_max(lambda vec: gram @ vec, gram.shape[0], power_iters, rng)
    lam2 = power_lambda_max(
        lambda vec: sigma1 * (w @ (w.T @ vec)) + sigma2 * vec,
        w.shape[0], power_iters, rng)
    return lam1 + penalty_scale * lam2


def lipschitz_v(u: np.ndarray, power_iters: int, rng: np.random.Generator) -> float:
    """L_V = lambda_max(U'U)."""
    gram = u.T @ u
    return power_lambda_max(lambda vec: gram @ vec, gram.shape[0], power_iters, rng)


def lipschitz_w(u: np.ndarray, sigma1: float, sigma2: float,
                power_iters: int, rng: np.random.Generator) -> float:
    """L_W = lambda_max(s1 UU' + s2 I)."""
    return power_lambda_max(
        lambda vec: sigma1 * (u @ (u.T @ vec)) + sigma2 * vec,
        u.shape[0], power_iters, rng)


def exact_lipschitz_u(v: np.ndarray, w: np.ndarray, sigma1: float, sigma2: float) -> float:
    """Eigensolver-based L_U reference (no power-iteration error)."""
    lam1 = float(np.linalg.eigvalsh(v @ v.T)[-1])
    lam2 = sigma1 * float(np.linalg.eigvalsh(w.T @ w)[-1]) + sigma2
    return lam1 + lam2


# ---------------------------------------------------------------------------
# runners
# ---------------------------------------------------------------------------

@dataclass
class PalmResult:
    u: np.ndarray
    v: np.ndarray
    w: np.ndarray
    labels: np.ndarray
    cost_trace: np.ndarray


def smooth_cost(x, u, v, w, sigma1, sigma2) -> float:
    k = u.shape[1]
    return (0.5 * frobenius_sq(x - u @ v)
            + 0.5 * sigma1 * frobenius_sq(np.eye(k) - w.T @ u)
            + 0.5 * sigma2 * frobenius_sq(w - u))


def _solver_rng(seed: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=(1,)))


def _prepare(x, k, init, geometry):
    x = np.asarray(x, dtype=float)
    if geometry.n_rows != x.shape[0]:
        raise ValueError(
            f"geometry has {geometry.n_rows} pixels but data has "
            f"{x.shape[0]} rows"
        )
    u, v = init_factors(x, k, init)
    w = u.copy()
    graph = build_neighborhoods(geometry)
    return x, u, v, w, graph, _solver_rng(init.seed)


def palm_run(x: np.ndarray, k: int, params: PalmParams, init: InitMethod,
             geometry: GridGeometry) -> PalmResult:
    """Full-gradient alternating proximal scheme with step sizes 1/L."""
    x, u, v, w, graph, rng = _prepare(x, k, init, geometry)
    s1, s2, tau = params.sigma1, params.sigma2, params.tau
    trace = [smooth_cost(x, u, v, w, s1, s2) + tau * tv_eps_value(u, graph, 0.0)]

    for _ in range(params.i_max):
        eta_u = 1.0 / lipschitz_u(v, w, s1, s2, params.power_iters, rng)
        u = project_nonnegative(tv_prox_columns(
            u - eta_u * grad_u(x, u, v, w, s1, s2),
            tau * eta_u, graph, params.prox_iters))

        eta_v = 1.0 / lipschitz_v(u, params.power_iters, rng)
        v = project_nonnegative(v - eta_v * grad_v(x, u, v))

        eta_w = 1.0 / lipschitz_w(u, s1, s2, params.power_iters, rng)
        w = project_nonnegative(w - eta_w * grad_w(u, w, s1, s2))

        trace.append(smooth_cost(x, u, v, w, s1, s2) + tau * tv_eps_value(u, graph, 0.0))

    labels = harden(u, init.seed)
    return PalmResult(u, v, w, labels, np.asarray(trace))


def ipalm_run(x: np.ndarray, k: int, params: PalmParams, init: InitMethod,
              geometry: GridGeometry, step_factor: float = 0.9) -> PalmResult:
    """Inertial variant: each block steps from an extrapolated point
    (1 + beta) current - beta previous, with step sizes step_factor / L."""
    x, u, v, w, graph, rng = _prepare(x, k, init, geometry)
    s1, s2, tau = params.sigma1, params.sigma2, params.tau
    u_prev, v_prev, w_prev = u.copy(), v.copy(), w.copy()
    trace = [smooth_cost(x, u, v, w, s1, s2) + tau * tv_eps_value(u, graph, 0.0)]

    for i in range(1, params.i_max + 1):
        beta = params.inertia if params.inertia is not None else (i - 1) / (i + 2)

        u_ext = u + beta * (u - u_prev)
        eta_u = step_factor / lipschitz_u(v, w, s1, s2, params.power_iters, rng)
        u_next = project_nonnegative(tv_prox_columns(
            u_ext - eta_u * grad_u(x, u_ext, v, w, s1, s2),
            tau * eta_u, graph, params.prox_iters))
        u_prev, u = u, u_next

        v_ext = v + beta * (v - v_prev)
        eta_v = step_factor / lipschitz_v(u, params.power_iters, rng)
        v_next = project_nonnegative(v_ext - eta_v * grad_v(x, u, v_ext))
        v_prev, v = v, v_next

        w_ext = w + beta * (w - w_prev)
        eta_w = step_factor / lipschitz_w(u, s1, s2, params.power_iters, rng)
        w_next = project_nonnegative(w_ext - eta_w * grad_w(u, w_ext, s1, s2))
        w_prev, w = w, w_next

        trace.append(smooth_cost(x, u, v, w, s1, s2) + tau * tv_eps_value(u, graph, 0.0))

    labels = harden(u, init.seed)
    return PalmResult(u, v, w, labels, np.asarray(trace))


def spring_step_size(outer_iter: int, batch_size: int, total: int,
                     lipschitz: float) -> float:
    """min{ 1 / (sqrt(ceil(i |B| / total)) L), 1 / L }; the first outer
    iteration (i = 0) degenerates to the plain 1/L step."""
    fac = math.ceil(outer_iter * batch_size / total)
    if fac <= 1:
        return 1.0 / lipschitz
    return 1.0 / (math.sqrt(fac) * lipschitz)


def spring_run(x: np.ndarray, k: int, params: PalmParams, init: InitMethod,
               geometry: GridGeometry) -> PalmResult:
    """Stochastic variant: each outer iteration shuffles the column and row
    index sets into s_r near-equal mini-batches; U and V take batched
    prox-gradient steps, W takes a full-gradient step.  The effective TV
    weight of the U prox is capped at tau_eta_cap."""
    x, u, v, w, graph, rng = _prepare(x, k, init, geometry)
    s1, s2, tau = params.sigma1, params.sigma2, params.tau
    m, n = x.shape
    if params.s_r > min(m, n):
        raise ValueError(
            f"s_r={params.s_r} exceeds the smaller data dimension {min(m, n)}")
    trace = [smooth_cost(x, u, v, w, s1, s2) + tau * tv_eps_value(u, graph, 0.0)]

    for i in range(params.i_max):
        col_batches = np.array_split(rng.permutation(n), params.s_r)
        row_batches = np.array_split(rng.permutation(m), params.s_r)
        for j in range(params.s_r):
            bu, bv = col_batches[j], row_batches[j]

            l_u = lipschitz_u(v[:, bu], w, s1, s2, params.power_iters, rng,
                              penalty_scale=bu.size / n)
            eta_u = spring_step_size(i, bu.size, n, l_u)
            weight = min(tau * eta_u, params.tau_eta_cap)
            u = project_nonnegative(tv_prox_columns(
                u - eta_u * sgd_grad_u(x, u, v, w, bu, s1, s2),
                weight, graph, params.prox_iters))

            l_v = lipschitz_v(u[bv], params.power_iters, rng)
            eta_v = spring_step_size(i, bv.size, m, l_v)
            v = project_nonnegative(v - eta_v * sgd_grad_v(x, u, v, bv))

            eta_w = 1.0 / lipschitz_w(u, s1, s2, params.power_iters, rng)
            w = project_nonnegative(w - eta_w * grad_w(u, w, s1, s2))

        trace.append(smooth_cost(x, u, v, w, s1, s2) + tau * tv_eps_value(u, graph, 0.0))

    labels = harden(u, init.seed)
    return PalmResult(u, v, w, labels, np.asarray(trace))
