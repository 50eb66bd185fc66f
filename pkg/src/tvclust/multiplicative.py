"""Combined multiplicative solvers.

The first solver couples the factorization, an orthogonality penalty routed
through an auxiliary factor W, and the smoothed graph TV; its Hadamard
updates descend a majorizing surrogate, so the cost trace is monotone.  The
second solver embeds the central-difference TV divergence directly in the
gradient-descent-derived update and carries no monotonicity guarantee.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .grid import GridGeometry
from .initialization import InitMethod, init_factors
from .linalg import clamp_strict_positive, frobenius_sq
from .separated import harden, mu_v_step
from .tv import (NeighborGraph, build_neighborhoods, tv_central_value,
                 tv_divergence, tv_eps_value, tv_targets_Z, tv_weights_P)


@dataclass(frozen=True)
class Mul1Params:
    sigma1: float = 0.5
    sigma2: float = 0.5
    tau: float = 5e-3
    eps_tv: float = math.sqrt(1e-5)
    i_max: int = 800

    def __post_init__(self):
        if self.eps_tv <= 0:
            raise ValueError("eps_tv must be positive")
        if min(self.sigma1, self.sigma2, self.tau) < 0:
            raise ValueError("penalty weights must be nonnegative")


@dataclass(frozen=True)
class Mul2Params:
    sigma1: float = 1.0
    tau: float = 1e-3
    eps_tv: float = math.sqrt(1e-5)
    i_max: int = 700

    def __post_init__(self):
        if self.eps_tv <= 0:
            raise ValueError("eps_tv must be positive")
        if min(self.sigma1, self.tau) < 0:
            raise ValueError("penalty weights must be nonnegative")


@dataclass
class FactorState:
    u: np.ndarray
    v: np.ndarray
    w: np.ndarray | None = None
    iteration: int = 0


def mul1_cost(x: np.ndarray, u: np.ndarray, v: np.ndarray, w: np.ndarray,
              params: Mul1Params, graph: NeighborGraph) -> float:
    """0.5 ||X-UV||^2 + (s1/2) ||I-W'U||^2 + (s2/2) ||W-U||^2 + (tau/2) TV_eps(U)."""
    k = u.shape[1]
    return (0.5 * frobenius_sq(x - u @ v)
            + 0.5 * params.sigma1 * frobenius_sq(np.eye(k) - w.T @ u)
            + 0.5 * params.sigma2 * frobenius_sq(w - u)
            + 0.5 * params.tau * tv_eps_value(u, graph, params.eps_tv))


def mul1_step(x: np.ndarray, state: FactorState, params: Mul1Params,
              graph: NeighborGraph) -> FactorState:
    """One sweep of the three Hadamard-quotient updates in the order U, V, W,
    each followed by the strict-positivity clamp."""
    u, v, w = state.u, state.v, state.w
    s1, s2, tau = params.sigma1, params.sigma2, params.tau

    p = tv_weights_P(u, graph, params.eps_tv)
    z = tv_targets_Z(u, graph, params.eps_tv)
    num = x @ v.T + tau * (p * z) + (s1 + s2) * w
    den = tau * (p * u) + s2 * u + u @ (v @ v.T) + s1 * (w @ (w.T @ u))
    u = clamp_strict_positive(u * num / den)

    v = mu_v_step(x, u, v)

    if s1 + s2 > 0:  # otherwise no term couples W and the quotient is 0/0
        w = clamp_strict_positive(
            w * ((s1 + s2) * u) / (s1 * (u @ (u.T @ w)) + s2 * w))
    return FactorState(u, v, w, state.iteration + 1)


def mul2_cost(x: np.ndarray, u: np.ndarray, v: np.ndarray,
              params: Mul2Params, geometry: GridGeometry) -> float:
    """0.5 ||X-UV||^2 + (s1/4) ||I-U'U||^2 + tau TV_eps(U), with the TV term
    discretized by the same central differences as the divergence."""
    k = u.shape[1]
    return (0.5 * frobenius_sq(x - u @ v)
            + 0.25 * params.sigma1 * frobenius_sq(np.eye(k) - u.T @ u)
            + params.tau * tv_central_value(u, geometry, params.eps_tv))


def mul2_step(x: np.ndarray, state: FactorState, params: Mul2Params,
              geometry: GridGeometry) -> FactorState:
    """One sweep of the divergence-carrying U update followed by the shared
    multiplicative V update.  The U numerator may go negative through the
    divergence term; the clamp restores strict positivity."""
    u, v = state.u, state.v
    s1, tau = params.sigma1, params.tau

    div = tv_divergence(u, geometry, params.eps_tv)
    num = x @ v.T + tau * div + s1 * u
    den = u @ (v @ v.T) + s1 * (u @ (u.T @ u))
    u = clamp_strict_positive(u * num / den)

    v = mu_v_step(x, u, v)
    return FactorState(u, v, None, state.iteration + 1)


MUL1 = "mul1"
MUL2 = "mul2"


@dataclass
class MulResult:
    u: np.ndarray
    v: np.ndarray
    w: np.ndarray | None
    labels: np.ndarray
    cost_trace: np.ndarray


def run_mul(x: np.ndarray, k: int, which: str, params, init: InitMethod,
            geometry: GridGeometry, cost_stride: int = 1) -> MulResult:
    """Run one of the two multiplicative solvers for i_max iterations and
    return factors, hardened labels and the cost trace (recorded every
    ``cost_stride`` iterations, plus the initial value)."""
    x = np.asarray(x, dtype=float)
    if geometry.n_rows != x.shape[0]:
        raise ValueError(
            f"geometry has {geometry.n_rows} pixels but data has "
            f"{x.shape[0]} rows"
        )
    u0, v0 = init_factors(x, k, init)
    u0 = clamp_strict_positive(u0)
    v0 = clamp_strict_positive(v0)

    trace = []
    if which == MUL1:
        if not isinstance(params, Mul1Params):
            raise TypeError("run_mul(which='mul1') needs Mul1Params")
        graph = build_neighborhoods(geometry)
        state = FactorState(u0, v0, u0.copy())
        trace.append(mul1_cost(x, state.u, state.v, state.w, params, graph))
        for i in range(params.i_max):
            state = mul1_step(x, state, params, graph)
            if (i + 1) % cost_stride == 0 or i + 1 == params.i_max:
                trace.append(mul1_cost(x, state.u, state.v, state.w, params, graph))
    elif which == MUL2:
        if not isinstance(params, Mul2Params):
            raise TypeError("run_mul(which='mul2') needs Mul2Params")
        state = FactorState(u0, v0)
        trace.append(mul2_cost(x, state.u, state.v, params, geometry))
        for i in range(params.i_max):
            state = mul2_step(x, state, params, geometry)
            if (i + 1) % cost_stride == 0 or i + 1 == params.i_max:
                trace.append(mul2_cost(x, state.u, state.v, params, geometry))
    else:
        raise ValueError(f"unknown multiplicative solver {which!r}")

    labels = harden(state.u, init.seed)
    return MulResult(state.u, state.v, state.w, labels, np.asarray(trace))
