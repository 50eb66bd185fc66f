"""Spatially coherent clustering of hyperspectral-style data: orthogonal
NMF with total-variation regularization, separated and combined solvers,
validation metrics and a synthetic-phantom experiment harness."""

from .grid import GridGeometry
from .initialization import KMEANSPP, SVD, InitMethod, init_factors, kmeanspp_centroids
from .linalg import (ProjectionBounds, clamp_strict_positive, frobenius_sq,
                     matmul, project_nonnegative)
from .metrics import (ContingencyTable, all_measures, contingency, entropy,
                      vd, vd_n, vi, vi_n)
from .multiplicative import (MUL1, MUL2, FactorState, Mul1Params, Mul2Params,
                             mul1_cost, mul1_step, mul2_cost, mul2_step, run_mul)
from .palm import (PalmParams, PalmResult, grad_u, grad_v, grad_w, ipalm_run,
                   lipschitz_u, lipschitz_v, lipschitz_w, palm_run,
                   sgd_grad_u, sgd_grad_v, spring_run)
from .phantom import Dataset, PhantomSpec, generate_phantom
from .separated import (KMEANS, ONMF_MU_CHOI, ONMF_MU_DING, SeparatedConfig,
                        harden, kmeans_cluster, onmf_multiplicative,
                        onmf_tv_pipeline)
from .tv import (NeighborGraph, build_neighborhoods, tv_divergence,
                 tv_eps_gradient, tv_eps_value, tv_prox, tv_prox_columns,
                 tv_targets_Z, tv_weights_P)
from .experiment import (ExperimentConfig, METHODS, method_defaults,
                         replicate_seed, run_experiment)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
