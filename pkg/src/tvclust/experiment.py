"""Replicated experiment execution.

A run takes one method configuration and one dataset, executes R independent
replicates (seed per replicate derived from the master seed), scores each
hardened clustering against the ground truth, and serializes per-replicate
metric rows, a quartile summary, label files and cluster maps.
"""

from __future__ import annotations

import concurrent.futures
import time
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from . import metrics as met
from .dataio import emit_label_map, write_labels_csv
from .initialization import KMEANSPP, SVD, InitMethod
from .linalg import clamp_strict_positive
from .multiplicative import MUL1, MUL2, Mul1Params, Mul2Params, run_mul
from .palm import PalmParams, ipalm_run, palm_run, spring_run
from .phantom import Dataset
from .separated import (KMEANS, ONMF_MU_CHOI, ONMF_MU_DING, SeparatedConfig,
                        onmf_tv_pipeline)

METHODS = (
    "KMEANS_TV",
    "ONMF_TV_CHOI",
    "ONMF_TV_DING",
    "ONMFTV_MUL1",
    "ONMFTV_MUL2",
    "ONMFTV_PALM",
    "ONMFTV_IPALM",
    "ONMFTV_SPRING",
)

_SEPARATED_BASE = {
    "KMEANS_TV": KMEANS,
    "ONMF_TV_CHOI": ONMF_MU_CHOI,
    "ONMF_TV_DING": ONMF_MU_DING,
}

METRICS_HEADER = "method,replicate,E,VI,VD,VDn,VIn,seconds"


def method_defaults(method: str) -> dict:
    """Per-method default hyperparameters (regularization weights, smoothing,
    iteration caps, init scheme and subsample count where applicable)."""
    table = {
        "KMEANS_TV": dict(tau=1.0, i_max=300, init=KMEANSPP, prox_iters=100),
        "ONMF_TV_CHOI": dict(tau=2e-2, i_max=600, init=SVD, prox_iters=100),
        "ONMF_TV_DING": dict(tau=2e-2, i_max=800, init=KMEANSPP, prox_iters=100),
        "ONMFTV_MUL1": dict(sigma1=0.5, sigma2=0.5, tau=5e-3,
                            eps_tv=float(np.sqrt(1e-5)), i_max=800, init=SVD),
        "ONMFTV_MUL2": dict(sigma1=1.0, tau=1e-3,
                            eps_tv=float(np.sqrt(1e-5)), i_max=700, init=SVD),
        "ONMFTV_PALM": dict(sigma1=0.1, sigma2=0.1, tau=0.1, i_max=400,
                            init=SVD, prox_iters=5),
        "ONMFTV_IPALM": dict(sigma1=0.1, sigma2=0.1, tau=0.1, i_max=300,
                             init=SVD, prox_iters=5),
        "ONMFTV_SPRING": dict(sigma1=0.1, sigma2=0.1, tau=1e-4, i_max=100,
                              s_r=40, init=SVD, prox_iters=5),
    }
    if method not in table:
        raise ValueError(f"unknown method {method!r}; choose from {METHODS}")
    return table[method]


@dataclass(frozen=True)
class ExperimentConfig:
    method: str
    k: int
    replicates: int = 30
    master_seed: int = 0
    init: str = SVD
    tau: float = 0.0
    sigma1: float = 0.0
    sigma2: float = 0.0
    eps_tv: float = float(np.sqrt(1e-5))
    s_r: int = 40
    i_max: int = 100
    prox_iters: int = 5

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValueError(f"unknown method {self.method!r}")
        if self.replicates < 1:
            raise ValueError("replicates must be >= 1")
        if self.init not in (SVD, KMEANSPP):
            raise ValueError(f"unknown init method {self.init!r}")
        if self.k < 1:
            raise ValueError("k must be >= 1")

    @classmethod
    def for_method(cls, method: str, k: int, replicates: int = 30,
                   master_seed: int = 0, **overrides) -> "ExperimentConfig":
        params = method_defaults(method)
        params.update(overrides)
        return cls(method=method, k=k, replicates=replicates,
                   master_seed=master_seed, **params)


def replicate_seed(master_seed: int, replicate: int) -> int:
    """Splittable per-replicate seed: replicate r is reproducible on its own."""
    ss = np.random.SeedSequence(entropy=master_seed, spawn_key=(replicate,))
    return int(ss.generate_state(1, np.uint64)[0])


@dataclass
class ReplicateRecord:
    method: str
    replicate: int
    labels: np.ndarray | None
    measures: dict | None
    seconds: float
    error: str | None = None


def _solve(cfg: ExperimentConfig, dataset: Dataset, seed: int) -> np.ndarray:
    """Dispatch one replicate to its solver; returns hardened labels."""
    x = clamp_strict_positive(dataset.x)
    init = InitMethod(cfg.init, seed)
    geometry = dataset.geometry

    if cfg.method in _SEPARATED_BASE:
        sep = SeparatedConfig(base=_SEPARATED_BASE[cfg.method], tau=cfg.tau,
                              i_max=cfg.i_max, init=init,
                              prox_iters=cfg.prox_iters)
        _, _, labels = onmf_tv_pipeline(x, cfg.k, sep, geometry)
        return labels
    if cfg.method == "ONMFTV_MUL1":
        params = Mul1Params(sigma1=cfg.sigma1, sigma2=cfg.sigma2, tau=cfg.tau,
                            eps_tv=cfg.eps_tv, i_max=cfg.i_max)
        return run_mul(x, cfg.k, MUL1, params, init, geometry,
                       cost_stride=max(1, cfg.i_max)).labels
    if cfg.method == "ONMFTV_MUL2":
        params = Mul2Params(sigma1=cfg.sigma1, tau=cfg.tau,
                            eps_tv=cfg.eps_tv, i_max=cfg.i_max)
        return run_mul(x, cfg.k, MUL2, params, init, geometry,
                       cost_stride=max(1, cfg.i_max)).labels

    params = PalmParams(sigma1=cfg.sigma1, sigma2=cfg.sigma2, tau=cfg.tau,
                        i_max=cfg.i_max, s_r=cfg.s_r,
                        prox_iters=cfg.prox_iters)
    runner = {"ONMFTV_PALM": palm_run, "ONMFTV_IPALM": ipalm_run,
              "ONMFTV_SPRING": spring_run}[cfg.method]
    return runner(x, cfg.k, params, init, geometry).labels


def run_replicate(cfg: ExperimentConfig, dataset: Dataset,
                  replicate: int) -> ReplicateRecord:
    """One replicate: derive its seed, initialize + solve (both timed),
    harden and score against the truth."""
    seed = replicate_seed(cfg.master_seed, replicate)
    start = time.perf_counter()
    try:
        labels = _solve(cfg, dataset, seed)
    except Exception as exc:  # solver failures are recorded, the run continues
        return ReplicateRecord(cfg.method, replicate, None, None,
                               time.perf_counter() - start, str(exc))
    seconds = time.perf_counter() - start
    table = met.contingency(labels, dataset.truth,
                            max(cfg.k, int(dataset.truth.max()) + 1))
    return ReplicateRecord(cfg.method, replicate, labels,
                           met.all_measures(table), seconds)


def run_experiment(cfg: ExperimentConfig, dataset: Dataset,
                   out_dir=None, threads: int = 1) -> list:
    """Execute all replicates (optionally in a process pool, results ordered
    by replicate index) and serialize metrics/summary/labels/maps."""
    reps = range(1, cfg.replicates + 1)
    if threads > 1:
        with concurrent.futures.ProcessPoolExecutor(max_workers=threads) as pool:
            records = list(pool.map(run_replicate, [cfg] * cfg.replicates,
                                    [dataset] * cfg.replicates, reps))
    else:
        records = [run_replicate(cfg, dataset, r) for r in reps]

    if out_dir is not None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        write_metrics_csv(records, out / "metrics.csv")
        write_summary_csv(records, out / "summary.csv")
        for rec in records:
            if rec.labels is None:
                continue
            write_labels_csv(rec.labels, out / f"labels_r{rec.replicate}.csv")
            emit_label_map(rec.labels, dataset.geometry,
                           out / f"map_r{rec.replicate}.pgm", n_clusters=cfg.k)
    return records


_FMT = "%.12g"


def metrics_rows(records) -> list[str]:
    rows = []
    for rec in records:
        if rec.measures is None:
            rows.append(f"{rec.method},{rec.replicate},nan,nan,nan,nan,nan,"
                        + _FMT % rec.seconds)
        else:
            m = rec.measures
            rows.append(",".join([rec.method, str(rec.replicate)]
                                 + [_FMT % m[key] for key in
                                    ("E", "VI", "VD", "VDn", "VIn")]
                                 + [_FMT % rec.seconds]))
    return rows


def write_metrics_csv(records, path) -> None:
    with open(path, "w") as fh:
        fh.write(METRICS_HEADER + "\n")
        for row in metrics_rows(records):
            fh.write(row + "\n")


def quartiles(values) -> dict:
    """Sort-based five-number summary with linear interpolation."""
    v = np.sort(np.asarray(values, dtype=float))
    if v.size == 0:
        raise ValueError("no values to summarize")

    def at(q: float) -> float:
        pos = q * (v.size - 1)
        lo = int(np.floor(pos))
        hi = int(np.ceil(pos))
        return float(v[lo] + (pos - lo) * (v[hi] - v[lo]))

    return {"min": float(v[0]), "q1": at(0.25), "median": at(0.5),
            "q3": at(0.75), "max": float(v[-1])}


def write_summary_csv(records, path) -> None:
    scored = [r for r in records if r.measures is not None]
    with open(path, "w") as fh:
        fh.write("method,measure,count,min,q1,median,q3,max\n")
        if not scored:
            return
        method = scored[0].method
        for key in ("E", "VI", "VD", "VDn", "VIn", "seconds"):
            vals = ([r.seconds for r in scored] if key == "seconds"
                    else [r.measures[key] for r in scored])
            q = quartiles(vals)
            fh.write(",".join([method, key, str(len(vals))]
                              + [_FMT % q[s] for s in
                                 ("min", "q1", "median", "q3", "max")]) + "\n")


def median_vdn(records) -> float:
    vals = [r.measures["VDn"] for r in records if r.measures is not None]
    if not vals:
        raise ValueError("no scored replicates")
    return quartiles(vals)["median"]


def ablated(cfg: ExperimentConfig) -> ExperimentConfig:
    """The tau = 0 ablation of a configuration (no TV regularization)."""
    return replace(cfg, tau=0.0)
