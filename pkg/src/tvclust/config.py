"""Flat ``key = value`` configuration files.

Lines may carry ``#`` comments; unknown or duplicate keys are rejected so
typos fail fast instead of silently running a default.
"""

from __future__ import annotations

from pathlib import Path

from .experiment import ExperimentConfig, method_defaults
from .phantom import PhantomSpec

_EXPERIMENT_KEYS = {
    "method": str,
    "k": int,
    "replicates": int,
    "master_seed": int,
    "init": str,
    "tau": float,
    "sigma1": float,
    "sigma2": float,
    "eps_tv": float,
    "s_r": int,
    "i_max": int,
    "prox_iters": int,
}

_PHANTOM_KEYS = {
    "phantom_d1": int,
    "phantom_d2": int,
    "phantom_k": int,
    "phantom_n": int,
    "phantom_layout": str,
    "phantom_noise": float,
    "phantom_overlap": float,
    "phantom_seed": int,
}

_DATASET_KEYS = {"data_dir": str}

_SWEEP_KEYS = {"sweep_tau": str, "sweep_sigma1": str, "sweep_sigma2": str}

KNOWN_KEYS = {**_EXPERIMENT_KEYS, **_PHANTOM_KEYS, **_DATASET_KEYS, **_SWEEP_KEYS}


def parse_config_file(path) -> dict:
    """Read a config file into a typed dict, validating every key."""
    raw: dict[str, str] = {}
    for lineno, line in enumerate(Path(path).read_text().splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"{path}:{lineno}: expected 'key = value'")
        key, value = (part.strip() for part in line.split("=", 1))
        if key not in KNOWN_KEYS:
            raise ValueError(f"{path}:{lineno}: unknown key {key!r}")
        if key in raw:
            raise ValueError(f"{path}:{lineno}: duplicate key {key!r}")
        raw[key] = value

    typed = {}
    for key, value in raw.items():
        try:
            typed[key] = KNOWN_KEYS[key](value)
        except ValueError as exc:
            raise ValueError(f"{path}: bad value for {key!r}: {value!r}") from exc
    return typed


def experiment_from_config(cfg: dict, seed_override: int | None = None) -> ExperimentConfig:
    if "method" not in cfg or "k" not in cfg:
        raise ValueError("config must set 'method' and 'k'")
    method = cfg["method"]
    params = method_defaults(method)
    for key in _EXPERIMENT_KEYS:
        if key in cfg and key not in ("method", "k", "replicates", "master_seed"):
            params[key] = cfg[key]
    return ExperimentConfig(
        method=method,
        k=cfg["k"],
        replicates=cfg.get("replicates", 30),
        master_seed=seed_override if seed_override is not None
        else cfg.get("master_seed", 0),
        **params,
    )


def phantom_from_config(cfg: dict, seed_override: int | None = None) -> PhantomSpec:
    required = ("phantom_d1", "phantom_d2", "phantom_k", "phantom_n")
    missing = [key for key in required if key not in cfg]
    if missing:
        raise ValueError(f"config is missing phantom keys: {missing}")
    return PhantomSpec(
        d1=cfg["phantom_d1"],
        d2=cfg["phantom_d2"],
        k_true=cfg["phantom_k"],
        n_channels=cfg["phantom_n"],
        layout=cfg.get("phantom_layout", "stripes"),
        noise_sigma=cfg.get("phantom_noise", 0.0),
        signature_overlap=cfg.get("phantom_overlap", 0.0),
        seed=seed_override if seed_override is not None
        else cfg.get("phantom_seed", 0),
    )


def sweep_values(cfg: dict, key: str) -> list[float] | None:
    if key not in cfg:
        return None
    values = [float(tok) for tok in cfg[key].split(",") if tok.strip()]
    if not values:
        raise ValueError(f"{key} lists no values")
    return values
