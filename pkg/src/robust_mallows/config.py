"""Configuration dataclasses and seed handling.

Every random stream is derived from one master seed by a counter scheme:
``np.random.default_rng([seed, *keys])``. Independent pieces of work (grid
points, refits, Monte Carlo draws) use distinct key tuples, so their output
does not depend on execution order.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from typing import Any

import numpy as np

# stream identifiers for derive_rng
STREAM_SAMPLE = 1
STREAM_CORRUPT = 2
STREAM_PAD = 3
STREAM_SELECT = 4
STREAM_CENTRAL = 5


def derive_rng(seed: int, *keys: int) -> np.random.Generator:
    return np.random.default_rng([int(seed), *(int(k) for k in keys)])


def _from_dict(cls, d: dict):
    names = {f.name for f in dataclasses.fields(cls)}
    unknown = set(d) - names
    if unknown:
        raise ValueError(f"unknown {cls.__name__} fields: {sorted(unknown)}")
    return cls(**d)


@dataclass(frozen=True)
class EstimatorConfig:
    eps: float = 0.05
    seed: int = 0
    theta_coeff: float = 10.0
    theta_cap: int = 5000
    theta_override: int | None = None
    grid_cap: int = 200
    # None -> ceil(10 log(1/eps)) rounds
    refinement_rounds: int | None = None
    early_stop: bool = True
    early_stop_tol: float = 0.5
    mc_size: int | None = None
    rough_sigma: float = 2.0
    bounded_c_stop: float = 10.0
    stable_c_stop: float = 0.3
    c_delta: float = 1.0
    rough_c: float = 1.0
    # "select": one pipeline at a selected phi, refit until phi settles
    # "grid": one pipeline per grid point, then a tournament between them
    phi_mode: str = "select"
    refit_tol: float = 0.01
    max_refits: int = 2
    min_samples: int = 100

    def __post_init__(self):
        if self.phi_mode not in ("select", "grid"):
            raise ValueError(f"phi_mode must be 'select' or 'grid', got {self.phi_mode!r}")
        if self.eps < 0:
            raise ValueError("eps must be nonnegative")

    def to_dict(self) -> dict[str, Any]:
        return dataclasses.asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "EstimatorConfig":
        return _from_dict(cls, d)


@dataclass(frozen=True)
class ExperimentSpec:
    """Everything needed to reproduce one sample -> corrupt -> estimate -> evaluate run."""

    n: int
    phi: float
    s: int
    eps: float
    seed: int
    central: list[int] | str = "random"
    strategy: dict[str, Any] = field(default_factory=lambda: {"kind": "reversal", "params": {}})
    estimator: dict[str, Any] = field(default_factory=dict)

    def to_dict(self) -> dict[str, Any]:
        return dataclasses.asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentSpec":
        return _from_dict(cls, d)

    def estimator_config(self) -> EstimatorConfig:
        return EstimatorConfig.from_dict({"eps": self.eps, "seed": self.seed, **self.estimator})
