"""One end-to-end run per ExperimentSpec: sample, corrupt, estimate, evaluate."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Any

import numpy as np

from .config import STREAM_CENTRAL, STREAM_CORRUPT, STREAM_SAMPLE, ExperimentSpec, derive_rng
from .contamination import AdversaryStrategy, CorruptedDataset, corrupt
from .estimator import EstimationReport, evaluate, full_pipeline, naive_estimate
from .mallows import MallowsModel, sample_many
from .perm_core import Permutation, l2_distance, position_vector


def truth_model(n: int, phi: float, central, seed: int) -> MallowsModel:
    if isinstance(central, str):
        if central != "random":
            raise ValueError(f"central must be a list or 'random', got {central!r}")
        central = derive_rng(seed, STREAM_CENTRAL).permutation(n) + 1
    return MallowsModel.create(phi, Permutation(central))


def honest_samples(model: MallowsModel, s: int, seed: int) -> np.ndarray:
    return sample_many(model, s, derive_rng(seed, STREAM_SAMPLE))


def resolve_strategy(strategy: dict, n: int, seed: int) -> dict:
    """Fill seed-derived defaults: a coalition without ``preferred`` gets a random one."""
    kind = strategy["kind"]
    params = dict(strategy.get("params", {}))
    if kind == "coalition" and params.get("preferred") is None:
        params["preferred"] = [int(x) for x in derive_rng(seed, STREAM_CORRUPT, 1).permutation(n) + 1]
    return {"kind": kind, "params": params}


def corrupt_samples(samples: np.ndarray, eps: float, strategy: dict, seed: int) -> CorruptedDataset:
    return corrupt(samples, eps, AdversaryStrategy.from_dict(strategy), derive_rng(seed, STREAM_CORRUPT))


@dataclass
class RunResult:
    spec: ExperimentSpec
    truth: MallowsModel
    data: CorruptedDataset
    report: EstimationReport

    def row(self) -> dict[str, Any]:
        m = evaluate(self.report.model, self.truth, self.spec.eps)
        naive = naive_estimate(self.data.samples)
        naive_l2 = l2_distance(position_vector(naive), position_vector(self.truth.central))
        return {
            "n": self.spec.n,
            "phi": self.spec.phi,
            "s": self.spec.s,
            "eps": self.spec.eps,
            "strategy": self.spec.strategy["kind"],
            "seed": self.spec.seed,
            "phi_hat": self.report.phi_hat,
            "l2_error": m["l2_error"],
            "kt_error": m["kt_error"],
            "phi_error": m["phi_error"],
            "normalized_error": m["normalized_error"],
            "naive_l2_error": naive_l2,
            "path": self.report.path,
        }


def run_spec(spec: ExperimentSpec, baseline: bool = True) -> RunResult:
    truth = truth_model(spec.n, spec.phi, spec.central, spec.seed)
    x = honest_samples(truth, spec.s, spec.seed)
    data = corrupt_samples(x, spec.eps, resolve_strategy(spec.strategy, spec.n, spec.seed), spec.seed)
    report = full_pipeline(data.samples, spec.eps, spec.estimator_config(), truth=truth, baseline=baseline)
    return RunResult(spec, truth, data, report)


def normalized_error(l2: float, phi: float, eps: float) -> float:
    return (1.0 - phi) * l2 / (eps * math.log(1.0 / eps))
