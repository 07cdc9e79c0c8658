"""Robust learning of Mallows ranking models under strong contamination."""

from .contamination import AdversaryStrategy, CorruptedDataset, coalition_scenario, corrupt
from .estimator import EstimationReport, NoHypothesisError, full_pipeline, naive_estimate
from .mallows import MallowsModel, log_pmf, sample, sample_many
from .perm_core import Permutation, kendall_tau, position_vector
from .robust_mean import FilterDivergenceError, robust_mean_bounded_cov, robust_mean_stable

__all__ = [
    "AdversaryStrategy",
    "CorruptedDataset",
    "EstimationReport",
    "FilterDivergenceError",
    "MallowsModel",
    "NoHypothesisError",
    "Permutation",
    "coalition_scenario",
    "corrupt",
    "full_pipeline",
    "kendall_tau",
    "log_pmf",
    "naive_estimate",
    "position_vector",
    "robust_mean_bounded_cov",
    "robust_mean_stable",
    "sample",
    "sample_many",
]
