"""Robust estimation of the central ranking and dispersion.

Pipeline: pad the samples, take a rough estimate by a bounded-covariance
robust mean of the scaled truncated position vectors, then repeatedly refine
it. Each refinement robustly estimates the mean front and back adjustment
vectors relative to the current guess and rebuilds the position vector from

    v_sample = v_reference + back - front,

which holds exactly for every sample. The dispersion is chosen by a tournament
over a grid of candidate values.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from .config import STREAM_PAD, STREAM_SELECT, EstimatorConfig, derive_rng
from .mallows import MallowsModel, tv_upper_bound
from .padding import PaddedInstance, pad
from .perm_core import (
    Permutation,
    as_batch,
    kendall_tau,
    l2_distance,
    mean_rank_order,
    position_vector,
    sort_to_permutation,
)
from .robust_mean import (
    BOUNDED_COV_C_STOP,
    STABLE_C_STOP,
    FilterDivergenceError,
    FilterReport,
    robust_mean_bounded_cov,
    robust_mean_stable,
)
from .selection import (
    copeland_ranking,
    estimate_phi_robust,
    hypothesis_tournament,
    majority_certified,
    phi_grid,
    select_same_central,
)


class NoHypothesisError(RuntimeError):
    """Every candidate model was rejected."""


@dataclass
class StepResult:
    central: Permutation
    vector: np.ndarray  # the unsorted estimate, on the original rank scale
    reports: list[FilterReport] = field(default_factory=list)
    diverged: bool = False
    delta: float | None = None


def _scale(phi: float) -> float:
    # (1 - phi) / sqrt(phi) makes each insertion displacement unit-variance in the limit
    return 1.0 if phi == 0.0 else (1.0 - phi) / math.sqrt(phi)


def naive_estimate(samples) -> Permutation:
    """Sort the plain coordinate-wise mean of the position vectors."""
    return mean_rank_order(samples)


def rough_step(inst: PaddedInstance, eps: float, sigma: float = 2.0, c_stop: float = BOUNDED_COV_C_STOP) -> StepResult:
    c = _scale(inst.phi)
    data = c * inst.trunc_ranks()
    report = robust_mean_bounded_cov(data, min(eps, 0.1), sigma, c_stop)
    v = report.estimate / c
    return StepResult(sort_to_permutation(v), v, [report])


def rough_estimate(inst: PaddedInstance, eps: float, sigma: float = 2.0, c_stop: float = BOUNDED_COV_C_STOP) -> Permutation:
    return rough_step(inst, eps, sigma, c_stop).central


def refinement_delta(eps: float, proxy: float, phi: float, c_delta: float = 1.0) -> float:
    """Stability radius for the adjustment-vector means given a distance proxy."""
    if eps <= 0.0:
        return 0.0
    return c_delta * (math.sqrt(eps * proxy * (1.0 - phi)) + eps * math.log(1.0 / eps))


def refine_step(
    inst: PaddedInstance,
    eps: float,
    current: Permutation,
    proxy: float,
    c_delta: float = 1.0,
    c_stop: float = STABLE_C_STOP,
) -> StepResult:
    """One refinement round. On filter divergence, ``current`` comes back flagged."""
    c = _scale(inst.phi)
    eps = min(eps, 0.1)
    delta = refinement_delta(eps, proxy, inst.phi, c_delta)
    front, back = inst.adjustments(current)
    try:
        rf = robust_mean_stable(c * front, eps, delta, c_stop)
        rb = robust_mean_stable(c * back, eps, delta, c_stop)
    except FilterDivergenceError as err:
        return StepResult(current, position_vector(current).astype(float), [err.report], True, delta)
    ref = inst.theta + position_vector(current)
    v = ref + (rb.estimate - rf.estimate) / c
    return StepResult(sort_to_permutation(v), v, [rf, rb], False, delta)


def refine(inst: PaddedInstance, eps: float, current: Permutation, proxy: float | None = None, **kw) -> Permutation:
    if proxy is None:
        proxy = rough_bound(eps, inst.phi)
    return refine_step(inst, eps, current, proxy, **kw).central


def rough_bound(eps: float, phi: float, c: float = 1.0) -> float:
    return c * math.sqrt(eps) / (1.0 - phi)


def _errors(est: Permutation, truth: Permutation | None) -> dict[str, Any]:
    if truth is None:
        return {}
    return {
        "l2_error": l2_distance(position_vector(est), position_vector(truth)),
        "kt_error": kendall_tau(est, truth),
    }


@dataclass
class RunTrace:
    """Telemetry for one pad / rough / refine pass at a fixed phi."""

    phi: float
    theta: int
    central: Permutation
    rough: dict[str, Any]
    rounds: list[dict[str, Any]]
    aborted: bool


def run_at_phi(
    samples: np.ndarray,
    eps: float,
    phi: float,
    cfg: EstimatorConfig,
    rng: np.random.Generator,
    truth: Permutation | None = None,
) -> RunTrace:
    """Pad at ``phi``, take the rough estimate, then refine.

    Raises FilterDivergenceError if the rough filter diverges.
    """
    eps_eff = eps if eps > 0 else 1.0 / samples.shape[0]
    inst = pad(
        samples,
        phi,
        eps_eff,
        rng,
        theta_override=cfg.theta_override,
        theta_coeff=cfg.theta_coeff,
        theta_cap=cfg.theta_cap,
    )
    rough = rough_step(inst, eps, cfg.rough_sigma, cfg.bounded_c_stop)
    current = rough.central
    rough_info = {"filter": rough.reports[0].to_dict(), **_errors(current, truth)}
    rounds_cap = cfg.refinement_rounds
    if rounds_cap is None:
        rounds_cap = math.ceil(10.0 * math.log(1.0 / eps_eff))
    bound = rough_bound(eps_eff, phi, cfg.rough_c)
    floor = eps_eff * math.log(1.0 / eps_eff) / (1.0 - phi)
    proxy = bound
    rounds: list[dict[str, Any]] = []
    aborted = False
    for _ in range(rounds_cap):
        step = refine_step(inst, eps, current, proxy, cfg.c_delta, cfg.stable_c_stop)
        moved = l2_distance(position_vector(step.central), position_vector(current))
        rounds.append(
            {
                "movement": moved,
                "delta": step.delta,
                "diverged": step.diverged,
                "filters": [r.to_dict() for r in step.reports],
                **_errors(step.central, truth),
            }
        )
        if step.diverged:
            aborted = True
            break
        current = step.central
        proxy = min(max(moved, floor), bound)
        if cfg.early_stop and moved < cfg.early_stop_tol:
            break
    return RunTrace(phi, inst.theta, current, rough_info, rounds, aborted)


@dataclass
class EstimationReport:
    phi_hat: float
    central_hat: Permutation
    path: str  # "majority" or "filter"
    eps: float
    phi_bracket: tuple[float, float]
    tournament: dict[str, Any]
    runs: list[RunTrace] = field(default_factory=list)
    truth: MallowsModel | None = None
    baseline: Permutation | None = None
    config: dict[str, Any] = field(default_factory=dict)

    @property
    def model(self) -> MallowsModel:
        return MallowsModel.create(self.phi_hat, self.central_hat)

    @property
    def final_run(self) -> RunTrace | None:
        return self.runs[-1] if self.runs else None

    def iteration_errors(self) -> list[float]:
        run = self.final_run
        if run is None or self.truth is None:
            return []
        return [r["l2_error"] for r in run.rounds]

    def to_dict(self) -> dict[str, Any]:
        out: dict[str, Any] = {
            "phi_hat": self.phi_hat,
            "central_hat": self.central_hat.to_list(),
            "path": self.path,
            "eps": self.eps,
            "phi_bracket": list(self.phi_bracket),
            "tournament": self.tournament,
            "config": self.config,
            "runs": [
                {
                    "phi": r.phi,
                    "theta": r.theta,
                    "central": r.central.to_list(),
                    "rough": r.rough,
                    "rounds": r.rounds,
                    "aborted": r.aborted,
                }
                for r in self.runs
            ],
        }
        if self.truth is not None:
            out["errors"] = evaluate(self.model, self.truth, self.eps)
            out["iteration_errors"] = self.iteration_errors()
        if self.baseline is not None:
            base = {"central": self.baseline.to_list()}
            if self.truth is not None:
                base.update(_errors(self.baseline, self.truth.central))
            out["baseline"] = base
        return out


def evaluate(est: MallowsModel, truth: MallowsModel, eps: float) -> dict[str, float | None]:
    """Position-vector, Kendall-tau and dispersion errors of ``est`` against ``truth``."""
    l2 = l2_distance(position_vector(est.central), position_vector(truth.central))
    if eps > 0 and truth.phi < 1:
        normalized = (1.0 - truth.phi) * l2 / (eps * math.log(1.0 / eps))
    else:
        normalized = None
    tv = tv_upper_bound(est, MallowsModel.create(est.phi, truth.central))
    return {
        "l2_error": l2,
        "kt_error": kendall_tau(est.central, truth.central),
        "phi_error": abs(est.phi - truth.phi),
        "tv_upper_bound": tv,
        "normalized_error": normalized,
    }


def full_pipeline(
    samples,
    eps: float,
    config: EstimatorConfig | None = None,
    truth: MallowsModel | None = None,
    baseline: bool = False,
) -> EstimationReport:
    """Estimate a Mallows model from an eps-corrupted sample.

    ``truth`` is used only to annotate the report with errors.
    """
    cfg = config or EstimatorConfig(eps=eps)
    samples = as_batch(samples)
    s, n = samples.shape
    if s < cfg.min_samples:
        raise ValueError(f"need at least {cfg.min_samples} samples, got {s}")
    if not 0.0 <= eps <= 0.1:
        raise ValueError(f"eps must lie in [0, 0.1], got {eps}")
    eps_eff = eps if eps > 0 else 1.0 / s
    lo, hi = estimate_phi_robust(samples, eps)
    grid = phi_grid(lo, hi, n, eps_eff, cfg.grid_cap)
    truth_central = truth.central if truth is not None else None
    base = naive_estimate(samples) if baseline else None

    def finish(phi_hat, central, path, tour, runs):
        return EstimationReport(
            float(phi_hat), central, path, eps, (lo, hi), tour, runs, truth, base, cfg.to_dict()
        )

    central = copeland_ranking(samples)
    if majority_certified(samples, eps, central):
        # every pair keeps a majority margin larger than the corruption can erase
        w, losses = select_same_central(grid, central, samples)
        return finish(grid[w], central, "majority", _tour(grid, losses, w), [])

    # padding needs phi < 1; keep the working value one grid step below 1
    top = 1.0 - max(eps_eff / n**2, 1e-4)
    work_grid = grid[grid <= top] if np.any(grid <= top) else np.array([top])

    if cfg.phi_mode == "grid":
        return _grid_mode(samples, eps, cfg, work_grid, truth_central, finish)

    w, losses = select_same_central(work_grid, central, samples)
    phi_work = float(work_grid[w])
    runs: list[RunTrace] = []
    for attempt in range(cfg.max_refits + 1):
        run = run_at_phi(samples, eps, phi_work, cfg, derive_rng(cfg.seed, STREAM_PAD, attempt), truth_central)
        runs.append(run)
        w, losses = select_same_central(work_grid, run.central, samples)
        phi_hat = float(work_grid[w])
        if abs(phi_hat - phi_work) <= cfg.refit_tol:
            break
        phi_work = phi_hat
    return finish(phi_hat, runs[-1].central, "filter", _tour(work_grid, losses, w), runs)


def _tour(grid: np.ndarray, losses: np.ndarray, winner: int) -> dict[str, Any]:
    return {
        "phis": [float(x) for x in grid],
        "losses": [int(x) for x in losses],
        "winner": int(winner),
    }


def _grid_mode(samples, eps, cfg, grid, truth_central, finish):
    runs: list[RunTrace] = []
    for k, phi in enumerate(grid):
        try:
            runs.append(run_at_phi(samples, eps, float(phi), cfg, derive_rng(cfg.seed, STREAM_PAD, k), truth_central))
        except FilterDivergenceError:
            continue
    if not runs:
        raise NoHypothesisError("every candidate's rough estimate diverged")
    cands = [MallowsModel.create(r.phi, r.central) for r in runs]
    w, losses = hypothesis_tournament(
        cands, samples, eps if eps > 0 else 1.0 / samples.shape[0], derive_rng(cfg.seed, STREAM_SELECT), cfg.mc_size
    )
    win = runs[w]
    tour = _tour(np.array([r.phi for r in runs]), losses, w)
    return finish(win.phi, win.central, "filter", tour, [win])
