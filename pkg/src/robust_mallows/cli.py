"""Command-line harness: ``robust-mallows <subcommand> ...``.

Exit codes: 0 success, 1 bad input file, 2 usage error, 3 filter divergence,
4 no surviving hypothesis.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import io
from .checks import SUITES, run_suite
from .config import EstimatorConfig, ExperimentSpec
from .estimator import NoHypothesisError, evaluate, full_pipeline
from .mallows import MallowsModel
from .perm_core import DimensionError, Permutation
from .robust_mean import FilterDivergenceError
from .runner import corrupt_samples, honest_samples, resolve_strategy, run_spec, truth_model

EXIT_INPUT = 1
EXIT_DIVERGENCE = 3
EXIT_NO_HYPOTHESIS = 4

SUMMARY_FIELDS = [
    "n", "phi", "s", "eps", "strategy", "seed", "phi_hat", "l2_error", "kt_error",
    "phi_error", "normalized_error", "naive_l2_error", "path",
]


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _central_arg(value: str):
    if value == "random":
        return value
    return [int(x) for x in value.split(",")]


def cmd_sample(args) -> int:
    model = truth_model(args.n, args.phi, args.central, args.seed)
    x = honest_samples(model, args.s, args.seed)
    io.write_permutations(args.out, x)
    truth = {"n": model.n, "phi": model.phi, "central": model.central.to_list(), "s": args.s, "seed": args.seed}
    io.write_json(io.sidecar_path(args.out, "truth"), truth, "truth")
    return 0


def cmd_corrupt(args) -> int:
    x = io.read_permutations(args.data)
    params = json.loads(args.params) if args.params else {}
    strategy = resolve_strategy({"kind": args.strategy, "params": params}, x.shape[1], args.seed)
    data = corrupt_samples(x, args.eps, strategy, args.seed)
    io.write_permutations(args.out, data.samples)
    mask = {
        "evaluation_only": True,
        "eps": args.eps,
        "strategy": strategy,
        "seed": args.seed,
        "n_corrupted": data.n_corrupted,
        "mask": [bool(b) for b in data.mask],
    }
    io.write_json(io.sidecar_path(args.out, "mask"), mask, "mask")
    return 0


def _load_truth(path) -> MallowsModel:
    t = io.read_json(path, "truth")
    return MallowsModel.create(t["phi"], Permutation(t["central"]))


def cmd_estimate(args) -> int:
    x = io.read_permutations(args.data)
    overrides = io.read_json(args.config) if args.config else {}
    cfg = EstimatorConfig.from_dict({**overrides, "eps": args.eps, "seed": args.seed})
    truth = _load_truth(args.truth) if args.truth else None
    try:
        report = full_pipeline(x, args.eps, cfg, truth=truth, baseline=args.baseline)
    except FilterDivergenceError as err:
        print(f"filter divergence: {err}", file=sys.stderr)
        return EXIT_DIVERGENCE
    except NoHypothesisError as err:
        print(f"no hypothesis: {err}", file=sys.stderr)
        return EXIT_NO_HYPOTHESIS
    doc = report.to_dict()
    io.validate(doc, "report")
    if "errors" in doc:
        io.validate(doc["errors"], "metrics")
    _emit(io.dumps(doc), args.out)
    return 0


def cmd_evaluate(args) -> int:
    rep = io.read_json(args.report, "report")
    truth = _load_truth(args.truth)
    est = MallowsModel.create(rep["phi_hat"], Permutation(rep["central_hat"]))
    if est.n != truth.n:
        raise DimensionError(f"report has n={est.n}, truth has n={truth.n}")
    metrics = evaluate(est, truth, rep["eps"])
    io.validate(metrics, "metrics")
    _emit(io.dumps(metrics), args.out)
    return 0


def cmd_oracle_check(args) -> int:
    verdict = run_suite(args.suite)
    io.validate(verdict, "oracle")
    _emit(io.dumps(verdict), args.out)
    return 0 if verdict["passed"] else EXIT_INPUT


def _run_one(spec_dict: dict) -> tuple[dict, dict]:
    res = run_spec(ExperimentSpec.from_dict(spec_dict))
    return res.row(), res.report.to_dict()


def cmd_experiment(args) -> int:
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    overrides = io.read_json(args.config) if args.config else {}
    specs = []
    for k in range(args.reps):
        for kind in args.strategies.split(","):
            for eps in (float(e) for e in args.eps_grid.split(",")):
                spec = ExperimentSpec(
                    n=args.n,
                    phi=args.phi,
                    s=args.s,
                    eps=eps,
                    seed=args.seed + k,
                    central=args.central,
                    strategy={"kind": kind, "params": {}},
                    estimator=overrides,
                )
                io.validate(spec.to_dict(), "spec")
                specs.append(spec.to_dict())
    if args.workers > 1:
        with ProcessPoolExecutor(args.workers) as pool:
            results = list(pool.map(_run_one, specs))
    else:
        results = [_run_one(s) for s in specs]
    for spec, (row, report) in zip(specs, results):
        tag = f"{row['strategy']}_eps{row['eps']:g}_seed{row['seed']}"
        io.write_json(out / f"report_{tag}.json", report, "report")
    with open(out / "summary.csv", "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=SUMMARY_FIELDS, lineterminator="\n")
        w.writeheader()
        for row, _ in results:
            w.writerow({k: _fmt(row[k]) for k in SUMMARY_FIELDS})
    return 0


def _fmt(v):
    if isinstance(v, float):
        return repr(v)
    return "" if v is None else v


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="robust-mallows", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("sample", help="draw a Mallows dataset (JSONL) plus a ground-truth sidecar")
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--phi", type=float, required=True)
    s.add_argument("--s", type=int, required=True)
    s.add_argument("--central", type=_central_arg, default="random", help="'random' or comma-separated ranking")
    s.add_argument("--seed", type=int, required=True)
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_sample)

    c = sub.add_parser("corrupt", help="apply an adversary; writes JSONL plus an evaluation-only mask sidecar")
    c.add_argument("--data", required=True)
    c.add_argument("--eps", type=float, required=True)
    c.add_argument("--strategy", required=True, choices=["uniform_junk", "reversal", "targeted_shift", "mean_attack", "coalition"])
    c.add_argument("--params", default=None, help="JSON object of strategy parameters")
    c.add_argument("--seed", type=int, required=True)
    c.add_argument("--out", required=True)
    c.set_defaults(func=cmd_corrupt)

    e = sub.add_parser("estimate", help="run the robust estimator")
    e.add_argument("--data", required=True)
    e.add_argument("--eps", type=float, required=True)
    e.add_argument("--seed", type=int, default=0)
    e.add_argument("--config", default=None, help="JSON file of estimator settings")
    e.add_argument("--truth", default=None, help="ground-truth sidecar, for per-round errors")
    e.add_argument("--baseline", action="store_true", help="also report the naive mean-rank estimate")
    e.add_argument("--out", default=None)
    e.set_defaults(func=cmd_estimate)

    v = sub.add_parser("evaluate", help="compare a report against ground truth")
    v.add_argument("--report", required=True)
    v.add_argument("--truth", required=True)
    v.add_argument("--out", default=None)
    v.set_defaults(func=cmd_evaluate)

    o = sub.add_parser("oracle-check", help="run an exhaustive invariant suite")
    o.add_argument("--suite", required=True, choices=SUITES)
    o.add_argument("--out", default=None)
    o.set_defaults(func=cmd_oracle_check)

    x = sub.add_parser("experiment", help="sample/corrupt/estimate/evaluate over an eps x strategy grid")
    x.add_argument("--n", type=int, required=True)
    x.add_argument("--phi", type=float, required=True)
    x.add_argument("--s", type=int, required=True)
    x.add_argument("--eps-grid", default="0,0.05")
    x.add_argument("--strategies", default="reversal,mean_attack,coalition")
    x.add_argument("--reps", type=int, default=1, help="replicates; replicate k uses seed + k")
    x.add_argument("--central", type=_central_arg, default="random")
    x.add_argument("--config", default=None)
    x.add_argument("--seed", type=int, required=True)
    x.add_argument("--workers", type=int, default=1)
    x.add_argument("--out-dir", required=True)
    x.set_defaults(func=cmd_experiment)
    return p


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (io.ParseError, DimensionError, FileNotFoundError, ValueError) as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
