"""Command-line front end: data generation, training, evaluation, regret
simulation, accountant queries, and experiment sweeps.

Every run emits a JSON result record echoing its full configuration, so a
record can be replayed exactly; sweeps additionally write a CSV summary,
one row per cell.  Seeds default to the ``PRIVBOOST_SEED`` environment
variable, then to 0.
"""
from __future__ import annotations

import argparse
import json
import math
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from itertools import product
from pathlib import Path

import numpy as np

from . import __version__
from .boosting import aggregate_values, margin_failure_fraction
from .data import (
    GeneratorConfig,
    NoiseConfig,
    apply_rcn,
    generate_margin_sample,
    read_sample,
    write_flips,
    write_sample,
)
from .exceptions import PrivBoostError, WeakLearnerFailureError
from .games import regret_campaign
from .halfspace import LearnerParams, empirical_error, learn_halfspace
from .privacy import (
    ApproxDpParams,
    calibrate_sigma,
    epsilon_sufficient,
    fatshattering_terms,
    privacy_only_terms,
    required_n_fatshattering,
    required_n_privacy_only,
    weak_learner_rho,
    zcdp_to_dp,
)
from .rng import stream

__all__ = ["main"]


class _Parser(argparse.ArgumentParser):
    # usage problems are validation errors: exit 1, not argparse's 2
    def error(self, message):
        self.print_usage(sys.stderr)
        sys.stderr.write(f"{self.prog}: error: {message}\n")
        raise SystemExit(1)


def _resolve_seed(value) -> int:
    if value is not None:
        return int(value)
    env = os.environ.get("PRIVBOOST_SEED")
    return int(env) if env else 0


def _atomic_write(path: Path, text: str) -> None:
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_text(text, encoding="utf-8")
    os.replace(tmp, path)


def _write_json(path, payload) -> None:
    _atomic_write(Path(path), json.dumps(payload, indent=2, sort_keys=True) + "\n")


def _emit(payload, out_path=None) -> None:
    text = json.dumps(payload, indent=2, sort_keys=True)
    if out_path:
        _atomic_write(Path(out_path), text + "\n")
    print(text)


def _finite(value: float) -> float:
    value = float(value)
    if not math.isfinite(value):
        raise PrivBoostError(f"metric is not finite: {value}")
    return value


# ---------------------------------------------------------------------------
# training core, shared by `train` and `sweep`
# ---------------------------------------------------------------------------

def _train_record(config: dict) -> dict:
    """Train one model from a fully-resolved config and report metrics.

    The config echo in the returned record is exactly the input config, so
    re-running it reproduces the record (minus wall-clock).
    """
    started = time.perf_counter()
    seed = int(config["seed"])

    if config.get("data"):
        sample = read_sample(config["data"])
        target = None
    else:
        sample, target = generate_margin_sample(
            GeneratorConfig(
                d=int(config["d"]),
                n=int(config["n"]),
                tau=float(config["tau"]),
                seed=seed,
            )
        )

    eta = float(config.get("eta") or 0.0)
    flips = np.array([], dtype=np.int64)
    if eta > 0.0:
        sample, flips = apply_rcn(sample, NoiseConfig(eta=eta, seed=seed))
    if config.get("flips_out"):
        write_flips(flips, config["flips_out"])

    privacy_target = None
    if config.get("sigma") is None and config.get("epsilon") is not None:
        privacy_target = ApproxDpParams(float(config["epsilon"]), float(config["delta"]))
    params = LearnerParams(
        alpha=float(config["alpha"]),
        beta=float(config["beta"]),
        tau=float(config["tau"]),
        sigma_override=None if config.get("sigma") is None else float(config["sigma"]),
        privacy_target=privacy_target,
        noise_constant=float(config.get("noise_constant", 1.0)),
        rounds_override=None if config.get("rounds") is None else int(config["rounds"]),
        record_trace=True,
    )
    result = learn_halfspace(sample, params, seed)

    z = result.hypothesis
    gamma = params.tau / 8.0
    margins = sample.y * aggregate_values(sample, result.boost.hypotheses)
    advantages = result.boost.trace.advantages
    delta = float(config["delta"])

    metrics = {
        "train_error": _finite(empirical_error(z, sample)),
        "min_margin": _finite(float(margins.min())),
        "margin_failure_fraction": _finite(
            margin_failure_fraction(result.boost, sample, gamma)
        ),
        "margin_gamma": _finite(gamma),
        "hypothesis_norm": _finite(float(np.linalg.norm(z))),
        "advantage_min": _finite(float(advantages.min())),
        "advantage_mean": _finite(float(advantages.mean())),
        "advantage_max": _finite(float(advantages.max())),
        "rounds": int(result.boost.rounds),
        "flipped_labels": int(flips.size),
    }

    rho_total = result.ledger.rho_total
    if math.isfinite(rho_total):
        metrics["rho_total"] = _finite(rho_total)
        metrics["epsilon"] = _finite(zcdp_to_dp(rho_total, delta).epsilon)
        metrics["epsilon_sufficient"] = _finite(epsilon_sufficient(rho_total, delta))
        metrics["delta"] = delta
    else:
        metrics["private"] = False  # sigma == 0 spends an unbounded budget

    test_error = None
    if config.get("test_data"):
        test_sample = read_sample(config["test_data"])
        test_error = empirical_error(z, test_sample)
    elif config.get("test_n") and not config.get("data"):
        # held-out data must come from the same concept: reuse the hidden
        # target direction, only the points are fresh
        test_sample, _ = generate_margin_sample(
            GeneratorConfig(
                d=int(config["d"]),
                n=int(config["test_n"]),
                tau=float(config["tau"]),
                seed=int(stream(seed, "test-data").integers(2**63)),
                target_direction=target,
            )
        )
        test_error = empirical_error(z, test_sample)
    if test_error is not None:
        metrics["test_error"] = _finite(test_error)

    record = {
        "config": dict(config),
        "seed": seed,
        "metrics": metrics,
        "wall_clock_sec": time.perf_counter() - started,
    }
    model = {
        "hypothesis": [float(v) for v in z],
        "d": int(sample.d),
        "config": dict(config),
        "rho_total": None if not math.isfinite(rho_total) else rho_total,
        "epsilon": metrics.get("epsilon"),
        "epsilon_sufficient": metrics.get("epsilon_sufficient"),
        "delta": delta,
        "rounds": int(result.boost.rounds),
    }
    return {"record": record, "model": model}


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def _cmd_gen_data(args) -> int:
    seed = _resolve_seed(args.seed)
    cfg = GeneratorConfig(d=args.d, n=args.n, tau=args.tau, seed=seed)
    sample, _ = generate_margin_sample(cfg)
    write_sample(sample, args.out, tau=args.tau, seed=seed)
    _emit({"task": "gen-data", "out": str(args.out), "n": sample.n, "d": sample.d, "seed": seed})
    return 0


def _cmd_train(args) -> int:
    config = {
        "task": "train",
        "data": args.data,
        "alpha": args.alpha,
        "beta": args.beta,
        "tau": args.tau,
        "eta": args.eta,
        "sigma": args.sigma,
        "epsilon": args.epsilon,
        "delta": args.delta,
        "noise_constant": args.noise_constant,
        "rounds": args.rounds,
        "test_data": args.test_data,
        "flips_out": args.flips_out,
        "seed": _resolve_seed(args.seed),
    }
    bundle = _train_record(config)
    if args.out:
        _write_json(args.out, bundle["model"])
    _emit(bundle["record"], args.record)
    return 0


def _cmd_eval(args) -> int:
    model = json.loads(Path(args.model).read_text(encoding="utf-8"))
    z = np.asarray(model["hypothesis"], dtype=np.float64)
    sample = read_sample(args.data)
    record = {
        "task": "eval",
        "model": str(args.model),
        "data": str(args.data),
        "n": sample.n,
        "error": _finite(empirical_error(z, sample)),
    }
    _emit(record, args.out)
    return 0


def _cmd_regret_sim(args) -> int:
    seed = _resolve_seed(args.seed)
    if args.kappa * args.n < 1.0:
        raise PrivBoostError("kappa * n must be at least 1")
    report = regret_campaign(
        trials=args.trials,
        seed=seed,
        n=args.n,
        rounds=args.T,
        lam=args.lam,
        kappa=args.kappa,
        n_random_comparators=args.comparators,
    )
    report.update(
        {"task": "regret-sim", "n": args.n, "kappa": args.kappa, "lambda": args.lam, "T": args.T, "seed": seed}
    )
    _emit(report, args.out)
    return 1 if report["failures"] else 0


def _cmd_accountant(args) -> int:
    out: dict = {"task": "accountant"}
    if args.bound:
        for name in ("alpha", "beta", "tau", "epsilon"):
            if getattr(args, name) is None:
                raise PrivBoostError(f"--bound requires --{name}")
        common = (args.alpha, args.beta, args.tau, args.epsilon, args.delta)
        if args.bound == "margin":
            out["required_n"] = required_n_fatshattering(*common, bound_scale=args.bound_scale)
            out["terms"] = fatshattering_terms(*common)
        else:
            out["required_n"] = required_n_privacy_only(*common, bound_scale=args.bound_scale)
            out["terms"] = privacy_only_terms(*common)
        out.update({"bound": args.bound, "alpha": args.alpha, "beta": args.beta,
                    "tau": args.tau, "epsilon": args.epsilon, "delta": args.delta})
        _emit(out, args.out)
        return 0

    for name in ("kappa", "n", "rounds"):
        if getattr(args, name) is None:
            raise PrivBoostError(f"accountant needs --{name} (or use --bound)")
    out.update({"kappa": args.kappa, "n": args.n, "rounds": args.rounds, "delta": args.delta})
    if args.sigma is not None:
        rho = weak_learner_rho(args.kappa, args.n, 1.0 / (args.kappa * args.n), args.sigma)
        total = rho * args.rounds
        out.update(
            {
                "sigma": args.sigma,
                "rho_per_round": rho,
                "rho_total": total,
                "epsilon": zcdp_to_dp(total, args.delta).epsilon,
                "epsilon_sufficient": epsilon_sufficient(total, args.delta),
            }
        )
    if args.target_epsilon is not None:
        target = ApproxDpParams(args.target_epsilon, args.delta)
        out["sigma_calibrated"] = calibrate_sigma(target, args.rounds, args.kappa, args.n)
        out["sigma_calibrated_exact"] = calibrate_sigma(
            target, args.rounds, args.kappa, args.n, exact=True
        )
    if args.sigma is None and args.target_epsilon is None:
        raise PrivBoostError("accountant needs --sigma or --target-epsilon")
    _emit(out, args.out)
    return 0


def _sweep_cells(args) -> list[dict]:
    base_seed = _resolve_seed(args.seed)
    seeds = [int(stream(base_seed, "sweep", i).integers(2**63)) for i in range(args.seeds)]
    grid = list(
        product(args.n, args.tau, args.alpha, args.eta, args.sigma or [None], seeds)
    )
    cells = []
    for index, (n, tau, alpha, eta, sigma, seed) in enumerate(grid):
        cells.append(
            {
                "task": "train",
                "cell": index,
                "data": None,
                "d": args.d,
                "n": n,
                "tau": tau,
                "alpha": alpha,
                "beta": args.beta,
                "eta": eta,
                "sigma": sigma,
                "epsilon": None,
                "delta": args.delta,
                "noise_constant": args.noise_constant,
                "rounds": args.rounds,
                "test_n": args.test_n,
                "seed": seed,
            }
        )
    return cells


def _run_cell(config: dict) -> dict:
    try:
        return _train_record(config)["record"]
    except Exception as exc:  # noqa: BLE001 - per-cell failures are recorded
        return {"config": config, "seed": config["seed"], "error": repr(exc)}


_CSV_METRICS = [
    "train_error",
    "test_error",
    "margin_failure_fraction",
    "min_margin",
    "hypothesis_norm",
    "rho_total",
    "epsilon",
]


def _cmd_sweep(args) -> int:
    cells = _sweep_cells(args)
    if args.jobs > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            records = list(pool.map(_run_cell, cells))
    else:
        records = [_run_cell(cell) for cell in cells]

    records.sort(key=lambda r: r["config"]["cell"])
    failures = [r for r in records if "error" in r]
    if args.out_json:
        _write_json(args.out_json, records)
    if args.out_csv:
        keys = ["cell", "n", "tau", "alpha", "eta", "sigma", "seed"]
        lines = [",".join(keys + _CSV_METRICS)]
        for record in records:
            config = record["config"]
            metrics = record.get("metrics", {})
            row = [str(config.get(k, "")) for k in keys]
            row += [
                "" if metrics.get(m) is None else repr(metrics[m]) for m in _CSV_METRICS
            ]
            lines.append(",".join(row))
        _atomic_write(Path(args.out_csv), "\n".join(lines) + "\n")
    print(
        json.dumps(
            {
                "task": "sweep",
                "cells": len(cells),
                "failed": len(failures),
                "out_json": args.out_json,
                "out_csv": args.out_csv,
            },
            indent=2,
        )
    )
    if failures:
        for failure in failures:
            print(f"cell {failure['config']['cell']} failed: {failure['error']}", file=sys.stderr)
    return 2 if failures and len(failures) == len(cells) else 0


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------

def _build_parser() -> _Parser:
    parser = _Parser(prog="privboost", description=__doc__)
    parser.add_argument("--version", action="version", version=f"privboost {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen-data", help="generate a margin-separated sample as CSV")
    p.add_argument("--d", type=int, required=True, help="ambient dimension")
    p.add_argument("--n", type=int, required=True, help="number of examples")
    p.add_argument("--tau", type=float, required=True, help="margin in (0, 1)")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--out", required=True, help="output CSV path")
    p.set_defaults(func=_cmd_gen_data)

    p = sub.add_parser("train", help="train the private boosted halfspace")
    p.add_argument("--data", required=True, help="training CSV")
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--beta", type=float, required=True)
    p.add_argument("--tau", type=float, required=True)
    p.add_argument("--eta", type=float, default=0.0, help="label-flip rate applied before training")
    p.add_argument("--sigma", type=float, default=None, help="noise-scale override (0 = no noise)")
    p.add_argument("--epsilon", type=float, default=None, help="calibrate noise to this epsilon")
    p.add_argument("--delta", type=float, default=1e-6)
    p.add_argument("--noise-constant", type=float, default=1.0, dest="noise_constant")
    p.add_argument("--rounds", type=int, default=None, help="override the schedule's round count")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--out", default=None, help="model JSON path")
    p.add_argument("--record", default=None, help="result-record JSON path")
    p.add_argument("--test-data", default=None, dest="test_data", help="held-out CSV for test error")
    p.add_argument("--flips-out", default=None, dest="flips_out",
                   help="write flipped label indices, one per line")
    p.set_defaults(func=_cmd_train)

    p = sub.add_parser("eval", help="evaluate a trained model on a CSV sample")
    p.add_argument("--model", required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--out", default=None)
    p.set_defaults(func=_cmd_eval)

    p = sub.add_parser("regret-sim", help="verify the regret bound on random games")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--kappa", type=float, required=True)
    p.add_argument("--lambda", type=float, required=True, dest="lam")
    p.add_argument("--T", type=int, required=True)
    p.add_argument("--trials", type=int, default=100)
    p.add_argument("--comparators", type=int, default=10, help="random comparators per trial")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--out", default=None)
    p.set_defaults(func=_cmd_regret_sim)

    p = sub.add_parser("accountant", help="zCDP budgets, conversions, sample bounds")
    p.add_argument("--kappa", type=float, default=None)
    p.add_argument("--n", type=int, default=None)
    p.add_argument("--sigma", type=float, default=None)
    p.add_argument("--rounds", type=int, default=None)
    p.add_argument("--delta", type=float, default=1e-6)
    p.add_argument("--target-epsilon", type=float, default=None, dest="target_epsilon")
    p.add_argument("--bound", choices=["margin", "privacy-only"], default=None,
                   help="report an advisory sample-size bound instead")
    p.add_argument("--alpha", type=float, default=None)
    p.add_argument("--beta", type=float, default=None)
    p.add_argument("--tau", type=float, default=None)
    p.add_argument("--epsilon", type=float, default=None)
    p.add_argument("--bound-scale", type=float, default=1.0, dest="bound_scale")
    p.add_argument("--out", default=None)
    p.set_defaults(func=_cmd_accountant)

    p = sub.add_parser("sweep", help="grid of training runs with derived seeds")
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--n", type=int, nargs="+", required=True)
    p.add_argument("--tau", type=float, nargs="+", required=True)
    p.add_argument("--alpha", type=float, nargs="+", required=True)
    p.add_argument("--eta", type=float, nargs="+", default=[0.0])
    p.add_argument("--sigma", type=float, nargs="+", default=None)
    p.add_argument("--beta", type=float, default=0.1)
    p.add_argument("--delta", type=float, default=1e-6)
    p.add_argument("--noise-constant", type=float, default=1.0, dest="noise_constant")
    p.add_argument("--rounds", type=int, default=None)
    p.add_argument("--seeds", type=int, default=1, help="number of derived seeds per grid point")
    p.add_argument("--seed", type=int, default=None, help="base seed for derivation")
    p.add_argument("--test-n", type=int, default=2000, dest="test_n")
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--out-json", default=None, dest="out_json")
    p.add_argument("--out-csv", default=None, dest="out_csv")
    p.set_defaults(func=_cmd_sweep)

    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except WeakLearnerFailureError as exc:
        print(f"runtime failure: {exc}", file=sys.stderr)
        return 2
    except PrivBoostError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:  # noqa: BLE001 - CLI boundary
        print(f"runtime failure: {exc!r}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
