"""Command-line interface.

Every run prints a single JSON document to stdout whose ``manifest`` block
records the subcommand, package version, timestamp, and the full
configuration, so results are traceable to their inputs.  Warnings (ignored
CSV columns, dropped bootstrap replicates) go to stderr.

Determinism: all randomness flows from explicit seeds (``--seed``, with the
``LOGITBOOT_SEED`` environment variable as fallback default), and setting
``SOURCE_DATE_EPOCH`` pins the manifest timestamp, making output
byte-identical across runs.

Exit codes: 0 success, 1 usage error, 2 degenerate response, 3 numerical
failure (separation, singular information, or non-convergence), 4 input
file or parse error.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
from datetime import datetime, timezone

import numpy as np

from . import __version__
from .data_io import ENCODED_COLUMNS, SimulationSpec, encode, load_csv, save_csv, simulate
from .errors import (
    DegenerateResponseError,
    DomainError,
    InsufficientReplicatesError,
    NotConvergedError,
    ParseError,
    ResamplingInstabilityError,
    SchemaError,
    SeparationError,
    UnknownPredictorError,
)
from .inference import (
    acceleration_from_jackknife,
    bca_ci,
    bootstrap_fit,
    jackknife_estimates,
    odds_report,
    odds_scale,
    percentile_ci,
    wald_ci,
)
from .model_core import EncodedDataset, FitConfig, FitResult, fit_mle
from .validation import (
    holdout_validate,
    probability_curves,
    split_sample_fit,
    standard_profiles,
)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DEGENERATE = 2
EXIT_NUMERICAL = 3
EXIT_IO = 4

_PROFILE_NAMES = ("male-emp", "male-unemp", "female-emp", "female-unemp")


class _Parser(argparse.ArgumentParser):
    # argparse exits with 2 on usage errors; this CLI reserves 2 for
    # degenerate data, so remap to 1.
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def _timestamp() -> str:
    pinned = os.environ.get("SOURCE_DATE_EPOCH")
    if pinned is not None:
        try:
            moment = datetime.fromtimestamp(int(pinned), tz=timezone.utc)
        except (ValueError, OverflowError, OSError):
            raise DomainError("SOURCE_DATE_EPOCH must be an integer timestamp")
    else:
        moment = datetime.now(timezone.utc)
    return moment.strftime("%Y-%m-%dT%H:%M:%SZ")


def _resolve_seed(value: int | None) -> int:
    if value is not None:
        return value
    env = os.environ.get("LOGITBOOT_SEED")
    if env is None:
        return 0
    try:
        return int(env)
    except ValueError:
        raise DomainError("LOGITBOOT_SEED must be an integer") from None


def _fit_config(args) -> FitConfig:
    return FitConfig(max_iterations=args.max_iter, tolerance=args.tol)


def _add_fit_flags(parser) -> None:
    parser.add_argument("--tol", type=float, default=1e-8,
                        help="score tolerance for convergence (default 1e-8)")
    parser.add_argument("--max-iter", type=int, default=25,
                        help="Newton iteration budget (default 25)")


def _coefficient_map(names, values) -> dict[str, float]:
    return {name: float(v) for name, v in zip(names, values)}


def _fit_payload(fit: FitResult) -> dict:
    report = odds_report(fit) if fit.converged else None
    payload = {
        "columns": list(fit.column_names),
        "coefficients": _coefficient_map(fit.column_names, fit.coefficients),
        "standard_errors": _coefficient_map(fit.column_names, fit.standard_errors),
        "covariance": [[float(v) for v in row] for row in fit.covariance],
        "log_likelihood": float(fit.log_likelihood),
        "deviance": float(fit.deviance),
        "iterations": fit.iterations,
        "converged": fit.converged,
    }
    if report is not None:
        payload["odds"] = [
            {"name": e.name, "log_odds": e.log_odds, "odds_ratio": e.odds_ratio}
            for e in report.entries
        ]
    return payload


def _interval_json(name: str, interval) -> dict:
    odds = odds_scale(interval)
    return {
        "name": name,
        "index": interval.coefficient_index,
        "method": interval.method,
        "level": interval.level,
        "fallback": interval.fallback,
        "log_odds": {"lower": interval.lower, "upper": interval.upper},
        "odds": {"lower": odds.lower, "upper": odds.upper},
    }


def _load_dataset(path) -> EncodedDataset:
    return encode(load_csv(path))


def _cmd_fit(args):
    data = _load_dataset(args.input)
    fit = fit_mle(data, _fit_config(args))
    return _fit_payload(fit), EXIT_OK if fit.converged else EXIT_NUMERICAL


def _cmd_bootstrap(args):
    data = _load_dataset(args.input)
    config = _fit_config(args)
    result = bootstrap_fit(
        data,
        config,
        replicates=args.replicates,
        master_seed=args.seed,
        workers=args.workers,
    )
    if result.dropped > 0:
        print(
            f"warning: dropped {result.dropped} of {result.requested} "
            "bootstrap replicates",
            file=sys.stderr,
        )
    fit = result.original_fit
    if not fit.converged:
        raise NotConvergedError("full-sample fit did not converge")

    methods = ("wald", "percentile", "bca") if args.ci_method == "all" else (args.ci_method,)
    intervals = []
    if "wald" in methods:
        for interval in wald_ci(fit, args.ci_level):
            intervals.append(
                _interval_json(fit.column_names[interval.coefficient_index], interval)
            )
    if "percentile" in methods:
        for j, name in enumerate(fit.column_names):
            intervals.append(_interval_json(name, percentile_ci(result, j, args.ci_level)))
    if "bca" in methods:
        loo = jackknife_estimates(data, config)
        for j, name in enumerate(fit.column_names):
            accel = acceleration_from_jackknife(loo[:, j])
            intervals.append(
                _interval_json(
                    name, bca_ci(result, data, config, j, args.ci_level, acceleration=accel)
                )
            )

    means = result.replicates.mean(axis=0)
    payload = {
        "columns": list(fit.column_names),
        "original": {
            "coefficients": _coefficient_map(fit.column_names, fit.coefficients),
            "standard_errors": _coefficient_map(fit.column_names, fit.standard_errors),
            "iterations": fit.iterations,
            "converged": fit.converged,
        },
        "replicates": {
            "requested": result.requested,
            "converged": result.converged,
            "dropped": result.dropped,
        },
        "bootstrap_means": _coefficient_map(fit.column_names, means),
        "intervals": intervals,
    }
    return payload, EXIT_OK


def _cmd_split(args):
    data = _load_dataset(args.input)
    sizes = _parse_int_list(args.sizes, "--sizes")
    report = split_sample_fit(
        data, sizes, _fit_config(args), shuffle_seed=args.shuffle_seed
    )
    entries = []
    for entry_ in report.entries:
        if entry_.fit is None:
            entries.append({"size": entry_.size, "error": entry_.error})
        else:
            fit = entry_.fit
            entries.append(
                {
                    "size": entry_.size,
                    "error": None,
                    "coefficients": _coefficient_map(fit.column_names, fit.coefficients),
                    "standard_errors": _coefficient_map(
                        fit.column_names, fit.standard_errors
                    ),
                    "iterations": fit.iterations,
                    "converged": fit.converged,
                }
            )
    return {"columns": list(data.column_names), "splits": entries}, EXIT_OK


def _cmd_validate(args):
    data = _load_dataset(args.input)
    n = data.n_observations
    if not (0 < args.train_count < n):
        raise DomainError(
            f"--train-count must lie strictly between 0 and the row count ({n})"
        )
    train = EncodedDataset(
        data.design[: args.train_count],
        data.response[: args.train_count],
        data.column_names,
    )
    fit = fit_mle(train, _fit_config(args))
    if not fit.converged:
        raise NotConvergedError("training fit did not converge")
    report = holdout_validate(
        data, fit, np.arange(args.train_count, n), threshold=args.threshold
    )
    payload = {
        "columns": list(data.column_names),
        "train": {
            "count": args.train_count,
            "coefficients": _coefficient_map(fit.column_names, fit.coefficients),
            "iterations": fit.iterations,
            "converged": fit.converged,
        },
        "report": {
            "test_count": int(len(report.test_indices)),
            "threshold": report.threshold,
            "true_positive": report.true_positive,
            "false_positive": report.false_positive,
            "true_negative": report.true_negative,
            "false_negative": report.false_negative,
            "accuracy": report.accuracy,
        },
    }
    return payload, EXIT_OK


def _parse_float_list(text: str, flag: str) -> list[float]:
    try:
        return [float(tok) for tok in text.split(",") if tok.strip() != ""]
    except ValueError:
        raise DomainError(f"{flag} expects a comma-separated list of numbers") from None


def _parse_int_list(text: str, flag: str) -> list[int]:
    try:
        return [int(tok) for tok in text.split(",") if tok.strip() != ""]
    except ValueError:
        raise DomainError(f"{flag} expects a comma-separated list of integers") from None


def _curves_fit(args) -> FitResult:
    if (args.coefficients is None) == (args.fit_json is None):
        raise DomainError("pass exactly one of --coefficients or --fit-json")
    if args.coefficients is not None:
        values = _parse_float_list(args.coefficients, "--coefficients")
        names = ENCODED_COLUMNS
        if len(values) != len(names):
            raise DomainError(
                f"--coefficients expects {len(names)} values in order "
                f"{', '.join(names)}"
            )
    else:
        with open(args.fit_json, encoding="utf-8") as handle:
            try:
                doc = json.load(handle)
            except json.JSONDecodeError as exc:
                raise SchemaError(f"{args.fit_json}: not valid JSON ({exc})") from None
        try:
            names = tuple(doc["columns"])
            values = [float(doc["coefficients"][name]) for name in names]
        except (KeyError, TypeError):
            raise SchemaError(
                f"{args.fit_json}: missing 'columns'/'coefficients' fit fields"
            ) from None
    width = len(names)
    # Coefficients-only carrier; covariance is irrelevant to curve heights.
    return FitResult(
        coefficients=np.array(values),
        standard_errors=np.zeros(width),
        covariance=np.zeros((width, width)),
        log_likelihood=0.0,
        deviance=0.0,
        iterations=0,
        converged=True,
        column_names=names,
    )


def _cmd_curves(args):
    fit = _curves_fit(args)
    if args.age_step <= 0:
        raise DomainError("--age-step must be positive")
    if args.age_to < args.age_from:
        raise DomainError("--age-to must be at least --age-from")
    grid = np.arange(args.age_from, args.age_to + args.age_step / 2.0, args.age_step)
    wanted = [tok for tok in args.profiles.split(",") if tok.strip() != ""]
    unknown = set(wanted) - set(_PROFILE_NAMES)
    if unknown or not wanted:
        raise DomainError(
            f"--profiles accepts a comma-separated subset of {', '.join(_PROFILE_NAMES)}"
        )
    by_name = {p.name: p for p in standard_profiles(grid)}
    points = probability_curves(fit, [by_name[name] for name in wanted])

    if args.format == "csv" and args.out is None:
        raise DomainError("--format csv requires --out FILE")
    if args.out is not None:
        if args.format == "csv":
            with open(args.out, "w", newline="", encoding="utf-8") as handle:
                writer = csv.writer(handle)
                writer.writerow(["profile", "age", "probability"])
                for p in points:
                    writer.writerow([p.profile, repr(p.age), repr(p.probability)])
        else:
            with open(args.out, "w", encoding="utf-8") as handle:
                json.dump(
                    [
                        {"profile": p.profile, "age": p.age, "probability": p.probability}
                        for p in points
                    ],
                    handle,
                    indent=2,
                )
                handle.write("\n")

    payload = {
        "columns": list(fit.column_names),
        "points": [
            {"profile": p.profile, "age": p.age, "probability": p.probability}
            for p in points
        ],
    }
    if args.out is not None:
        payload["output"] = args.out
    return payload, EXIT_OK


def _cmd_simulate(args):
    values = _parse_float_list(args.coefficients, "--coefficients")
    if len(values) != 4:
        raise DomainError(
            "--coefficients expects 4 values in order "
            f"{', '.join(ENCODED_COLUMNS)}"
        )
    spec = SimulationSpec(
        coefficients=tuple(values),
        n=args.n,
        age_low=args.age_low,
        age_high=args.age_high,
        employment_rate=args.p_emp,
        female_rate=args.p_gender,
        seed=args.seed,
    )
    records = simulate(spec)
    save_csv(records, args.out)
    positives = sum(rec.hiv for rec in records)
    payload = {
        "output": args.out,
        "records": len(records),
        "positive_fraction": positives / len(records),
    }
    return payload, EXIT_OK


def _config_echo(args) -> dict:
    echo = {}
    for key in (
        "tol",
        "max_iter",
        "replicates",
        "seed",
        "workers",
        "ci_level",
        "ci_method",
        "sizes",
        "shuffle_seed",
        "train_count",
        "threshold",
        "coefficients",
        "fit_json",
        "profiles",
        "age_from",
        "age_to",
        "age_step",
        "format",
        "n",
        "age_low",
        "age_high",
        "p_emp",
        "p_gender",
        "out",
    ):
        if hasattr(args, key):
            echo[key] = getattr(args, key)
    return echo


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(
        prog="logitboot",
        description="Logistic regression with bootstrap inference.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="subcommand", required=True)

    p = sub.add_parser("fit", help="fit the model to a CSV file")
    p.add_argument("--input", required=True, help="CSV with Age, Gender/Sex, Emp, HIV")
    _add_fit_flags(p)
    p.set_defaults(handler=_cmd_fit)

    p = sub.add_parser("bootstrap", help="case-resampling bootstrap intervals")
    p.add_argument("--input", required=True)
    _add_fit_flags(p)
    p.add_argument("--replicates", type=int, default=10_000,
                   help="bootstrap replicates (default 10000)")
    p.add_argument("--seed", type=int, default=None,
                   help="master seed (default: LOGITBOOT_SEED or 0)")
    p.add_argument("--workers", type=int, default=1,
                   help="threads for replicate fitting; results do not depend on it")
    p.add_argument("--ci-level", type=float, default=0.95)
    p.add_argument("--ci-method", choices=["wald", "percentile", "bca", "all"],
                   default="percentile",
                   help="bca additionally runs n leave-one-out refits")
    p.set_defaults(handler=_cmd_bootstrap)

    p = sub.add_parser("split", help="refit on nested prefix subsets")
    p.add_argument("--input", required=True)
    _add_fit_flags(p)
    p.add_argument("--sizes", default="50,100,200,300,400",
                   help="comma-separated strictly increasing subset sizes")
    p.add_argument("--shuffle-seed", type=int, default=None,
                   help="permute rows with this seed before splitting")
    p.set_defaults(handler=_cmd_split)

    p = sub.add_parser("validate", help="train on a prefix, score the rest")
    p.add_argument("--input", required=True)
    _add_fit_flags(p)
    p.add_argument("--train-count", type=int, default=300,
                   help="rows used for training (default 300)")
    p.add_argument("--threshold", type=float, default=0.5,
                   help="classify 1 when probability >= threshold (default 0.5)")
    p.set_defaults(handler=_cmd_validate)

    p = sub.add_parser("curves", help="probability-by-age curves per profile")
    p.add_argument("--coefficients", default=None,
                   help="inline values: Intercept,Age,Emp,Gender")
    p.add_argument("--fit-json", default=None,
                   help="JSON document produced by the fit subcommand")
    p.add_argument("--profiles", default=",".join(_PROFILE_NAMES))
    p.add_argument("--age-from", type=float, default=0.0)
    p.add_argument("--age-to", type=float, default=120.0)
    p.add_argument("--age-step", type=float, default=10.0)
    p.add_argument("--format", choices=["json", "csv"], default="json",
                   help="format of the --out file")
    p.add_argument("--out", default=None, help="write curve points to this file")
    p.set_defaults(handler=_cmd_curves)

    p = sub.add_parser("simulate", help="draw a synthetic study CSV")
    p.add_argument("--coefficients", required=True,
                   help="generating values: Intercept,Age,Emp,Gender")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--age-low", type=float, default=0.0)
    p.add_argument("--age-high", type=float, default=90.0)
    p.add_argument("--p-emp", type=float, default=0.5,
                   help="P(Emp = 1), the unemployment rate")
    p.add_argument("--p-gender", type=float, default=0.5,
                   help="P(Gender = 1), the female rate")
    p.add_argument("--seed", type=int, default=None,
                   help="generator seed (default: LOGITBOOT_SEED or 0)")
    p.add_argument("--out", required=True, help="CSV destination")
    p.set_defaults(handler=_cmd_simulate)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if hasattr(args, "seed"):
            args.seed = _resolve_seed(args.seed)
        manifest = {
            "subcommand": args.subcommand,
            "version": __version__,
            "timestamp": _timestamp(),
            "config": _config_echo(args),
        }
        if hasattr(args, "input"):
            manifest["input"] = args.input
        payload, code = args.handler(args)
    except DegenerateResponseError as exc:
        return _fail(args, exc, EXIT_DEGENERATE)
    except (
        SeparationError,
        NotConvergedError,
        InsufficientReplicatesError,
        ResamplingInstabilityError,
    ) as exc:
        return _fail(args, exc, EXIT_NUMERICAL)
    except (OSError, ParseError, SchemaError) as exc:
        return _fail(args, exc, EXIT_IO)
    except (DomainError, UnknownPredictorError) as exc:
        return _fail(args, exc, EXIT_USAGE)
    document = {"manifest": manifest, **payload}
    print(json.dumps(document, indent=2))
    return code


def _fail(args, exc: Exception, code: int) -> int:
    try:
        stamp = _timestamp()
    except DomainError:
        stamp = None
    document = {
        "manifest": {
            "subcommand": getattr(args, "subcommand", None),
            "version": __version__,
            "timestamp": stamp,
            "config": _config_echo(args),
        },
        "error": {"type": type(exc).__name__, "message": str(exc)},
    }
    print(json.dumps(document, indent=2))
    return code


def entry() -> None:
    sys.exit(main())
