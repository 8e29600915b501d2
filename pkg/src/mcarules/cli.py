"""Command-line pipeline: ingest CSVs, mine rules, train, apply, benchmark.

Subcommands::

    mine       labeled CSV -> rules.json (cosine-guided miner, or --algo apriori)
    train      labeled CSV [+ rules.json] -> model.json, printed rule list
    predict    model.json + CSV -> per-row label and probability table
    evaluate   model.json + labeled CSV -> metrics table [+ metrics.csv]
    render     model.json -> if/else-if/else text
    benchmark  synthetic scaling grid -> bench.csv + summary

Exit codes: 0 success, 1 usage error, 2 data or artifact error,
3 training finished without convergence (the model file is still written).

Any flag can instead be supplied in a plain-text config file given with
``--config`` (one ``key = value`` per line, ``#`` comments); explicit
flags win over file entries.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import asdict

import numpy as np

from .apriori import AprioriConfig, apriori_mine
from .artifacts import (
    ArtifactError,
    atomic_write_text,
    csv_lines,
    read_model,
    read_rules,
    write_csv,
    write_model,
    write_rules,
)
from .benchmark import (
    BENCH_HEADER,
    BenchmarkConfig,
    bench_rows,
    run_benchmark,
    summarize,
)
from .brl import BrlConfig, render_rule_list, train
from .dataset import DatasetError, load_csv, load_feature_csv
from .mca import ScoreUndefinedError, build_indicator, fit
from .metrics import accuracy, cohen_kappa, confusion_matrix, roc_auc
from .miner import MinerConfig, mine

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_NO_CONVERGENCE = 3


class UsageError(Exception):
    """Bad flags, bad flag values, or a bad config file."""


class _Parser(argparse.ArgumentParser):
    """argparse exits with status 2 on usage errors; this CLI reserves 2
    for data errors, so usage problems are remapped to 1."""

    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def _cfg_bool(value: str) -> bool:
    low = value.lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise UsageError(f"expected a boolean, got {value!r}")


def _cfg_algo(value: str) -> str:
    if value not in ("mca", "apriori"):
        raise UsageError(f"algo must be 'mca' or 'apriori', got {value!r}")
    return value


def _cfg_bins(value: str) -> list[str]:
    return [part.strip() for part in value.split(",") if part.strip()]


def _cfg_int(value: str) -> int:
    try:
        return int(value)
    except ValueError:
        raise UsageError(f"expected an integer, got {value!r}") from None


def _cfg_float(value: str) -> float:
    try:
        return float(value)
    except ValueError:
        raise UsageError(f"expected a number, got {value!r}") from None


# Converters used when a value arrives from a config file as a string.
_CONVERTERS = {
    "label": str,
    "bins": _cfg_bins,
    "missing_as_category": _cfg_bool,
    "algo": _cfg_algo,
    "r_max": _cfg_int,
    "s_min": _cfg_float,
    "mu_min": _cfg_float,
    "top": _cfg_int,
    "components": _cfg_int,
    "unsigned": _cfg_bool,
    "time_budget": _cfg_float,
    "threads": _cfg_int,
    "out": str,
    "rules": str,
    "chains": _cfg_int,
    "lambda_": _cfg_float,
    "eta": _cfg_float,
    "alpha": _cfg_float,
    "max_iters": _cfg_int,
    "check_interval": _cfg_int,
    "rhat": _cfg_float,
    "max_len": _cfg_int,
    "seed": _cfg_int,
    "grid": str,
    "n": _cfg_int,
    "categories": _cfg_int,
    "reps": _cfg_int,
    "signal_fraction": _cfg_float,
    "signal_strength": _cfg_float,
}

_MINER_DEFAULTS = {
    "r_max": 2,
    "s_min": 0.3,
    "mu_min": 0.5,
    "top": 70,
    "components": None,
    "unsigned": False,
}

_INGEST_DEFAULTS = {
    "bins": [],
    "missing_as_category": False,
}

_DEFAULTS = {
    "mine": {
        **_INGEST_DEFAULTS,
        **_MINER_DEFAULTS,
        "algo": "mca",
        "time_budget": 300.0,
        "out": "rules.json",
    },
    "train": {
        **_INGEST_DEFAULTS,
        **_MINER_DEFAULTS,
        "chains": 4,
        "lambda_": 3.0,
        "eta": 1.0,
        "alpha": 1.0,
        "max_iters": 50_000,
        "check_interval": 1_000,
        "rhat": 1.05,
        "seed": 0,
        "out": "model.json",
    },
    "predict": {**_INGEST_DEFAULTS},
    "evaluate": {**_INGEST_DEFAULTS},
    "render": {},
    "benchmark": {
        "grid": "10,50,100",
        "n": 500,
        "categories": 3,
        "reps": 1,
        **_MINER_DEFAULTS,
        "signal_fraction": 0.1,
        "signal_strength": 0.8,
        "time_budget": 300.0,
        "seed": 0,
        "out": "bench.csv",
    },
}


def _add_ingestion_flags(sub, with_label=True):
    if with_label:
        sub.add_argument("--label", help="name of the label column")
    sub.add_argument(
        "--bins",
        action="append",
        metavar="COL:N",
        help="quantize numeric column COL into N (2 or 3) quantile bins; repeatable",
    )
    sub.add_argument(
        "--missing-as-category",
        action="store_true",
        default=None,
        help="keep rows with empty cells, treating '' as a category",
    )


def _add_miner_flags(sub):
    sub.add_argument("--r-max", type=int, help="maximum literals per rule")
    sub.add_argument("--s-min", type=float, help="minimum per-label support")
    sub.add_argument("--mu-min", type=float, help="minimum mean cosine score")
    sub.add_argument("--top", type=int, help="rules kept per label")
    sub.add_argument(
        "--components",
        type=int,
        help="truncate the correspondence analysis to this many leading "
        "components before scoring (default: keep all)",
    )
    sub.add_argument(
        "--unsigned",
        action="store_true",
        default=None,
        help="score literals by cosine magnitude instead of signed value",
    )


def build_parser():
    parser = _Parser(prog="mcarules", description=__doc__.splitlines()[0])
    subparsers = parser.add_subparsers(dest="subcommand", parser_class=_Parser)

    mine_p = subparsers.add_parser("mine", help="mine candidate rules from a CSV")
    mine_p.add_argument("csv", help="labeled CSV file")
    _add_ingestion_flags(mine_p)
    _add_miner_flags(mine_p)
    mine_p.add_argument("--algo", choices=("mca", "apriori"), help="mining algorithm")
    mine_p.add_argument(
        "--time-budget", type=float, help="wall-clock budget for the apriori baseline"
    )
    mine_p.add_argument("--threads", type=int, help="worker count (default: cores)")
    mine_p.add_argument("--out", help="output rules file (default rules.json)")
    mine_p.add_argument("--config", help="key=value config file; flags win")

    train_p = subparsers.add_parser("train", help="fit a rule list on a CSV")
    train_p.add_argument("csv", help="labeled CSV file")
    _add_ingestion_flags(train_p)
    _add_miner_flags(train_p)
    train_p.add_argument("--rules", help="pre-mined rules file (skips mining)")
    train_p.add_argument("--chains", type=int, help="number of MCMC chains")
    train_p.add_argument(
        "--lambda", dest="lambda_", type=float, help="prior expected list length"
    )
    train_p.add_argument("--eta", type=float, help="prior expected rule cardinality")
    train_p.add_argument("--alpha", type=float, help="Dirichlet pseudo-count")
    train_p.add_argument("--max-iters", type=int, help="iteration cap per chain")
    train_p.add_argument(
        "--check-interval", type=int, help="iterations between convergence checks"
    )
    train_p.add_argument("--rhat", type=float, help="Gelman-Rubin stop threshold")
    train_p.add_argument("--max-len", type=int, help="cap on rule-list length")
    train_p.add_argument("--seed", type=int, help="base RNG seed")
    train_p.add_argument("--threads", type=int, help="worker count (default: cores)")
    train_p.add_argument("--out", help="output model file (default model.json)")
    train_p.add_argument("--config", help="key=value config file; flags win")

    predict_p = subparsers.add_parser("predict", help="apply a model to a CSV")
    predict_p.add_argument("model", help="model file from train")
    predict_p.add_argument("csv", help="CSV file; a label column is ignored")
    _add_ingestion_flags(predict_p)
    predict_p.add_argument("--out", help="write predictions CSV here instead of stdout")
    predict_p.add_argument("--config", help="key=value config file; flags win")

    evaluate_p = subparsers.add_parser(
        "evaluate", help="score a model against a labeled CSV"
    )
    evaluate_p.add_argument("model", help="model file from train")
    evaluate_p.add_argument("csv", help="labeled CSV file")
    _add_ingestion_flags(evaluate_p)
    evaluate_p.add_argument("--out", help="also write metrics CSV here")
    evaluate_p.add_argument("--config", help="key=value config file; flags win")

    render_p = subparsers.add_parser("render", help="print a fitted rule list")
    render_p.add_argument("model", help="model file from train")
    render_p.add_argument("--out", help="also write the text here")
    render_p.add_argument("--config", help="key=value config file; flags win")

    bench_p = subparsers.add_parser(
        "benchmark", help="time both miners on synthetic data"
    )
    bench_p.add_argument("--grid", help="attribute counts, e.g. 10,50,100")
    bench_p.add_argument("--n", type=int, help="rows per synthetic dataset")
    bench_p.add_argument("--categories", type=int, help="categories per attribute")
    bench_p.add_argument("--reps", type=int, help="repetitions per grid point")
    _add_miner_flags(bench_p)
    bench_p.add_argument(
        "--signal-fraction", type=float, help="fraction of label-linked attributes"
    )
    bench_p.add_argument(
        "--signal-strength", type=float, help="strength of the planted correlation"
    )
    bench_p.add_argument("--time-budget", type=float, help="per-run budget, seconds")
    bench_p.add_argument("--seed", type=int, help="base RNG seed")
    bench_p.add_argument("--threads", type=int, help="worker count (default: cores)")
    bench_p.add_argument("--out", help="output CSV (default bench.csv)")
    bench_p.add_argument("--config", help="key=value config file; flags win")

    allowed = {
        name: {
            action.dest
            for action in sub._actions
            if action.option_strings and action.dest not in ("help", "config")
        }
        for name, sub in subparsers.choices.items()
    }
    return parser, allowed


def _merge_config_file(args, allowed: set) -> None:
    if getattr(args, "config", None) is None:
        return
    try:
        with open(args.config) as fh:
            lines = fh.readlines()
    except OSError as exc:
        raise UsageError(f"cannot read config file: {exc}") from None
    for lineno, line in enumerate(lines, start=1):
        text = line.split("#", 1)[0].strip()
        if not text:
            continue
        if "=" not in text:
            raise UsageError(
                f"{args.config}:{lineno}: expected 'key = value', got {text!r}"
            )
        key, value = (part.strip() for part in text.split("=", 1))
        key = key.replace("-", "_")
        if key == "lambda":
            key = "lambda_"
        if key not in allowed:
            raise UsageError(
                f"{args.config}:{lineno}: unknown key {key!r} for this subcommand"
            )
        if getattr(args, key) is None:
            setattr(args, key, _CONVERTERS[key](value))


def _fill_defaults(args, defaults: dict) -> None:
    for key, value in defaults.items():
        if getattr(args, key, None) is None:
            setattr(args, key, value)


def _parse_bins(entries) -> dict[str, int]:
    bins: dict[str, int] = {}
    for entry in entries or []:
        name, sep, count = entry.rpartition(":")
        if not sep or not name:
            raise UsageError(f"--bins expects COL:N, got {entry!r}")
        value = _cfg_int(count)
        if value not in (2, 3):
            raise UsageError(f"--bins {entry!r}: bin count must be 2 or 3")
        if name in bins:
            raise UsageError(f"--bins names column {name!r} twice")
        bins[name] = value
    return bins


def _load_labeled(args):
    if args.label is None:
        raise UsageError("--label is required")
    return load_csv(
        args.csv,
        args.label,
        numeric_bins=_parse_bins(args.bins),
        missing_as_category=args.missing_as_category,
    )


def _build_miner_config(args) -> MinerConfig:
    try:
        return MinerConfig(
            r_max=args.r_max,
            s_min=args.s_min,
            mu_min=args.mu_min,
            M=args.top,
            signed=not args.unsigned,
        )
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _fit_scores(dataset, args):
    if args.components is not None and args.components < 1:
        raise UsageError("--components must be a positive integer")
    return fit(build_indicator(dataset), components=args.components)


def _build_brl_config(args) -> BrlConfig:
    try:
        return BrlConfig(
            lambda_=args.lambda_,
            eta_card=args.eta,
            alpha=args.alpha,
            n_chains=args.chains,
            max_iters=args.max_iters,
            check_interval=args.check_interval,
            rhat_threshold=args.rhat,
            seed=args.seed,
            max_list_length=args.max_len,
        )
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def cmd_mine(args) -> int:
    dataset = _load_labeled(args)
    if args.algo == "mca":
        config = _build_miner_config(args)
        model = _fit_scores(dataset, args)
        result = mine(dataset, model, config, n_workers=args.threads)
        record = {"algo": "mca", "components": args.components, **asdict(config)}
    else:
        try:
            budget = AprioriConfig(time_budget=args.time_budget)
        except ValueError as exc:
            raise UsageError(str(exc)) from None
        result = apriori_mine(
            dataset, s_min=args.s_min, r_max=args.r_max, config=budget
        )
        record = {
            "algo": "apriori",
            "r_max": args.r_max,
            "s_min": args.s_min,
            "time_budget": args.time_budget,
        }
    write_rules(args.out, result, dataset, record)
    print(f"mined {len(result)} rules ({result.status}) -> {args.out}")
    return EXIT_OK


def cmd_train(args) -> int:
    if args.rules is not None:
        overridden = args.explicit_keys & set(_MINER_DEFAULTS)
        if overridden:
            raise UsageError(
                "--rules and miner flags are mutually exclusive "
                f"(got {', '.join(sorted(overridden))})"
            )
    dataset = _load_labeled(args)
    brl_config = _build_brl_config(args)
    if args.rules is not None:
        mined = read_rules(args.rules, dataset)
    else:
        miner_config = _build_miner_config(args)
        model = _fit_scores(dataset, args)
        mined = mine(dataset, model, miner_config, n_workers=args.threads)
    rules = tuple(sr.rule for sr in mined.rules)
    if not rules:
        raise DatasetError(
            "no rules available for training; lower --s-min or --mu-min"
        )
    rule_list, diagnostics = train(dataset, rules, brl_config, n_workers=args.threads)
    write_model(args.out, rule_list, diagnostics, dataset, brl_config)
    print(render_rule_list(rule_list, dataset))
    rhat = diagnostics.rhat
    if brl_config.n_chains < 2:
        print(f"single chain: ran {diagnostics.iterations} iterations -> {args.out}")
    elif diagnostics.converged:
        print(
            f"converged after {diagnostics.iterations} iterations "
            f"(R-hat = {rhat:.4f}) -> {args.out}"
        )
    else:
        print(
            f"warning: R-hat = {rhat:.4f} > {brl_config.rhat_threshold} after "
            f"{diagnostics.iterations} iterations; model written to {args.out}",
            file=sys.stderr,
        )
        return EXIT_NO_CONVERGENCE
    return EXIT_OK


def cmd_predict(args) -> int:
    artifact = read_model(args.model)
    ignore = {artifact.label_name}
    if args.label:
        ignore.add(args.label)
    table = load_feature_csv(
        args.csv,
        numeric_bins=_parse_bins(args.bins),
        missing_as_category=args.missing_as_category,
        ignore_columns=tuple(sorted(ignore)),
    )
    probs = artifact.predict_proba(table)
    predictions = np.argmax(probs, axis=1)
    header = ["prediction"] + [f"p_{name}" for name in artifact.label_names]
    rows = [
        [artifact.label_names[k]] + [float(p) for p in row]
        for k, row in zip(predictions, probs)
    ]
    if args.out:
        write_csv(args.out, header, rows)
        print(f"wrote {len(rows)} predictions -> {args.out}")
    else:
        for line in csv_lines(header, rows):
            print(line)
    return EXIT_OK


def _confusion_text(counts: np.ndarray, names) -> str:
    width = max(max(len(n) for n in names), max(len(str(c)) for c in counts.ravel()))
    head = " ".join(f"{n:>{width}}" for n in names)
    lines = [f"{'':>{width}} {head}"]
    for i, name in enumerate(names):
        cells = " ".join(f"{int(c):>{width}}" for c in counts[i])
        lines.append(f"{name:>{width}} {cells}")
    return "\n".join(lines)


def cmd_evaluate(args) -> int:
    artifact = read_model(args.model)
    label = args.label or artifact.label_name
    dataset = load_csv(
        args.csv,
        label,
        numeric_bins=_parse_bins(args.bins),
        missing_as_category=args.missing_as_category,
    )
    mapping = []
    for name in dataset.label_names:
        if name not in artifact.label_names:
            raise DatasetError(
                f"label {name!r} in {args.csv} is unknown to the model "
                f"(knows {list(artifact.label_names)})"
            )
        mapping.append(artifact.label_names.index(name))
    y_true = np.asarray(mapping, dtype=np.int64)[dataset.Y]
    probs = artifact.predict_proba(dataset)
    y_pred = np.argmax(probs, axis=1)
    counts = confusion_matrix(y_true, y_pred, n_labels=artifact.n_labels)

    records: list[tuple[str, object]] = [
        ("n", dataset.n),
        ("accuracy", accuracy(y_true, y_pred)),
    ]
    if artifact.n_labels == 2 and np.unique(y_true).size == 2:
        records.append(("roc_auc", roc_auc(y_true, probs[:, 1])))
    records.append(("kappa", cohen_kappa(counts)))

    width = max(len(key) for key, _ in records)
    for key, value in records:
        shown = f"{value:.4f}" if isinstance(value, float) else str(value)
        print(f"{key:<{width}}  {shown}")
    print()
    print("confusion matrix (rows = true, columns = predicted):")
    print(_confusion_text(counts, artifact.label_names))

    if args.out:
        for i, tname in enumerate(artifact.label_names):
            for j, pname in enumerate(artifact.label_names):
                records.append((f"confusion_{tname}_{pname}", int(counts[i, j])))
        write_csv(args.out, ["metric", "value"], records)
        print(f"\nwrote metrics -> {args.out}")
    return EXIT_OK


def cmd_render(args) -> int:
    artifact = read_model(args.model)
    text = artifact.render()
    print(text)
    if args.out:
        atomic_write_text(args.out, text + "\n")
        print(f"wrote rule list -> {args.out}")
    return EXIT_OK


def cmd_benchmark(args) -> int:
    try:
        grid = tuple(int(part) for part in str(args.grid).split(",") if part.strip())
    except ValueError:
        raise UsageError(f"--grid expects integers like 10,50,100, got {args.grid!r}")
    try:
        config = BenchmarkConfig(
            attribute_grid=grid,
            n=args.n,
            n_categories=args.categories,
            repetitions=args.reps,
            r_max=args.r_max,
            s_min=args.s_min,
            mu_min=args.mu_min,
            M=args.top,
            components=args.components,
            signal_fraction=args.signal_fraction,
            signal_strength=args.signal_strength,
            seed=args.seed,
            time_budget=args.time_budget,
        )
    except ValueError as exc:
        raise UsageError(str(exc)) from None

    def progress(row):
        print(
            f"[{row.attributes} attrs] {row.miner}: {row.seconds:.3f}s "
            f"({row.status}, {row.n_rules} rules)",
            file=sys.stderr,
        )

    rows = run_benchmark(config, n_workers=args.threads, progress=progress)
    write_csv(args.out, BENCH_HEADER, bench_rows(rows))
    print(summarize(rows))
    print(f"wrote runtime table -> {args.out}")
    return EXIT_OK


_HANDLERS = {
    "mine": cmd_mine,
    "train": cmd_train,
    "predict": cmd_predict,
    "evaluate": cmd_evaluate,
    "render": cmd_render,
    "benchmark": cmd_benchmark,
}


def main(argv=None) -> int:
    parser, allowed = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    if args.subcommand is None:
        parser.print_usage(sys.stderr)
        print("error: a subcommand is required", file=sys.stderr)
        return EXIT_USAGE
    try:
        _merge_config_file(args, allowed[args.subcommand])
        defaults = _DEFAULTS[args.subcommand]
        args.explicit_keys = {
            key for key in defaults if getattr(args, key, None) is not None
        }
        _fill_defaults(args, defaults)
        return _HANDLERS[args.subcommand](args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (DatasetError, ArtifactError, ScoreUndefinedError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
