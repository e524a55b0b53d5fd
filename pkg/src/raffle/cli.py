"""Command line interface.

Subcommands: fit, predict, cv, grid, simulate, categorize.  Exit code 0 on
success, 1 for user errors (bad paths, malformed input, invalid options),
2 for unexpected internal failures.  Worker count comes from --workers or
the RAFFLE_WORKERS environment variable (default 1).
"""

from __future__ import annotations

import argparse
import json
import os
import sys

import pandas as pd

from . import datasets, evaluation
from .baselines import cart_forest_params, cart_tree_params, fit_cart_forest, fit_cart_tree
from .datasets import IngestError, encode_like, ingest
from .forest import draffle_params, fit_forest, forest_from_dict, forest_to_dict, predict_forest
from .node_models import ConfigurationError
from .tree import build_tree, predict_tree, tree_from_dict, tree_to_dict

MODEL_FORMAT = "raffle-model-v1"

PRESETS = ("draffle", "pilot", "cart", "cart-forest")


def _workers(value) -> int:
    if value is not None:
        return int(value)
    return int(os.environ.get("RAFFLE_WORKERS", "1"))


def _load_dataset(args):
    dataset, report = ingest(args.data, args.target, drop_dates=args.drop_dates)
    for name, reason in report.dropped_columns:
        print(f"note: dropped column {name!r} ({reason})", file=sys.stderr)
    for item in report.imputed_columns:
        print(
            f"note: imputed {item['count']} values in {item['column']!r} "
            f"with {item['strategy']} {item['value']!r}",
            file=sys.stderr,
        )
    if report.dropped_rows:
        print(f"note: dropped {report.dropped_rows} rows with missing target", file=sys.stderr)
    return dataset


def cmd_fit(args) -> int:
    dataset = _load_dataset(args)
    workers = _workers(args.workers)
    if args.preset == "pilot":
        model = build_tree(dataset.X, dataset.y, dataset.col_kinds)
        doc = {"kind": "tree", "model": tree_to_dict(model)}
    elif args.preset == "cart":
        model = fit_cart_tree(dataset.X, dataset.y, dataset.col_kinds)
        doc = {"kind": "tree", "model": tree_to_dict(model)}
    elif args.preset == "cart-forest":
        params = cart_forest_params(n_estimators=args.trees, seed=args.seed,
                                    tree=cart_tree_params())
        model = fit_cart_forest(dataset.X, dataset.y, dataset.col_kinds, params, n_jobs=workers)
        doc = {"kind": "forest", "model": forest_to_dict(model)}
    else:
        params = draffle_params(n_estimators=args.trees, seed=args.seed)
        model = fit_forest(dataset.X, dataset.y, dataset.col_kinds, params, n_jobs=workers)
        doc = {"kind": "forest", "model": forest_to_dict(model)}
    envelope = {
        "format": MODEL_FORMAT,
        "preset": args.preset,
        "schema": dataset.schema(),
        **doc,
    }
    with open(args.out, "w") as fh:
        json.dump(envelope, fh, sort_keys=True)
    print(f"saved {args.preset} model for target {dataset.target_name!r} to {args.out}")
    return 0


def cmd_predict(args) -> int:
    with open(args.model) as fh:
        envelope = json.load(fh)
    if envelope.get("format") != MODEL_FORMAT:
        raise IngestError("bad-model", f"{args.model} is not a saved model file")
    df = pd.read_csv(args.data)
    X = encode_like(envelope["schema"], df)
    if envelope["kind"] == "forest":
        preds = predict_forest(forest_from_dict(envelope["model"]), X)
    else:
        preds = predict_tree(tree_from_dict(envelope["model"]), X)
    target = envelope["schema"]["target_name"]
    evaluation.write_csv(args.out, [f"predicted_{target}"], [[float(v)] for v in preds])
    print(f"wrote {len(preds)} predictions to {args.out}")
    return 0


def _collect_datasets(args):
    if args.suite:
        return datasets.benchmark_suite(seed=args.seed)
    if not args.data:
        raise IngestError("no-data", "provide --data CSV paths or --suite")
    if not args.target:
        raise IngestError("missing-target", "--target is required with --data")
    out = []
    for path in args.data:
        ds, _ = ingest(path, args.target, drop_dates=args.drop_dates)
        out.append((os.path.splitext(os.path.basename(path))[0], ds))
    return out


def cmd_cv(args) -> int:
    pairs = _collect_datasets(args)
    methods = [m.strip() for m in args.methods.split(",") if m.strip()]
    report = evaluation.run_cv(pairs, methods, k=args.folds, seed=args.seed,
                               n_jobs=_workers(args.workers))
    if args.out_json:
        evaluation.write_json(args.out_json, report.as_dict())
    if args.out_csv:
        rows = [
            [d, m, report.raw[d][m], report.relative[d][m]]
            for d in report.dataset_names
            for m in report.method_names
        ]
        evaluation.write_csv(args.out_csv, ["dataset", "method", "r2", "relative_r2"], rows)
    summary = report.summary()
    for m in report.method_names:
        print(f"{m}: mean relative R^2 = {summary[m]:.4f}")
    return 0


def cmd_grid(args) -> int:
    dataset = _load_dataset(args)
    result = evaluation.grid_search(dataset, args.method, k=args.folds, seed=args.seed,
                                    n_jobs=_workers(args.workers))
    if args.out:
        evaluation.write_json(args.out, result.as_dict())
    print(f"best {args.method} params: {result.best_params} (mean R^2 {result.best_score:.4f})")
    return 0


def cmd_simulate(args) -> int:
    if args.preset == "paper":
        cfg = evaluation.paper_sim_config(seed=args.seed)
    else:
        cfg = evaluation.desk_sim_config(seed=args.seed, repetitions=args.reps)
    methods = [m.strip() for m in args.methods.split(",") if m.strip()]
    result = evaluation.simulate_linear_convergence(cfg, methods, n_jobs=_workers(args.workers))
    if args.out:
        evaluation.sim_result_to_csv(result, args.out)
    for (m, sd, thr), size in sorted(result.crossings.items(), key=str):
        where = "never" if size is None else f"n={size}"
        print(f"{m} (noise sd {sd}) reaches {thr:.0%} of the least-squares R^2 at {where}")
    return 0


def cmd_categorize(args) -> int:
    with open(args.scores) as fh:
        doc = json.load(fh)
    raw = doc.get("raw", doc)
    labels = evaluation.categorize_linearity(raw)
    if args.out:
        evaluation.write_json(args.out, labels)
    for ds in sorted(labels):
        print(f"{ds}: {labels[ds]}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="raffle",
                                     description="Piecewise-linear model-tree forests")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, target_required=True):
        p.add_argument("--data", required=True, help="input CSV path")
        p.add_argument("--target", required=target_required, help="target column name")
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--drop-dates", action="store_true", help="drop date-typed columns")
        p.add_argument("--workers", type=int, default=None,
                       help="parallel workers (default: RAFFLE_WORKERS or 1)")

    p = sub.add_parser("fit", help="fit a model and save it to JSON")
    common(p)
    p.add_argument("--preset", choices=PRESETS, default="draffle")
    p.add_argument("--trees", type=int, default=100, help="ensemble size for forest presets")
    p.add_argument("--out", required=True, help="output model path")
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("predict", help="predict with a saved model")
    p.add_argument("--model", required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--out", required=True, help="output CSV of predictions")
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("cv", help="cross-validated comparison of methods")
    p.add_argument("--data", action="append", help="input CSV path (repeatable)")
    p.add_argument("--suite", action="store_true", help="use the bundled synthetic suite")
    p.add_argument("--target", help="target column name (for --data)")
    p.add_argument("--methods", default="ols,ridge,cart,cart_forest,raffle")
    p.add_argument("--folds", type=int, default=5)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--drop-dates", action="store_true")
    p.add_argument("--workers", type=int, default=None)
    p.add_argument("--out-json")
    p.add_argument("--out-csv")
    p.set_defaults(func=cmd_cv)

    p = sub.add_parser("grid", help="hyperparameter grid search for one method")
    common(p)
    p.add_argument("--method", choices=sorted(evaluation.GRIDS), default="raffle")
    p.add_argument("--folds", type=int, default=5)
    p.add_argument("--out")
    p.set_defaults(func=cmd_grid)

    p = sub.add_parser("simulate", help="linear-convergence simulation study")
    p.add_argument("--preset", choices=("desk", "paper"), default="desk")
    p.add_argument("--methods", default="ols,cart_forest,raffle")
    p.add_argument("--reps", type=int, default=5)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--workers", type=int, default=None)
    p.add_argument("--out", help="output CSV of learning curves")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("categorize", help="label datasets linear/nonlinear from cv scores")
    p.add_argument("--scores", required=True, help="JSON produced by `raffle cv --out-json`")
    p.add_argument("--out")
    p.set_defaults(func=cmd_categorize)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits 2 on bad usage; report it as a user error
        return 0 if exc.code in (0, None) else 1
    try:
        return args.func(args)
    except (IngestError, ConfigurationError, FileNotFoundError, ValueError,
            json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:  # pragma: no cover - defensive
        print(f"internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
