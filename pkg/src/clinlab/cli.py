"""Command-line driver for the full workflow: ingest → describe → cohort →
analyze → export → serve.  Each subcommand is a thin shell over library
calls, so a CLI run and the equivalent library calls produce identical
results for identical inputs and seeds; every randomized subcommand prints
the seed it used."""

from __future__ import annotations

import argparse
import json
import sys

from . import configio
from .bayesnet import (
    HillClimbConfig,
    causal_paths,
    edge_list_text,
    fit_parameters,
    hill_climb,
    to_dot,
)
from .cohort import apply_criteria, missingness_comparison
from .dataset import (
    Dataset,
    clean_sentinels,
    load_csv,
    validate_dataset,
    write_csv,
)
from .encoding import encode, fit_encoder
from .errors import ClinlabError
from .registry import export_bayesnet, export_svm, load_artifact, personalized_predict, save_artifact
from .schema import Schema
from .stats import CategoricalSummary, describe, frequency_table
from .svm import (
    DEFAULT_COSTS,
    DEFAULT_GAMMAS,
    SmoConfig,
    grid_search,
    refit_best,
)
from .synth import default_config, generate, generator_schema


def _comma_list(text: str) -> list[str]:
    items = [t.strip() for t in text.split(",") if t.strip()]
    if not items:
        raise argparse.ArgumentTypeError("expected a comma-separated list")
    return items


def _comma_floats(text: str) -> tuple[float, ...]:
    try:
        return tuple(float(t) for t in _comma_list(text))
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _edge_pairs(text: str) -> tuple[tuple[str, str], ...]:
    pairs = []
    for item in _comma_list(text):
        if ":" not in item:
            raise argparse.ArgumentTypeError(f"edge {item!r} must look like src:dst")
        src, _, dst = item.partition(":")
        pairs.append((src.strip(), dst.strip()))
    return tuple(pairs)


def _load(csv_path, schema_path, clean: bool = True) -> Dataset:
    schema = configio.load_schema(schema_path)
    ds = load_csv(csv_path, schema)
    if clean:
        ds, _ = clean_sentinels(ds)
    return ds


def _print_json(obj: dict) -> None:
    print(json.dumps(obj, indent=2))


# --- subcommand bodies -----------------------------------------------------

def _cmd_ingest(args) -> int:
    schema = configio.load_schema(args.schema)
    ds = load_csv(args.csv, schema)
    ds, report = clean_sentinels(ds)
    validate_dataset(ds)
    if args.out:
        write_csv(ds, args.out)
    if args.report:
        configio.write_json(report.to_dict(), args.report)
    cells = report.total_cells
    print(f"{args.csv}: {ds.n_rows} rows, {len(ds.schema.names)} columns, "
          f"{cells} sentinel cell{'s' if cells != 1 else ''} cleared")
    return 0


def _cmd_describe(args) -> int:
    ds = _load(args.csv, args.schema)
    names = args.columns or list(ds.schema.names)
    for name in names:
        summary = describe(ds, name)
        print(f"== {name} ==")
        if isinstance(summary, CategoricalSummary):
            print(frequency_table(summary))
        else:
            print(
                f"  n {summary.n}  mean {summary.mean:.4g}  sd {summary.sd:.4g}  "
                f"median {summary.median:.4g} [{summary.q1:.4g}; {summary.q3:.4g}]  "
                f"range [{summary.min:.4g}, {summary.max:.4g}]"
            )
        print()
    return 0


def _cmd_cohort(args) -> int:
    ds = _load(args.csv, args.schema)
    criteria = configio.load_criteria(args.criteria)
    cohort, flow = apply_criteria(ds, criteria, args.analysis_vars)
    print(flow.to_text())
    if args.out:
        write_csv(cohort, args.out)
        print(f"cohort written to {args.out}")
    if args.flow:
        configio.write_json(flow.to_dict(), args.flow)
    if args.missingness:
        report = missingness_comparison(ds, args.analysis_vars)
        configio.write_json(report.to_dict(), args.missingness)
    return 0


def _cmd_bn(args) -> int:
    ds = _load(args.csv, args.schema).select(args.variables)
    config = HillClimbConfig(
        max_parents=args.max_parents,
        restarts=args.restarts,
        seed=args.seed,
        forbidden=args.forbidden,
        required=args.required,
    )
    print(f"seed {config.seed}")
    scored = hill_climb(ds, config)
    print(f"score {scored.total!r}")
    print(edge_list_text(scored.dag) or "(no edges)")
    if args.target:
        paths = causal_paths(scored.dag, args.target)
        print(f"direct causes of {args.target}: {', '.join(paths.direct) or '(none)'}")
        print(f"indirect causes of {args.target}: {', '.join(paths.indirect) or '(none)'}")
    if args.dot:
        with open(args.dot, "w", encoding="utf-8") as fh:
            fh.write(to_dot(scored.dag) + "\n")
    if args.artifact:
        if not args.target:
            raise ClinlabError("--artifact needs --target (the variable the model predicts)")
        bn = fit_parameters(scored.dag, ds, alpha=args.alpha)
        artifact = export_bayesnet(
            bn,
            args.target,
            ds.schema,
            training_config={"hill_climb": config.to_dict(), "alpha": args.alpha},
            training_metrics={"score": scored.total},
        )
        save_artifact(artifact, args.artifact)
        print(f"artifact {artifact.artifact_id} written to {args.artifact}")
    return 0


def _cmd_svm_grid(args) -> int:
    import numpy as np

    ds = _load(args.csv, args.schema)
    spec = ds.schema.column(args.label)
    if not spec.is_categorical or len(spec.categories) != 2:
        raise ClinlabError(f"label {args.label!r} must be categorical with exactly 2 categories")
    positive = args.positive if args.positive is not None else spec.categories[1]
    if positive not in spec.categories:
        raise ClinlabError(f"positive label {positive!r} is not a category of {args.label!r}")
    negative = next(c for c in spec.categories if c != positive)

    config = SmoConfig(seed=args.seed, class_weights=args.weights)
    print(f"seed {args.seed}")
    enc = fit_encoder(ds, args.features)
    x = encode(enc, ds)
    codes = ds.column(args.label).values.astype(np.int64)
    y = np.where(codes == spec.categories.index(positive), 1, -1).astype(np.int64)
    result = grid_search(x, y, args.gammas, args.costs, k=args.folds, seed=args.seed, config=config)
    best = result.best
    print(
        f"best cell: gamma {best.gamma!r} cost {best.cost!r} "
        f"sensitivity {best.sensitivity!r} specificity {best.specificity!r}"
    )
    if args.grid_out:
        with open(args.grid_out, "w", encoding="utf-8") as fh:
            fh.write(result.to_csv())
        print(f"grid written to {args.grid_out}")
    if args.artifact:
        model = refit_best(
            x, y, result, config=config,
            labels=(negative, positive),
            encoder_fingerprint=enc.fingerprint(),
        )
        artifact = export_svm(
            model,
            enc,
            training_config={
                "gammas": list(args.gammas),
                "costs": list(args.costs),
                "folds": args.folds,
                "seed": args.seed,
                "label_var": args.label,
                "positive_label": positive,
            },
            training_metrics=best.to_dict(),
        )
        save_artifact(artifact, args.artifact)
        print(f"artifact {artifact.artifact_id} written to {args.artifact}")
    return 0


def _cmd_predict(args) -> int:
    artifact = load_artifact(args.artifact)
    record = configio.load_record(args.record)
    _print_json(personalized_predict(artifact, record))
    return 0


def _cmd_synth(args) -> int:
    if args.config:
        config = configio.load_generator_config(args.config)
    else:
        config = default_config(n_total=args.n, seed=args.seed)
    print(f"seed {config.seed}")
    ds = generate(config)
    write_csv(ds, args.out)
    print(f"{ds.n_rows} rows written to {args.out}")
    if args.schema_out:
        configio.write_json(ds.schema.to_dict(), args.schema_out)
        print(f"schema written to {args.schema_out}")
    return 0


def _cmd_serve(args) -> int:
    from .service import ServeConfig, serve

    serve(ServeConfig(
        port=args.port,
        host=args.host,
        artifact_dir=args.artifact_dir,
        workers=args.workers,
    ))
    return 0


# --- parser ------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="clinlab",
        description="Clinical tabular analytics workbench: cohorts, causal structure, classifiers.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="validate a CSV against a schema and clear sentinel codes")
    p.add_argument("--csv", required=True)
    p.add_argument("--schema", required=True, help="JSON schema config")
    p.add_argument("--out", help="write the cleaned CSV here")
    p.add_argument("--report", help="write the sentinel-cleaning report (JSON) here")
    p.set_defaults(func=_cmd_ingest)

    p = sub.add_parser("describe", help="per-column frequency tables and summaries")
    p.add_argument("--csv", required=True)
    p.add_argument("--schema", required=True)
    p.add_argument("--columns", type=_comma_list, help="subset of columns (comma-separated)")
    p.set_defaults(func=_cmd_describe)

    p = sub.add_parser("cohort", help="apply selection criteria and print the flowchart")
    p.add_argument("--csv", required=True)
    p.add_argument("--schema", required=True)
    p.add_argument("--criteria", required=True, help="JSON criteria config")
    p.add_argument("--analysis-vars", required=True, type=_comma_list)
    p.add_argument("--out", help="write the selected cohort CSV here")
    p.add_argument("--flow", help="write the flowchart (JSON) here")
    p.add_argument("--missingness", help="write the missing-data comparison (JSON) here")
    p.set_defaults(func=_cmd_cohort)

    p = sub.add_parser("bn", help="learn a network structure and export a fitted model")
    p.add_argument("--csv", required=True)
    p.add_argument("--schema", required=True)
    p.add_argument("--variables", required=True, type=_comma_list)
    p.add_argument("--max-parents", type=int, default=5)
    p.add_argument("--restarts", type=int, default=5)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--forbidden", type=_edge_pairs, default=(), help="src:dst,src:dst,...")
    p.add_argument("--required", type=_edge_pairs, default=(), help="src:dst,src:dst,...")
    p.add_argument("--alpha", type=float, default=1.0, help="CPT smoothing pseudo-count")
    p.add_argument("--target", help="variable whose causes to report / to predict")
    p.add_argument("--dot", help="write the graph in DOT syntax here")
    p.add_argument("--artifact", help="write the fitted model artifact here (needs --target)")
    p.set_defaults(func=_cmd_bn)

    p = sub.add_parser("svm-grid", help="cross-validated RBF-SVM parameter screen")
    p.add_argument("--csv", required=True)
    p.add_argument("--schema", required=True)
    p.add_argument("--features", required=True, type=_comma_list)
    p.add_argument("--label", required=True, help="binary categorical outcome column")
    p.add_argument("--positive", help="category treated as positive (default: second category)")
    p.add_argument("--gammas", type=_comma_floats, default=DEFAULT_GAMMAS)
    p.add_argument("--costs", type=_comma_floats, default=DEFAULT_COSTS)
    p.add_argument("--folds", type=int, default=10)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--weights", type=_comma_floats, help="negative,positive class weights")
    p.add_argument("--grid-out", help="write the per-cell grid CSV here")
    p.add_argument("--artifact", help="refit the best cell on all rows and write the artifact")
    p.set_defaults(func=_cmd_svm_grid)

    p = sub.add_parser("predict", help="run one record through an exported artifact")
    p.add_argument("--artifact", required=True)
    p.add_argument("--record", required=True, help="JSON file with a 'record' object")
    p.set_defaults(func=_cmd_predict)

    p = sub.add_parser("synth", help="generate the synthetic reference cohort")
    p.add_argument("--n", type=int, default=4279, help="total rows before selection")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--config", help="full generator config (JSON); overrides --n/--seed")
    p.add_argument("--out", default="synthetic.csv")
    p.add_argument("--schema-out", help="write the matching schema config here")
    p.set_defaults(func=_cmd_synth)

    p = sub.add_parser("serve", help="start the HTTP service")
    p.add_argument("--port", type=int, default=8323)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--artifact-dir", default="artifacts")
    p.add_argument("--workers", type=int, default=2)
    p.set_defaults(func=_cmd_serve)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ClinlabError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
