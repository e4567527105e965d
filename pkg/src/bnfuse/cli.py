"""Command-line surface: validate, fit, predict, evaluate, infer, influence, report.

Human-readable summaries go to standard output; machine-readable artifacts
go to ``--out`` and are always parseable on their own. Exit codes: 0 ok,
2 usage, 3 data error, 4 model error, 5 internal error. All randomness flows
through ``--seed``.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .errors import DataError, FusionError, ModelError, UnknownCorpusState
from .evaluation import (
    EvaluationReport,
    agreement_csv,
    build_report,
    majority_vote,
    overall_table_csv,
    probability_average,
    render_agreement_table,
    render_overall_table,
    render_per_class_table,
    render_per_corpus_table,
)
from .influence import AGGREGATIONS, METRICS, influence_report
from .inference import posterior
from .learning import SmoothingConfig
from .pipeline import (
    DEFAULT_MODELS,
    FusionConfig,
    FusionModel,
    dump_outcomes,
    fit_fusion,
    predict_batch,
)
from .records import (
    CORPUS_NODE,
    SENTIMENT_NODE,
    ParseResult,
    SplitSpec,
    load_records,
    validate_dataset_stats,
)

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_DATA = 3
EXIT_MODEL = 4
EXIT_INTERNAL = 5


def _write_out(path: str, content: str) -> None:
    Path(path).write_text(content, encoding="utf-8")


def _load_records_or_fail(path: str) -> ParseResult:
    try:
        return load_records(path)
    except OSError as exc:
        raise DataError(f"cannot read records file: {exc}") from exc


def _print_issue_summary(result: ParseResult) -> None:
    if not result.issues:
        return
    by_kind: dict[str, int] = {}
    for issue in result.issues:
        by_kind[issue.kind] = by_kind.get(issue.kind, 0) + 1
    print("issues:")
    for kind in sorted(by_kind):
        print(f"  {kind}: {by_kind[kind]}")


def _parse_set_flags(model: FusionModel, pairs: list[str]) -> dict[str, str]:
    """Evidence bindings from repeated --set NODE=STATE flags.

    Bad node names or states are user input problems, reported as data
    errors (exit 3) before any inference runs.
    """
    evidence: dict[str, str] = {}
    node_names = {s.name: s for s in model.network.nodes}
    for pair in pairs:
        if "=" not in pair:
            raise DataError(f"--set expects NODE=STATE, got {pair!r}")
        node, state = pair.split("=", 1)
        node, state = node.strip(), state.strip()
        if node not in node_names:
            raise DataError(
                f"unknown node {node!r} (nodes: {sorted(node_names)})"
            )
        if state not in node_names[node].states:
            if node == CORPUS_NODE:
                raise UnknownCorpusState(
                    f"UnknownCorpusState: {state!r} was not a corpus tag at "
                    f"training time (known: {list(node_names[node].states)})"
                )
            raise DataError(
                f"{state!r} is not a state of {node!r} "
                f"(states: {list(node_names[node].states)})"
            )
        evidence[node] = state
    return evidence


# subcommands -------------------------------------------------------------------


def _cmd_validate(args: argparse.Namespace) -> int:
    result = _load_records_or_fail(args.records)
    stats = validate_dataset_stats(result.records)
    print(f"records: {len(result.records)} valid, {len(result.issues)} issues")
    if result.records:
        print()
        print(stats.render_table())
    _print_issue_summary(result)
    if args.out:
        payload = {
            "records": len(result.records),
            "stats": stats.to_dict(),
            "issues": [issue.to_dict() for issue in result.issues],
        }
        _write_out(args.out, json.dumps(payload, indent=2) + "\n")
    return EXIT_OK


def _fusion_config(args: argparse.Namespace) -> FusionConfig:
    return FusionConfig(
        model_names=tuple(m.strip() for m in args.models.split(",") if m.strip()),
        smoothing=SmoothingConfig(alpha=args.alpha),
        split=SplitSpec(train_fraction=args.split, seed=args.seed),
    )


def _cmd_fit(args: argparse.Namespace) -> int:
    result = _load_records_or_fail(args.records)
    cfg = _fusion_config(args)
    fit = fit_fusion(cfg, result.records)
    manifest_path = fit.model.save(args.out)
    net = fit.model.network
    print(f"fitted network: {len(net.nodes)} nodes, {len(net.edges)} arcs")
    print(
        f"sentiment CPT rows: {len(net.cpt(SENTIMENT_NODE).rows)} "
        f"(alpha={fit.model.alpha})"
    )
    print(
        f"split: {len(fit.split.manifest.train_ids)} train / "
        f"{len(fit.split.manifest.test_ids)} test (seed={cfg.split.seed})"
    )
    if fit.issues:
        print(f"excluded from training: {len(fit.issues)} records")
    print(f"model written to {args.out}")
    print(f"manifest written to {manifest_path}")
    return EXIT_OK


def _cmd_predict(args: argparse.Namespace) -> int:
    model = _load_model(args.model)
    result = _load_records_or_fail(args.records)
    batch = predict_batch(model, result.records)
    dump_outcomes(batch.outcomes, args.out)
    print(f"predicted {len(batch.outcomes)} records -> {args.out}")
    flagged = sum(1 for o in batch.outcomes if o.flags)
    if flagged:
        print(f"flagged outcomes: {flagged}")
    if batch.issues:
        print(f"skipped records: {len(batch.issues)}")
        for issue in batch.issues[:10]:
            print(f"  {issue.record_id}: {issue.message}")
    return EXIT_OK


def _load_model(path: str) -> FusionModel:
    try:
        return FusionModel.load(path)
    except OSError as exc:
        raise DataError(f"cannot read model file: {exc}") from exc
    except (KeyError, ValueError, json.JSONDecodeError) as exc:
        raise ModelError(f"model file is not valid: {exc}") from exc


def _ensemble_sources(
    records, model_names: tuple[str, ...]
) -> dict[str, list[str | None]]:
    """Per-record labels for each model plus the two ensemble baselines.

    The majority fallback is the first configured model. Records missing a
    model's label (or probabilities, for averaging) contribute None and are
    excluded from that source's metrics.
    """
    sources: dict[str, list[str | None]] = {m: [] for m in model_names}
    sources["majority"] = []
    sources["average"] = []
    fallback = model_names[0]
    for record in records:
        labels = {
            m: record.preds[m].label for m in model_names if m in record.preds
        }
        for m in model_names:
            sources[m].append(labels.get(m))
        if fallback in labels and len(labels) >= 2:
            sources["majority"].append(majority_vote(labels, fallback))
        else:
            sources["majority"].append(None)
        probs = {
            m: record.preds[m].probs
            for m in model_names
            if m in record.preds and record.preds[m].probs is not None
        }
        if len(probs) == len(model_names):
            _, label = probability_average(probs)
            sources["average"].append(label)
        else:
            sources["average"].append(None)
    return sources


def _evaluate_records(
    records, model_names: tuple[str, ...], model: FusionModel | None
) -> EvaluationReport:
    gold = [r.gold for r in records]
    corpora = [r.corpus for r in records]
    sources = _ensemble_sources(records, model_names)
    if model is not None:
        batch = predict_batch(model, records)
        by_id = batch.labels_by_id()
        sources["fused"] = [by_id.get(r.id) for r in records]
    # a source with nothing to evaluate (e.g. averaging without any
    # probability vectors) is omitted rather than failing the run
    vacuous = [k for k, v in sources.items() if all(x is None for x in v)]
    for name in vacuous:
        print(f"note: source {name!r} has no evaluable records; omitted")
        del sources[name]
    return build_report(gold, sources, corpora)


def _emit_report(report: EvaluationReport, out: str | None, fmt: str) -> None:
    print(render_overall_table(report))
    print()
    print(render_per_class_table(report))
    print()
    print(render_per_corpus_table(report))
    print()
    print(render_agreement_table(report))
    if out:
        if fmt == "csv":
            _write_out(out, overall_table_csv(report) + "\n" + agreement_csv(report))
        elif fmt == "table":
            _write_out(
                out,
                "\n\n".join(
                    [
                        render_overall_table(report),
                        render_per_class_table(report),
                        render_per_corpus_table(report),
                        render_agreement_table(report),
                    ]
                )
                + "\n",
            )
        else:
            _write_out(out, json.dumps(report.to_dict(), indent=2) + "\n")


def _cmd_evaluate(args: argparse.Namespace) -> int:
    result = _load_records_or_fail(args.records)
    if not result.records:
        raise DataError("no valid records to evaluate")
    model = _load_model(args.model) if args.model else None
    if args.models:
        names = tuple(m.strip() for m in args.models.split(",") if m.strip())
    elif model is not None:
        names = model.model_names
    else:
        names = tuple(
            sorted({m for r in result.records for m in r.preds})
        )
    if not names:
        raise DataError("no model prediction columns found in the records")
    report = _evaluate_records(result.records, names, model)
    _emit_report(report, args.out, args.format)
    return EXIT_OK


def _cmd_infer(args: argparse.Namespace) -> int:
    model = _load_model(args.model)
    evidence = _parse_set_flags(model, args.set or [])
    result = posterior(model.network, SENTIMENT_NODE, evidence)
    print(f"evidence: {evidence if evidence else '(none)'}")
    width = max(len(s) for s in result.states)
    for state, prob in zip(result.states, result.distribution):
        print(f"  {state:<{width}}  {prob:.4f}")
    print(f"label: {result.argmax_state}")
    if args.out:
        payload = {
            "evidence": result.evidence,
            "states": list(result.states),
            "posterior": list(result.distribution),
            "label": result.argmax_state,
        }
        _write_out(args.out, json.dumps(payload, indent=2) + "\n")
    return EXIT_OK


def _cmd_influence(args: argparse.Namespace) -> int:
    model = _load_model(args.model)
    report = influence_report(model.network, metric=args.metric, agg=args.agg)
    print(f"metric: {report.metric}, aggregation: {report.aggregation}")
    print(report.render_table())
    if args.out:
        if args.format == "csv":
            lines = ["parent,child,strength"]
            lines += [
                f"{e.parent},{e.child},{e.strength}" for e in report.entries
            ]
            _write_out(args.out, "\n".join(lines) + "\n")
        elif args.format == "table":
            _write_out(args.out, report.render_table() + "\n")
        else:
            _write_out(args.out, json.dumps(report.to_dict(), indent=2) + "\n")
    return EXIT_OK


def _cmd_report(args: argparse.Namespace) -> int:
    """Full experiment: fit on the train partition, evaluate everything on
    the held-out partition, emit one combined report."""
    result = _load_records_or_fail(args.records)
    cfg = _fusion_config(args)
    fit = fit_fusion(cfg, result.records)
    print(
        f"fit: {len(fit.split.manifest.train_ids)} train / "
        f"{len(fit.split.manifest.test_ids)} test records (seed={cfg.split.seed}, "
        f"alpha={fit.model.alpha})"
    )
    print()
    report = _evaluate_records(fit.split.test, cfg.model_names, fit.model)
    influences = influence_report(
        fit.model.network, metric=args.metric, agg=args.agg
    )
    _emit_report(report, None, "json")
    print()
    print(f"influence (metric={args.metric}, agg={args.agg}):")
    print(influences.render_table())
    if args.out:
        payload = {
            "config": {
                "model_names": list(cfg.model_names),
                "alpha": fit.model.alpha,
                "split": {"seed": cfg.split.seed, "fraction": cfg.split.train_fraction},
                "corpus_states": list(fit.model.corpus_states),
            },
            "split": {
                "train": len(fit.split.manifest.train_ids),
                "test": len(fit.split.manifest.test_ids),
            },
            "evaluation": report.to_dict(),
            "influence": influences.to_dict(),
        }
        _write_out(args.out, json.dumps(payload, indent=2) + "\n")
    return EXIT_OK


# parser ------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="bnfuse",
        description=(
            "Decision-level fusion of sentiment classifiers through a "
            "discrete Bayesian network conditioned on corpus type."
        ),
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name: str, help_text: str, **flags) -> argparse.ArgumentParser:
        p = sub.add_parser(name, help=help_text)
        if flags.get("records"):
            p.add_argument("--records", required=True, help="prediction records (JSONL)")
        if flags.get("model_required"):
            p.add_argument("--model", required=True, help="fitted model file (JSON)")
        elif flags.get("model_optional"):
            p.add_argument("--model", help="fitted model file (JSON)")
        if flags.get("models"):
            p.add_argument(
                "--models",
                default=flags.get("models_default"),
                help="comma-separated model names",
            )
        if flags.get("fit_flags"):
            p.add_argument("--split", type=float, default=0.8, help="train fraction")
            p.add_argument("--seed", type=int, default=0, help="split shuffle seed")
            p.add_argument("--alpha", type=float, default=1.0, help="smoothing pseudo-count")
        if flags.get("set"):
            p.add_argument(
                "--set",
                action="append",
                metavar="NODE=STATE",
                help="fix a node to a state (repeatable)",
            )
        if flags.get("metric"):
            p.add_argument("--metric", choices=METRICS, default="euclidean")
            p.add_argument("--agg", choices=AGGREGATIONS, default="average")
        if flags.get("out_required"):
            p.add_argument("--out", required=True, help="output path")
        else:
            p.add_argument("--out", help="machine-readable output path")
        p.add_argument(
            "--format", choices=("json", "csv", "table"), default="json",
            help="format of --out where applicable",
        )
        return p

    add("validate", "parse records, report statistics and issues", records=True)
    p = add(
        "fit",
        "learn CPTs on the train partition, write model + manifest",
        records=True,
        models=True,
        models_default=",".join(DEFAULT_MODELS),
        fit_flags=True,
        out_required=True,
    )
    add(
        "predict",
        "batch posterior prediction over records",
        records=True,
        model_required=True,
        out_required=True,
    )
    add(
        "evaluate",
        "metrics for individual models, ensembles, and the fused predictor",
        records=True,
        model_optional=True,
        models=True,
    )
    add("infer", "posterior for one evidence scenario", model_required=True, set=True)
    add("influence", "per-arc influence strengths", model_required=True, metric=True)
    add(
        "report",
        "end-to-end: fit, predict held-out records, evaluate, influence",
        records=True,
        models=True,
        models_default=",".join(DEFAULT_MODELS),
        fit_flags=True,
        metric=True,
    )

    parser.set_defaults(func=None)
    handlers = {
        "validate": _cmd_validate,
        "fit": _cmd_fit,
        "predict": _cmd_predict,
        "evaluate": _cmd_evaluate,
        "infer": _cmd_infer,
        "influence": _cmd_influence,
        "report": _cmd_report,
    }
    for name, p in sub.choices.items():
        p.set_defaults(func=handlers[name])
    return parser


def run(argv: list[str] | None = None) -> int:
    """Dispatch one invocation; returns the process exit code."""
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except DataError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except ModelError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_MODEL
    except FusionError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL
    except Exception as exc:  # noqa: BLE001 - last-resort mapping to exit 5
        print(f"internal error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


def main() -> int:
    return run()


if __name__ == "__main__":
    sys.exit(main())
