"""Harness command line: write a starter config, generate predictions."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .config import HarnessConfig, default_config
from .errors import ConfigError, HarnessError, ModelResolutionFailure
from .generate import generate_predictions


def _cmd_init_config(args: argparse.Namespace) -> int:
    default_config().save(args.out)
    print(f"starter config written to {args.out}")
    print("pin model revisions before relying on record-identical reruns")
    return 0


def _cmd_generate(args: argparse.Namespace) -> int:
    cfg = HarnessConfig.load(args.config)
    summary = generate_predictions(
        cfg, output=args.output, limit_per_corpus=args.limit
    )
    print(f"wrote {summary.total_records} records to {summary.output}")
    for corpus, c in summary.corpora.items():
        counts = ", ".join(f"{k}={v}" for k, v in c.class_counts.items())
        print(
            f"  {corpus}: {c.total} records ({counts}); "
            f"dropped {c.dropped_empty} empty, {c.dropped_duplicate} duplicate"
        )
    if args.summary:
        Path(args.summary).write_text(
            json.dumps(summary.to_dict(), indent=2) + "\n", encoding="utf-8"
        )
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="bnfuse-harness",
        description="Run pretrained sentiment models over public corpora and "
        "emit fusion-ready prediction JSONL.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_init = sub.add_parser("init-config", help="write the starter config")
    p_init.add_argument("--out", default="harness_config.json")
    p_init.set_defaults(func=_cmd_init_config)

    p_gen = sub.add_parser("generate", help="generate the prediction JSONL")
    p_gen.add_argument("--config", required=True, help="harness config (JSON)")
    p_gen.add_argument("--output", help="override the config's output path")
    p_gen.add_argument(
        "--limit", type=int, help="cap records per corpus (smoke runs)"
    )
    p_gen.add_argument("--summary", help="write a JSON generation summary here")
    p_gen.set_defaults(func=_cmd_generate)
    return parser


def run(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 3
    except ModelResolutionFailure as exc:
        print(f"resolution error: {exc}", file=sys.stderr)
        return 4
    except HarnessError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 5
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3


def main() -> int:
    return run()


if __name__ == "__main__":
    sys.exit(main())
