"""Run the configured models over the configured corpora and emit JSONL.

Output schema per line (the fusion engine's record format):

    {"id": ..., "corpus": ..., "text": ..., "gold": ...,
     "preds": {"<model>": {"label": ..., "probs": [neg, neu, pos]}, ...}}

Records are written in corpus-then-id order; ids number the retained texts
within each corpus after preprocessing, so identical inputs produce
byte-identical output.
"""

from __future__ import annotations

import json
from collections.abc import Mapping
from dataclasses import dataclass, field
from pathlib import Path

from .backends import DatasetProvider, ModelRunner, hub_dataset_provider, hub_model_runner
from .config import CANONICAL_LABELS, HarnessConfig, ModelSpec
from .textprep import clean_text

PROB_DECIMALS = None  # full precision; json repr round-trips doubles


@dataclass
class CorpusSummary:
    total: int = 0
    class_counts: dict[str, int] = field(
        default_factory=lambda: {label: 0 for label in CANONICAL_LABELS}
    )
    dropped_empty: int = 0
    dropped_duplicate: int = 0


@dataclass
class GenerationSummary:
    output: str
    corpora: dict[str, CorpusSummary] = field(default_factory=dict)

    @property
    def total_records(self) -> int:
        return sum(c.total for c in self.corpora.values())

    def to_dict(self) -> dict:
        return {
            "output": self.output,
            "total_records": self.total_records,
            "corpora": {
                tag: {
                    "total": c.total,
                    "class_counts": dict(c.class_counts),
                    "dropped_empty": c.dropped_empty,
                    "dropped_duplicate": c.dropped_duplicate,
                }
                for tag, c in self.corpora.items()
            },
        }


def canonical_probabilities(
    spec: ModelSpec, scored: list[tuple[str, float]]
) -> tuple[list[float], str]:
    """Fold model-vocabulary scores into a canonical-order 3-vector.

    The vector is renormalized by its mass and the emitted label is its
    canonical-order argmax, which makes the label/argmax invariant hold by
    construction.
    """
    vector = [0.0, 0.0, 0.0]
    for label, score in scored:
        canonical = spec.to_canonical(label)
        vector[CANONICAL_LABELS.index(canonical)] += float(score)
    mass = sum(vector)
    if mass > 0:
        vector = [v / mass for v in vector]
    best = 0
    for i in (1, 2):
        if vector[i] > vector[best]:
            best = i
    return vector, CANONICAL_LABELS[best]


def _prepare_corpus(
    spec, provider: DatasetProvider, seen_texts: set[str], summary: CorpusSummary
) -> list[tuple[str, str]]:
    """Cleaned, deduplicated (text, canonical gold) rows for one corpus."""
    rows: list[tuple[str, str]] = []
    for raw_text, raw_gold in provider(spec):
        text = clean_text(raw_text)
        if not text:
            summary.dropped_empty += 1
            continue
        if text in seen_texts:
            summary.dropped_duplicate += 1
            continue
        seen_texts.add(text)
        rows.append((text, spec.gold_to_canonical(raw_gold)))
    return rows


def generate_predictions(
    cfg: HarnessConfig,
    output: str | Path | None = None,
    dataset_provider: DatasetProvider | None = None,
    model_runners: Mapping[str, ModelRunner] | None = None,
    limit_per_corpus: int | None = None,
) -> GenerationSummary:
    """Produce the prediction JSONL for the configured corpora and models.

    ``dataset_provider`` and ``model_runners`` default to the hub backends;
    tests inject deterministic fakes. ``limit_per_corpus`` truncates each
    corpus after preprocessing (deterministic head) for smoke runs.
    """
    provider = dataset_provider or hub_dataset_provider
    runners: dict[str, ModelRunner] = {}
    for model in cfg.models:
        if model_runners is not None and model.name in model_runners:
            runners[model.name] = model_runners[model.name]
        else:
            runners[model.name] = hub_model_runner(model, cfg.batch_size)

    out_path = Path(output) if output is not None else Path(cfg.output)
    summary = GenerationSummary(output=str(out_path))
    seen_texts: set[str] = set()

    with open(out_path, "w", encoding="utf-8") as handle:
        for spec in cfg.datasets:
            corpus_summary = CorpusSummary()
            summary.corpora[spec.corpus] = corpus_summary
            rows = _prepare_corpus(spec, provider, seen_texts, corpus_summary)
            if limit_per_corpus is not None:
                rows = rows[:limit_per_corpus]
            texts = [text for text, _ in rows]

            per_model: dict[str, list[tuple[list[float], str]]] = {}
            for model in cfg.models:
                outputs: list[tuple[list[float], str]] = []
                for start in range(0, len(texts), cfg.batch_size):
                    batch = texts[start : start + cfg.batch_size]
                    for scored in runners[model.name](batch):
                        outputs.append(canonical_probabilities(model, scored))
                per_model[model.name] = outputs

            for i, (text, gold) in enumerate(rows):
                payload: dict = {"id": f"{spec.corpus}-{i:06d}", "corpus": spec.corpus}
                if cfg.include_text:
                    payload["text"] = text
                payload["gold"] = gold
                payload["preds"] = {
                    name: {
                        "label": per_model[name][i][1],
                        "probs": per_model[name][i][0],
                    }
                    for name in (m.name for m in cfg.models)
                }
                handle.write(json.dumps(payload, ensure_ascii=False) + "\n")
                corpus_summary.total += 1
                corpus_summary.class_counts[gold] += 1
    return summary


def class_count_deltas(
    summary: GenerationSummary,
    reference: Mapping[str, Mapping[str, int]],
) -> dict[str, dict[str, float]]:
    """Relative per-cell deltas against a reference count table.

    delta = (observed - reference) / reference per (corpus, class) cell;
    a missing corpus yields delta -1.0 for every class.
    """
    deltas: dict[str, dict[str, float]] = {}
    for corpus, ref_counts in reference.items():
        observed = summary.corpora.get(corpus)
        deltas[corpus] = {}
        for label, ref in ref_counts.items():
            got = observed.class_counts.get(label, 0) if observed else 0
            deltas[corpus][label] = (got - ref) / ref if ref else float(got > 0)
    return deltas
