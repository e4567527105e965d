"""Harness configuration: which checkpoints, which corpora, which vocabularies.

Everything label-related is declared here rather than hard-coded: hub models
disagree on label naming (POS vs positive vs LABEL_2), and datasets encode
gold labels as integers into per-dataset name lists. Revisions pin the
checkpoints so reruns are record-identical.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

from .errors import ConfigError

CANONICAL_LABELS = ("negative", "neutral", "positive")


@dataclass(frozen=True)
class ModelSpec:
    name: str
    hub_id: str
    labels: dict[str, str]
    revision: str | None = None

    def __post_init__(self) -> None:
        normalized = {str(k).strip().lower(): v for k, v in self.labels.items()}
        object.__setattr__(self, "labels", normalized)
        bad = sorted(set(normalized.values()) - set(CANONICAL_LABELS))
        if bad:
            raise ConfigError(
                f"model {self.name!r} maps labels to non-canonical targets: {bad}"
            )

    def to_canonical(self, label: str) -> str:
        key = str(label).strip().lower()
        if key not in self.labels:
            from .errors import LabelVocabularyMismatch

            raise LabelVocabularyMismatch(
                f"model {self.name!r} emitted {label!r}, outside its declared "
                f"vocabulary {sorted(self.labels)}"
            )
        return self.labels[key]


@dataclass(frozen=True)
class DatasetSpec:
    corpus: str
    hub_id: str
    text_field: str
    label_field: str
    labels: dict[str, str]
    label_names: tuple[str, ...] | None = None
    config: str | None = None
    splits: tuple[str, ...] = ("train",)

    def __post_init__(self) -> None:
        if not self.text_field or not self.label_field:
            raise ConfigError(
                f"dataset {self.corpus!r} must declare text and label fields"
            )
        if not self.labels:
            raise ConfigError(
                f"dataset {self.corpus!r} must declare its label vocabulary"
            )
        normalized = {str(k).strip().lower(): v for k, v in self.labels.items()}
        object.__setattr__(self, "labels", normalized)
        bad = sorted(set(normalized.values()) - set(CANONICAL_LABELS))
        if bad:
            raise ConfigError(
                f"dataset {self.corpus!r} maps labels to non-canonical targets: {bad}"
            )
        if self.label_names is not None:
            object.__setattr__(self, "label_names", tuple(self.label_names))
        object.__setattr__(self, "splits", tuple(self.splits))

    def gold_to_canonical(self, value: object) -> str:
        """Map a raw gold cell (int index or string name) to canonical."""
        if isinstance(value, int) and self.label_names is not None:
            if not 0 <= value < len(self.label_names):
                from .errors import LabelVocabularyMismatch

                raise LabelVocabularyMismatch(
                    f"dataset {self.corpus!r} gold index {value} outside "
                    f"label_names of length {len(self.label_names)}"
                )
            value = self.label_names[value]
        key = str(value).strip().lower()
        if key not in self.labels:
            from .errors import LabelVocabularyMismatch

            raise LabelVocabularyMismatch(
                f"dataset {self.corpus!r} gold label {value!r} outside its "
                f"declared vocabulary {sorted(self.labels)}"
            )
        return self.labels[key]


@dataclass(frozen=True)
class HarnessConfig:
    models: tuple[ModelSpec, ...]
    datasets: tuple[DatasetSpec, ...]
    batch_size: int = 32
    output: str = "predictions.jsonl"
    include_text: bool = True

    def __post_init__(self) -> None:
        object.__setattr__(self, "models", tuple(self.models))
        object.__setattr__(self, "datasets", tuple(self.datasets))
        names = [m.name for m in self.models]
        if not names:
            raise ConfigError("at least one model is required")
        if len(set(names)) != len(names):
            raise ConfigError(f"duplicate model names: {names}")
        corpora = [d.corpus for d in self.datasets]
        if not corpora:
            raise ConfigError("at least one dataset is required")
        if len(set(corpora)) != len(corpora):
            raise ConfigError(f"duplicate corpus tags: {corpora}")
        if self.batch_size < 1:
            raise ConfigError(f"batch_size must be >= 1, got {self.batch_size}")

    def to_dict(self) -> dict:
        return {
            "models": {
                m.name: {"id": m.hub_id, "labels": dict(m.labels)}
                for m in self.models
            },
            "revisions": {
                m.name: m.revision for m in self.models if m.revision
            },
            "datasets": {
                d.corpus: {
                    "id": d.hub_id,
                    **({"config": d.config} if d.config else {}),
                    "splits": list(d.splits),
                    "text_field": d.text_field,
                    "label_field": d.label_field,
                    **(
                        {"label_names": list(d.label_names)}
                        if d.label_names
                        else {}
                    ),
                    "labels": dict(d.labels),
                }
                for d in self.datasets
            },
            "batch_size": self.batch_size,
            "output": self.output,
            "include_text": self.include_text,
        }

    @classmethod
    def from_dict(cls, payload: dict) -> "HarnessConfig":
        try:
            revisions = payload.get("revisions", {})
            models = tuple(
                ModelSpec(
                    name=name,
                    hub_id=entry["id"],
                    labels=entry["labels"],
                    revision=revisions.get(name),
                )
                for name, entry in payload["models"].items()
            )
            datasets = tuple(
                DatasetSpec(
                    corpus=corpus,
                    hub_id=entry["id"],
                    config=entry.get("config"),
                    splits=tuple(entry.get("splits", ("train",))),
                    text_field=entry["text_field"],
                    label_field=entry["label_field"],
                    label_names=entry.get("label_names"),
                    labels=entry["labels"],
                )
                for corpus, entry in payload["datasets"].items()
            )
        except KeyError as exc:
            raise ConfigError(f"config missing required key: {exc}") from None
        return cls(
            models=models,
            datasets=datasets,
            batch_size=int(payload.get("batch_size", 32)),
            output=str(payload.get("output", "predictions.jsonl")),
            include_text=bool(payload.get("include_text", True)),
        )

    @classmethod
    def load(cls, path: str | Path) -> "HarnessConfig":
        return cls.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))

    def save(self, path: str | Path) -> None:
        Path(path).write_text(
            json.dumps(self.to_dict(), indent=2) + "\n", encoding="utf-8"
        )


_SENTIMENT_IDENTITY = {
    "negative": "negative", "neutral": "neutral", "positive": "positive"
}


def default_config() -> HarnessConfig:
    """Best-guess public checkpoints and corpora field mappings.

    The exact checkpoints behind the reference results are not published, so
    these are the closest widely-used sentiment heads; pin revisions before
    relying on record-identical reruns.
    """
    return HarnessConfig(
        models=(
            ModelSpec("finbert", "ProsusAI/finbert", dict(_SENTIMENT_IDENTITY)),
            ModelSpec(
                "roberta",
                "cardiffnlp/twitter-roberta-base-sentiment-latest",
                dict(_SENTIMENT_IDENTITY),
            ),
            ModelSpec(
                "bertweet",
                "finiteautomata/bertweet-base-sentiment-analysis",
                {"neg": "negative", "neu": "neutral", "pos": "positive"},
            ),
        ),
        datasets=(
            DatasetSpec(
                corpus="financial_phrasebank",
                hub_id="takala/financial_phrasebank",
                config="sentences_allagree",
                splits=("train",),
                text_field="sentence",
                label_field="label",
                label_names=("negative", "neutral", "positive"),
                labels=dict(_SENTIMENT_IDENTITY),
            ),
            DatasetSpec(
                corpus="tfns",
                hub_id="zeroshot/twitter-financial-news-sentiment",
                splits=("train", "validation"),
                text_field="text",
                label_field="label",
                label_names=("bearish", "bullish", "neutral"),
                labels={
                    "bearish": "negative",
                    "bullish": "positive",
                    "neutral": "neutral",
                },
            ),
            DatasetSpec(
                corpus="fiqa",
                hub_id="pauri32/fiqa-2018",
                splits=("train", "validation", "test"),
                text_field="sentence",
                label_field="label",
                label_names=("negative", "neutral", "positive"),
                labels=dict(_SENTIMENT_IDENTITY),
            ),
        ),
        batch_size=32,
        output="predictions.jsonl",
    )
