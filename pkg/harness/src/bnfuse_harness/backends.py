"""Hub-backed dataset and model backends, injectable for offline testing.

A dataset provider maps a DatasetSpec to raw (text, gold) rows; a model
runner maps a batch of texts to per-text lists of (label, score) pairs.
Both import their heavy dependencies lazily so the offline core of the
harness stays dependency-free.
"""

from __future__ import annotations

from collections.abc import Callable, Iterable, Sequence

from .config import DatasetSpec, ModelSpec
from .errors import ModelResolutionFailure

# (text, raw gold label) rows in deterministic dataset order
DatasetProvider = Callable[[DatasetSpec], Iterable[tuple[str, object]]]
# texts -> per text: [(label, score), ...] over the model's full vocabulary
ModelRunner = Callable[[Sequence[str]], list[list[tuple[str, float]]]]


def hub_dataset_provider(spec: DatasetSpec) -> Iterable[tuple[str, object]]:
    try:
        from datasets import load_dataset
    except ImportError as exc:
        raise ModelResolutionFailure(
            "the 'datasets' package is required for hub-backed runs "
            "(install the [hub] extra)"
        ) from exc
    for split in spec.splits:
        try:
            dataset = load_dataset(
                spec.hub_id, spec.config, split=split, trust_remote_code=False
            )
        except Exception as exc:
            raise ModelResolutionFailure(
                f"cannot load dataset {spec.hub_id!r} "
                f"(config={spec.config!r}, split={split!r}): {exc}"
            ) from exc
        for row in dataset:
            yield row[spec.text_field], row[spec.label_field]


def hub_model_runner(spec: ModelSpec, batch_size: int = 32) -> ModelRunner:
    """Inference-only sentiment pipeline over fixed pretrained weights."""
    try:
        from transformers import pipeline
    except ImportError as exc:
        raise ModelResolutionFailure(
            "the 'transformers' package is required for hub-backed runs "
            "(install the [hub] extra)"
        ) from exc
    try:
        classify = pipeline(
            "text-classification",
            model=spec.hub_id,
            revision=spec.revision,
            top_k=None,
            truncation=True,
            batch_size=batch_size,
        )
    except Exception as exc:
        raise ModelResolutionFailure(
            f"cannot resolve model {spec.hub_id!r} "
            f"(revision={spec.revision!r}): {exc}"
        ) from exc

    def run(texts: Sequence[str]) -> list[list[tuple[str, float]]]:
        outputs = classify(list(texts))
        return [
            [(entry["label"], float(entry["score"])) for entry in per_text]
            for per_text in outputs
        ]

    return run
