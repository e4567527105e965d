"""Deterministic fake backends standing in for the hub."""

from __future__ import annotations

import hashlib

import pytest

from bnfuse_harness.config import (
    CANONICAL_LABELS,
    DatasetSpec,
    HarnessConfig,
    ModelSpec,
)

IDENTITY = {"negative": "negative", "neutral": "neutral", "positive": "positive"}


def tiny_config(**overrides) -> HarnessConfig:
    defaults = dict(
        models=(
            ModelSpec("finbert", "fake/finbert", dict(IDENTITY)),
            ModelSpec("roberta", "fake/roberta", dict(IDENTITY)),
            ModelSpec(
                "bertweet",
                "fake/bertweet",
                {"neg": "negative", "neu": "neutral", "pos": "positive"},
            ),
        ),
        datasets=(
            DatasetSpec(
                corpus="financial_phrasebank",
                hub_id="fake/fpb",
                text_field="sentence",
                label_field="label",
                label_names=("negative", "neutral", "positive"),
                labels=dict(IDENTITY),
            ),
            DatasetSpec(
                corpus="tfns",
                hub_id="fake/tfns",
                text_field="text",
                label_field="label",
                label_names=("bearish", "bullish", "neutral"),
                labels={
                    "bearish": "negative",
                    "bullish": "positive",
                    "neutral": "neutral",
                },
            ),
        ),
        batch_size=4,
        output="predictions.jsonl",
    )
    defaults.update(overrides)
    return HarnessConfig(**defaults)


class FakeCorpora:
    """In-memory (text, gold) rows keyed by corpus tag."""

    def __init__(self, rows_by_corpus: dict[str, list[tuple[str, object]]]):
        self.rows = rows_by_corpus

    def __call__(self, spec: DatasetSpec):
        yield from self.rows[spec.corpus]


def default_fake_corpora() -> FakeCorpora:
    fpb = [(f"phrasebank sentence number {i}", i % 3) for i in range(12)]
    tfns = [(f"tweet number {i} about markets", i % 3) for i in range(9)]
    return FakeCorpora({"financial_phrasebank": fpb, "tfns": tfns})


def fake_runner(model_name: str, vocabulary: tuple[str, ...] = CANONICAL_LABELS):
    """Deterministic pseudo-model: label index = sha256(model || text) mod 3,
    with probability 0.7 on the chosen label and 0.15 elsewhere."""

    def run(texts):
        outputs = []
        for text in texts:
            digest = hashlib.sha256(f"{model_name}::{text}".encode()).digest()
            chosen = digest[0] % len(vocabulary)
            outputs.append(
                [
                    (label, 0.7 if i == chosen else 0.15)
                    for i, label in enumerate(vocabulary)
                ]
            )
        return outputs

    return run


def default_runners() -> dict:
    return {
        "finbert": fake_runner("finbert"),
        "roberta": fake_runner("roberta"),
        "bertweet": fake_runner("bertweet", ("NEG", "NEU", "POS")),
    }


@pytest.fixture
def config() -> HarnessConfig:
    return tiny_config()


@pytest.fixture
def corpora() -> FakeCorpora:
    return default_fake_corpora()


@pytest.fixture
def runners() -> dict:
    return default_runners()
