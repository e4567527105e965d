import pytest

from bnfuse_harness.config import (
    DatasetSpec,
    HarnessConfig,
    ModelSpec,
    default_config,
)
from bnfuse_harness.errors import ConfigError, LabelVocabularyMismatch

from conftest import IDENTITY, tiny_config


class TestModelSpec:
    def test_vocabulary_lookup_case_insensitive(self):
        spec = ModelSpec("m", "fake/m", {"NEG": "negative", "neu": "neutral",
                                         "Pos": "positive"})
        assert spec.to_canonical("neg") == "negative"
        assert spec.to_canonical(" POS ") == "positive"

    def test_out_of_vocabulary_label_rejected(self):
        spec = ModelSpec("m", "fake/m", dict(IDENTITY))
        with pytest.raises(LabelVocabularyMismatch):
            spec.to_canonical("LABEL_7")

    def test_non_canonical_target_rejected(self):
        with pytest.raises(ConfigError):
            ModelSpec("m", "fake/m", {"x": "bullish"})


class TestDatasetSpec:
    def test_integer_gold_via_label_names(self):
        spec = DatasetSpec(
            corpus="tfns", hub_id="fake", text_field="text", label_field="label",
            label_names=("bearish", "bullish", "neutral"),
            labels={"bearish": "negative", "bullish": "positive",
                    "neutral": "neutral"},
        )
        assert spec.gold_to_canonical(0) == "negative"
        assert spec.gold_to_canonical(1) == "positive"
        assert spec.gold_to_canonical("Bearish") == "negative"

    def test_gold_index_out_of_range(self):
        spec = DatasetSpec(
            corpus="c", hub_id="fake", text_field="t", label_field="l",
            label_names=("negative", "neutral", "positive"), labels=dict(IDENTITY),
        )
        with pytest.raises(LabelVocabularyMismatch):
            spec.gold_to_canonical(3)

    def test_missing_field_mapping_rejected(self):
        with pytest.raises(ConfigError):
            DatasetSpec(corpus="c", hub_id="fake", text_field="", label_field="l",
                        labels=dict(IDENTITY))

    def test_missing_vocabulary_rejected(self):
        with pytest.raises(ConfigError):
            DatasetSpec(corpus="c", hub_id="fake", text_field="t",
                        label_field="l", labels={})


class TestHarnessConfig:
    def test_duplicate_model_names_rejected(self):
        models = (
            ModelSpec("m", "fake/a", dict(IDENTITY)),
            ModelSpec("m", "fake/b", dict(IDENTITY)),
        )
        with pytest.raises(ConfigError):
            tiny_config(models=models)

    def test_round_trip_through_json(self, tmp_path):
        cfg = default_config()
        path = tmp_path / "config.json"
        cfg.save(path)
        reloaded = HarnessConfig.load(path)
        assert reloaded == cfg

    def test_default_config_matches_fusion_model_names(self):
        cfg = default_config()
        assert tuple(m.name for m in cfg.models) == ("finbert", "roberta", "bertweet")
        assert tuple(d.corpus for d in cfg.datasets) == (
            "financial_phrasebank", "tfns", "fiqa",
        )

    def test_revisions_block_parsed(self, tmp_path):
        cfg = default_config()
        payload = cfg.to_dict()
        payload["revisions"] = {"finbert": "abc123"}
        import json

        path = tmp_path / "config.json"
        path.write_text(json.dumps(payload))
        reloaded = HarnessConfig.load(path)
        assert reloaded.models[0].revision == "abc123"
        assert reloaded.models[1].revision is None

    def test_missing_required_key_is_config_error(self, tmp_path):
        path = tmp_path / "config.json"
        path.write_text('{"models": {}}')
        with pytest.raises(ConfigError):
            HarnessConfig.load(path)
