"""Prediction harness: pretrained sentiment models over public corpora,
emitting the fusion engine's JSONL record format."""

from .config import (
    CANONICAL_LABELS,
    DatasetSpec,
    HarnessConfig,
    ModelSpec,
    default_config,
)
from .errors import (
    ConfigError,
    HarnessError,
    LabelVocabularyMismatch,
    ModelResolutionFailure,
)
from .generate import (
    GenerationSummary,
    canonical_probabilities,
    class_count_deltas,
    generate_predictions,
)
from .textprep import clean_text, is_empty

__version__ = "0.1.0"
