"""Prediction records: parsing, label remapping, statistics, and splits.

The record format is line-delimited JSON, one record per line:

    {"id": "...", "corpus": "...", "text": "...", "gold": "...",
     "preds": {"finbert": {"label": "...", "probs": [..., ..., ...]}, ...}}

``text`` is optional and never used for computation. Probability vectors are
in canonical sentiment order (negative, neutral, positive).
"""

from __future__ import annotations

import csv
import json
import math
from collections.abc import Iterable, Mapping, Sequence
from dataclasses import dataclass
from pathlib import Path

from .errors import DataError, EmptyInput, UnknownSourceLabel
from .learning import TrainingTable
from .network import CANONICAL_SENTIMENTS

#: Known corpus tags in canonical order; unknown tags are accepted but
#: flagged and sort after these.
CANONICAL_CORPORA = ("financial_phrasebank", "tfns", "fiqa")

PROB_SUM_TOLERANCE = 1e-6

CORPUS_NODE = "corpus"
SENTIMENT_NODE = "sentiment"


@dataclass(frozen=True)
class Prediction:
    """One model's output for one text: a label, optionally class probabilities."""

    label: str
    probs: tuple[float, float, float] | None = None


@dataclass(frozen=True)
class PredictionRecord:
    id: str
    corpus: str
    gold: str
    preds: dict[str, Prediction]
    text: str | None = None

    def to_dict(self) -> dict:
        payload: dict = {"id": self.id, "corpus": self.corpus}
        if self.text is not None:
            payload["text"] = self.text
        payload["gold"] = self.gold
        payload["preds"] = {
            name: (
                {"label": p.label}
                if p.probs is None
                else {"label": p.label, "probs": list(p.probs)}
            )
            for name, p in self.preds.items()
        }
        return payload


@dataclass(frozen=True)
class LabelMap:
    """Total mapping from source label vocabulary to the canonical scheme.

    Lookup is case-insensitive on stripped input. The mapping must cover all
    three canonical labels so no class can silently disappear.
    """

    mapping: dict[str, str]

    def __post_init__(self) -> None:
        normalized = {str(k).strip().lower(): v for k, v in self.mapping.items()}
        object.__setattr__(self, "mapping", normalized)
        bad = sorted(set(normalized.values()) - set(CANONICAL_SENTIMENTS))
        if bad:
            raise DataError(f"label map targets non-canonical labels: {bad}")
        missing = sorted(set(CANONICAL_SENTIMENTS) - set(normalized.values()))
        if missing:
            raise DataError(f"label map never produces: {missing}")

    def apply(self, label: str) -> str:
        key = str(label).strip().lower()
        try:
            return self.mapping[key]
        except KeyError:
            raise UnknownSourceLabel(f"no canonical mapping for label {label!r}") from None


#: Identity on canonical labels plus the common source vocabularies:
#: bearish/bullish and the numeric scheme 0=negative, 1=neutral, 2=positive.
DEFAULT_LABEL_MAP = LabelMap(
    {
        "negative": "negative",
        "neutral": "neutral",
        "positive": "positive",
        "bearish": "negative",
        "bullish": "positive",
        "0": "negative",
        "1": "neutral",
        "2": "positive",
    }
)


@dataclass(frozen=True)
class ParseIssue:
    kind: str
    message: str
    line: int | None = None
    record_id: str | None = None

    def to_dict(self) -> dict:
        payload = {"kind": self.kind, "message": self.message}
        if self.line is not None:
            payload["line"] = self.line
        if self.record_id is not None:
            payload["record_id"] = self.record_id
        return payload


@dataclass
class ParseResult:
    records: list[PredictionRecord]
    issues: list[ParseIssue]

    def issues_of(self, kind: str) -> list[ParseIssue]:
        return [i for i in self.issues if i.kind == kind]


def _canonical_argmax(probs: Sequence[float]) -> int:
    best = 0
    for i in range(1, len(probs)):
        if probs[i] > probs[best]:
            best = i
    return best


def _parse_probs(raw: object) -> tuple[float, float, float] | None:
    """Validated 3-vector or None; raises ValueError with a reason."""
    if raw is None:
        return None
    if not isinstance(raw, (list, tuple)) or len(raw) != 3:
        raise ValueError("probs must be a list of 3 numbers")
    values = tuple(float(v) for v in raw)
    if any(v < 0 or not math.isfinite(v) for v in values):
        raise ValueError("probs must be finite and >= 0")
    if abs(sum(values) - 1.0) > PROB_SUM_TOLERANCE:
        raise ValueError(f"probs sum to {sum(values):.8f}, expected 1")
    return values


def parse_records(
    lines: Iterable[str],
    label_map: LabelMap = DEFAULT_LABEL_MAP,
) -> ParseResult:
    """Parse line-delimited JSON into validated records plus an issue list.

    Malformed lines, empty texts, unmappable gold labels, and duplicate ids
    are dropped and reported; they never abort the parse. A model prediction
    with an unmappable label or invalid probabilities is dropped from its
    record alone. Probability/label disagreements and unknown corpus tags
    are reported as warnings and kept.
    """
    records: list[PredictionRecord] = []
    issues: list[ParseIssue] = []
    seen_ids: set[str] = set()

    for line_no, line in enumerate(lines, start=1):
        if isinstance(line, bytes):
            try:
                line = line.decode("utf-8")
            except UnicodeDecodeError as exc:
                issues.append(ParseIssue("malformed_line", str(exc), line=line_no))
                continue
        if not line.strip():
            continue
        try:
            payload = json.loads(line)
        except json.JSONDecodeError as exc:
            issues.append(ParseIssue("malformed_line", str(exc), line=line_no))
            continue
        if not isinstance(payload, dict):
            issues.append(
                ParseIssue("malformed_line", "line is not a JSON object", line=line_no)
            )
            continue

        missing = [k for k in ("id", "corpus", "gold", "preds") if k not in payload]
        if missing:
            issues.append(
                ParseIssue(
                    "malformed_line",
                    f"missing required fields: {missing}",
                    line=line_no,
                )
            )
            continue

        record_id = str(payload["id"])
        corpus = str(payload["corpus"])

        text = payload.get("text")
        if text is not None:
            text = str(text)
            if not text.strip():
                issues.append(
                    ParseIssue(
                        "empty_text", "text present but empty", line=line_no,
                        record_id=record_id,
                    )
                )
                continue

        if record_id in seen_ids:
            issues.append(
                ParseIssue(
                    "duplicate_id",
                    f"id {record_id!r} already seen; line dropped",
                    line=line_no,
                    record_id=record_id,
                )
            )
            continue

        try:
            gold = label_map.apply(payload["gold"])
        except UnknownSourceLabel as exc:
            issues.append(
                ParseIssue(
                    "unknown_source_label", str(exc), line=line_no, record_id=record_id
                )
            )
            continue

        if not isinstance(payload["preds"], dict):
            issues.append(
                ParseIssue(
                    "malformed_line", "preds must be an object", line=line_no,
                    record_id=record_id,
                )
            )
            continue

        preds: dict[str, Prediction] = {}
        for model, entry in payload["preds"].items():
            if not isinstance(entry, dict) or "label" not in entry:
                issues.append(
                    ParseIssue(
                        "malformed_prediction",
                        f"prediction for {model!r} lacks a label",
                        line=line_no,
                        record_id=record_id,
                    )
                )
                continue
            try:
                label = label_map.apply(entry["label"])
            except UnknownSourceLabel as exc:
                issues.append(
                    ParseIssue(
                        "unknown_source_label",
                        f"model {model!r}: {exc}",
                        line=line_no,
                        record_id=record_id,
                    )
                )
                continue
            try:
                probs = _parse_probs(entry.get("probs"))
            except (ValueError, TypeError) as exc:
                issues.append(
                    ParseIssue(
                        "invalid_probs",
                        f"model {model!r}: {exc}; probabilities dropped",
                        line=line_no,
                        record_id=record_id,
                    )
                )
                probs = None
            if probs is not None:
                expected = CANONICAL_SENTIMENTS[_canonical_argmax(probs)]
                if expected != label:
                    issues.append(
                        ParseIssue(
                            "label_probs_mismatch",
                            f"model {model!r} label {label!r} is not the argmax "
                            f"of its probabilities ({expected!r})",
                            line=line_no,
                            record_id=record_id,
                        )
                    )
            preds[str(model)] = Prediction(label=label, probs=probs)

        if corpus not in CANONICAL_CORPORA:
            issues.append(
                ParseIssue(
                    "unknown_corpus_tag",
                    f"corpus tag {corpus!r} is not one of {CANONICAL_CORPORA}; kept",
                    line=line_no,
                    record_id=record_id,
                )
            )

        seen_ids.add(record_id)
        records.append(
            PredictionRecord(
                id=record_id, corpus=corpus, gold=gold, preds=preds, text=text
            )
        )
    return ParseResult(records=records, issues=issues)


def load_records(
    path: str | Path, label_map: LabelMap = DEFAULT_LABEL_MAP
) -> ParseResult:
    with open(path, encoding="utf-8") as handle:
        return parse_records(handle, label_map)


def dump_records(records: Iterable[PredictionRecord], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as handle:
        for record in records:
            handle.write(json.dumps(record.to_dict(), ensure_ascii=False) + "\n")


def records_from_csv(
    path: str | Path,
    model_names: Sequence[str],
    label_map: LabelMap = DEFAULT_LABEL_MAP,
) -> ParseResult:
    """Convenience converter: CSV with columns id, corpus, gold, optional text,
    and one label column per model name. Probabilities are not representable
    in this form; use JSONL for them."""
    lines = []
    with open(path, newline="", encoding="utf-8") as handle:
        for row in csv.DictReader(handle):
            payload: dict = {
                "id": row.get("id"),
                "corpus": row.get("corpus"),
                "gold": row.get("gold"),
                "preds": {
                    m: {"label": row[m]} for m in model_names if row.get(m)
                },
            }
            if row.get("text"):
                payload["text"] = row["text"]
            lines.append(json.dumps(payload))
    return parse_records(lines, label_map)


# dataset statistics ---------------------------------------------------------


def _corpus_sort_key(tag: str) -> tuple[int, str]:
    if tag in CANONICAL_CORPORA:
        return (CANONICAL_CORPORA.index(tag), "")
    return (len(CANONICAL_CORPORA), tag)


def corpus_state_order(tags: Iterable[str]) -> tuple[str, ...]:
    """Canonical three corpora first, then unknown tags lexicographically."""
    return tuple(sorted(set(tags), key=_corpus_sort_key))


@dataclass(frozen=True)
class DatasetStats:
    """Per-corpus gold class counts and proportions, plus a grand total row."""

    corpora: tuple[str, ...]
    counts: dict[str, dict[str, int]]

    def corpus_total(self, corpus: str) -> int:
        return sum(self.counts[corpus].values())

    @property
    def grand_total(self) -> int:
        return sum(self.corpus_total(c) for c in self.corpora)

    def class_total(self, label: str) -> int:
        return sum(self.counts[c][label] for c in self.corpora)

    def proportion(self, corpus: str, label: str) -> float:
        total = self.corpus_total(corpus)
        return self.counts[corpus][label] / total if total else 0.0

    def class_proportion(self, label: str) -> float:
        total = self.grand_total
        return self.class_total(label) / total if total else 0.0

    def to_dict(self) -> dict:
        return {
            "corpora": {
                c: {
                    "counts": dict(self.counts[c]),
                    "proportions": {
                        label: self.proportion(c, label)
                        for label in CANONICAL_SENTIMENTS
                    },
                    "total": self.corpus_total(c),
                }
                for c in self.corpora
            },
            "total": {
                "counts": {
                    label: self.class_total(label) for label in CANONICAL_SENTIMENTS
                },
                "proportions": {
                    label: self.class_proportion(label)
                    for label in CANONICAL_SENTIMENTS
                },
                "total": self.grand_total,
            },
        }

    def render_table(self) -> str:
        width = max([len(c) for c in self.corpora] + [len("Corpus"), len("Total")])
        header = f"{'Corpus':<{width}}  " + "  ".join(
            f"{label.capitalize():>18}" for label in CANONICAL_SENTIMENTS
        )
        lines = [header, "-" * len(header)]
        for corpus in self.corpora:
            cells = "  ".join(
                f"{self.counts[corpus][label]:>9,} ({self.proportion(corpus, label) * 100:5.2f}%)"
                for label in CANONICAL_SENTIMENTS
            )
            lines.append(f"{corpus:<{width}}  {cells}")
        total_cells = "  ".join(
            f"{self.class_total(label):>9,} ({self.class_proportion(label) * 100:5.2f}%)"
            for label in CANONICAL_SENTIMENTS
        )
        lines.append(f"{'Total':<{width}}  {total_cells}")
        return "\n".join(lines)


def validate_dataset_stats(records: Sequence[PredictionRecord]) -> DatasetStats:
    """Counts and proportions per (corpus, gold class) cell plus totals."""
    corpora = corpus_state_order(r.corpus for r in records)
    counts = {
        c: {label: 0 for label in CANONICAL_SENTIMENTS} for c in corpora
    }
    for record in records:
        counts[record.corpus][record.gold] += 1
    return DatasetStats(corpora=corpora, counts=counts)


# splitting -------------------------------------------------------------------

_MASK64 = (1 << 64) - 1


class SplitMix64:
    """The splitmix64 generator: 64-bit state, documented constants.

    next() = mix of state += 0x9E3779B97F4A7C15, then two xor-shift-multiply
    rounds (0xBF58476D1CE4E5B9, 0x94D049BB133111EB) and a final 31-bit shift.
    Chosen so the shuffle is reproducible from the seed in any language.
    """

    def __init__(self, seed: int) -> None:
        self._state = seed & _MASK64

    def next_u64(self) -> int:
        self._state = (self._state + 0x9E3779B97F4A7C15) & _MASK64
        z = self._state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
        return z ^ (z >> 31)

    def shuffle(self, items: list) -> None:
        """Fisher-Yates from the tail; j = next_u64() % (i + 1)."""
        for i in range(len(items) - 1, 0, -1):
            j = self.next_u64() % (i + 1)
            items[i], items[j] = items[j], items[i]


@dataclass(frozen=True)
class SplitSpec:
    train_fraction: float = 0.8
    seed: int = 0
    stratify: bool = False

    def __post_init__(self) -> None:
        if not 0.0 < self.train_fraction < 1.0:
            raise DataError(
                f"train_fraction must be in (0, 1), got {self.train_fraction}"
            )


@dataclass(frozen=True)
class SplitManifest:
    """The contract of record for a split: exactly which ids went where."""

    seed: int
    fraction: float
    train_ids: tuple[str, ...]
    test_ids: tuple[str, ...]

    def to_dict(self) -> dict:
        return {
            "seed": self.seed,
            "fraction": self.fraction,
            "train_ids": list(self.train_ids),
            "test_ids": list(self.test_ids),
        }

    @classmethod
    def from_dict(cls, payload: Mapping) -> "SplitManifest":
        return cls(
            seed=int(payload["seed"]),
            fraction=float(payload["fraction"]),
            train_ids=tuple(payload["train_ids"]),
            test_ids=tuple(payload["test_ids"]),
        )

    def save(self, path: str | Path) -> None:
        Path(path).write_text(
            json.dumps(self.to_dict(), indent=2) + "\n", encoding="utf-8"
        )

    @classmethod
    def load(cls, path: str | Path) -> "SplitManifest":
        return cls.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))


@dataclass
class SplitResult:
    train: list[PredictionRecord]
    test: list[PredictionRecord]
    manifest: SplitManifest


def _select_train_ids(ids: list[str], fraction: float, rng: SplitMix64) -> set[str]:
    ids = sorted(ids)
    rng.shuffle(ids)
    n_train = math.ceil(len(ids) * fraction)
    return set(ids[:n_train])


def split_records(
    records: Sequence[PredictionRecord], spec: SplitSpec
) -> SplitResult:
    """Deterministic train/test split; the manifest depends only on
    (sorted id set, seed, fraction) — never on input order.

    With ``stratify`` the shuffle runs per (corpus, gold) cell in canonical
    cell order, drawing from one generator stream, taking ceil(n * fraction)
    of each cell.
    """
    if not records:
        raise EmptyInput("no records to split")
    ids = [r.id for r in records]
    if len(set(ids)) != len(ids):
        raise DataError("records carry duplicate ids; dedup before splitting")

    rng = SplitMix64(spec.seed)
    if spec.stratify:
        cells: dict[tuple[str, str], list[str]] = {}
        for record in records:
            cells.setdefault((record.corpus, record.gold), []).append(record.id)
        train_ids: set[str] = set()
        for key in sorted(cells, key=lambda k: (_corpus_sort_key(k[0]), k[1])):
            train_ids |= _select_train_ids(cells[key], spec.train_fraction, rng)
    else:
        train_ids = _select_train_ids(ids, spec.train_fraction, rng)

    train = [r for r in records if r.id in train_ids]
    test = [r for r in records if r.id not in train_ids]
    manifest = SplitManifest(
        seed=spec.seed,
        fraction=spec.train_fraction,
        train_ids=tuple(sorted(train_ids)),
        test_ids=tuple(sorted(set(ids) - train_ids)),
    )
    return SplitResult(train=train, test=test, manifest=manifest)


def apply_manifest(
    records: Sequence[PredictionRecord], manifest: SplitManifest
) -> tuple[list[PredictionRecord], list[PredictionRecord]]:
    """Re-create a persisted split exactly."""
    train_ids = set(manifest.train_ids)
    test_ids = set(manifest.test_ids)
    train = [r for r in records if r.id in train_ids]
    test = [r for r in records if r.id in test_ids]
    return train, test


# projection to the learning layer --------------------------------------------


def to_training_table(
    records: Sequence[PredictionRecord], model_names: Sequence[str]
) -> tuple[TrainingTable, list[ParseIssue]]:
    """Project records onto [corpus, model..., sentiment] columns.

    Records missing any named model's prediction are excluded and reported;
    complete-data learning only.
    """
    issues: list[ParseIssue] = []
    rows = []
    for record in records:
        missing = [m for m in model_names if m not in record.preds]
        if missing:
            issues.append(
                ParseIssue(
                    "missing_model_prediction",
                    f"record lacks predictions for {missing}; excluded from training",
                    record_id=record.id,
                )
            )
            continue
        rows.append(
            (
                record.corpus,
                *(record.preds[m].label for m in model_names),
                record.gold,
            )
        )
    table = TrainingTable(
        columns=(CORPUS_NODE, *model_names, SENTIMENT_NODE),
        rows=tuple(rows),
    )
    return table, issues
