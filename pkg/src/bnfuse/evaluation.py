"""Classification metrics, agreement analysis, and ensemble baselines.

Zero-denominator convention throughout: precision/recall/F1 are 0 with a
report flag, never an exception, since small corpora can leave a class
empty on either side of the confusion matrix.
"""

from __future__ import annotations

import csv
import io
from collections.abc import Mapping, Sequence
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    DataError,
    DegenerateMarginals,
    EmptyInput,
    LengthMismatch,
    MissingFallbackPrediction,
    MissingProbabilities,
)
from .network import CANONICAL_SENTIMENTS


@dataclass(frozen=True, eq=False)
class ConfusionMatrix:
    """Integer count grid, rows = gold, columns = predicted."""

    labels: tuple[str, ...]
    counts: np.ndarray

    def __post_init__(self) -> None:
        counts = np.ascontiguousarray(np.asarray(self.counts, dtype=np.int64))
        counts.setflags(write=False)
        object.__setattr__(self, "counts", counts)

    @property
    def total(self) -> int:
        return int(self.counts.sum())

    def count(self, gold: str, pred: str) -> int:
        return int(self.counts[self.labels.index(gold), self.labels.index(pred)])


def confusion(
    gold: Sequence[str],
    pred: Sequence[str],
    labels: tuple[str, ...] = CANONICAL_SENTIMENTS,
) -> ConfusionMatrix:
    if len(gold) != len(pred):
        raise LengthMismatch(f"gold has {len(gold)} labels, pred has {len(pred)}")
    if not gold:
        raise EmptyInput("cannot build a confusion matrix from zero records")
    index = {label: i for i, label in enumerate(labels)}
    counts = np.zeros((len(labels), len(labels)), dtype=np.int64)
    for g, p in zip(gold, pred):
        if g not in index or p not in index:
            raise DataError(f"label outside {labels}: gold={g!r} pred={p!r}")
        counts[index[g], index[p]] += 1
    return ConfusionMatrix(labels=labels, counts=counts)


@dataclass(frozen=True)
class ClassMetrics:
    precision: float
    recall: float
    f1: float
    support: int


@dataclass(frozen=True)
class MetricsResult:
    accuracy: float
    macro_f1: float
    weighted_f1: float
    per_class: dict[str, ClassMetrics]
    zero_division_flags: tuple[str, ...]

    def to_dict(self) -> dict:
        return {
            "accuracy": self.accuracy,
            "macro_f1": self.macro_f1,
            "weighted_f1": self.weighted_f1,
            "per_class": {
                label: {
                    "precision": m.precision,
                    "recall": m.recall,
                    "f1": m.f1,
                    "support": m.support,
                }
                for label, m in self.per_class.items()
            },
            "zero_division_flags": list(self.zero_division_flags),
        }


def metrics(cm: ConfusionMatrix) -> MetricsResult:
    """Accuracy, macro/weighted F1, and per-class precision/recall/F1."""
    total = cm.total
    if total == 0:
        raise EmptyInput("confusion matrix is empty")
    counts = cm.counts
    flags: list[str] = []
    per_class: dict[str, ClassMetrics] = {}
    f1s, supports = [], []
    for i, label in enumerate(cm.labels):
        tp = int(counts[i, i])
        predicted = int(counts[:, i].sum())
        support = int(counts[i, :].sum())
        if predicted == 0:
            precision = 0.0
            flags.append(f"precision:{label}")
        else:
            precision = tp / predicted
        if support == 0:
            recall = 0.0
            flags.append(f"recall:{label}")
        else:
            recall = tp / support
        if precision + recall == 0.0:
            f1 = 0.0
            flags.append(f"f1:{label}")
        else:
            f1 = 2.0 * precision * recall / (precision + recall)
        per_class[label] = ClassMetrics(
            precision=precision, recall=recall, f1=f1, support=support
        )
        f1s.append(f1)
        supports.append(support)
    accuracy = float(np.trace(counts)) / total
    macro_f1 = float(sum(f1s) / len(f1s))
    weighted_f1 = float(
        sum(f * s for f, s in zip(f1s, supports)) / total
    )
    return MetricsResult(
        accuracy=accuracy,
        macro_f1=macro_f1,
        weighted_f1=weighted_f1,
        per_class=per_class,
        zero_division_flags=tuple(flags),
    )


def pairwise_agreement(a: Sequence[str], b: Sequence[str]) -> float:
    """Proportion of positions where the two label vectors match."""
    if len(a) != len(b):
        raise LengthMismatch(f"vectors of length {len(a)} and {len(b)}")
    if not a:
        raise EmptyInput("cannot compute agreement on zero records")
    return sum(1 for x, y in zip(a, b) if x == y) / len(a)


def cohen_kappa(a: Sequence[str], b: Sequence[str]) -> float:
    """Chance-corrected agreement: (p_o - p_e) / (1 - p_e)."""
    if len(a) != len(b):
        raise LengthMismatch(f"vectors of length {len(a)} and {len(b)}")
    if not a:
        raise EmptyInput("cannot compute kappa on zero records")
    n = len(a)
    p_o = sum(1 for x, y in zip(a, b) if x == y) / n
    labels = sorted(set(a) | set(b))
    p_e = sum(
        (sum(1 for x in a if x == label) / n) * (sum(1 for y in b if y == label) / n)
        for label in labels
    )
    if p_e == 1.0:
        if p_o == 1.0:
            return 1.0
        raise DegenerateMarginals(
            "expected agreement is 1 with observed disagreement; kappa undefined"
        )
    return (p_o - p_e) / (1.0 - p_e)


# ensemble baselines -----------------------------------------------------------


def majority_vote(preds: Mapping[str, str], fallback_model: str) -> str:
    """Label predicted by at least two models; the fallback model's label
    when no label reaches two votes (or the vote is tied)."""
    if fallback_model not in preds:
        raise MissingFallbackPrediction(
            f"fallback model {fallback_model!r} has no prediction"
        )
    if len(preds) < 2:
        raise DataError("majority voting needs at least 2 model predictions")
    votes: dict[str, int] = {}
    for label in preds.values():
        votes[label] = votes.get(label, 0) + 1
    best = max(votes.values())
    winners = [label for label, n in votes.items() if n == best]
    if best >= 2 and len(winners) == 1:
        return winners[0]
    return preds[fallback_model]


def probability_average(
    preds: Mapping[str, Sequence[float] | None],
) -> tuple[tuple[float, float, float], str]:
    """Arithmetic mean of class probabilities and its argmax label
    (canonical-order tie-break). Every participating model must supply a
    vector; imputation would conflate this baseline with majority voting."""
    if not preds:
        raise MissingProbabilities("no probability vectors supplied")
    missing = sorted(name for name, p in preds.items() if p is None)
    if missing:
        raise MissingProbabilities(f"models without probabilities: {missing}")
    stacked = np.array([list(p) for p in preds.values()], dtype=np.float64)
    if stacked.shape[1] != len(CANONICAL_SENTIMENTS):
        raise DataError("probability vectors must have 3 entries")
    mean = stacked.mean(axis=0)
    label = CANONICAL_SENTIMENTS[int(np.argmax(mean))]
    return (float(mean[0]), float(mean[1]), float(mean[2])), label


# combined report ---------------------------------------------------------------


@dataclass(frozen=True)
class SourceEvaluation:
    metrics: MetricsResult
    evaluated: int
    excluded: int


@dataclass(frozen=True)
class EvaluationReport:
    """Per-source metrics over one gold vector, with per-corpus breakdowns,
    a pairwise agreement matrix, and a Cohen's kappa matrix.

    A source's label vector may hold None where that source abstained
    (e.g. the averaging baseline without probabilities); such records are
    excluded from its metrics and from pairwise comparisons involving it.
    """

    sources: tuple[str, ...]
    overall: dict[str, SourceEvaluation]
    per_corpus: dict[str, dict[str, SourceEvaluation]]
    agreement: np.ndarray = field(repr=False)
    kappa: np.ndarray = field(repr=False)
    mean_agreement: dict[str, float] = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "sources": list(self.sources),
            "overall": {
                name: {
                    **ev.metrics.to_dict(),
                    "evaluated": ev.evaluated,
                    "excluded": ev.excluded,
                }
                for name, ev in self.overall.items()
            },
            "per_corpus": {
                corpus: {
                    name: {
                        **ev.metrics.to_dict(),
                        "evaluated": ev.evaluated,
                        "excluded": ev.excluded,
                    }
                    for name, ev in by_source.items()
                }
                for corpus, by_source in self.per_corpus.items()
            },
            "agreement": [[float(v) for v in row] for row in self.agreement],
            "kappa": [[float(v) for v in row] for row in self.kappa],
            "mean_agreement": dict(self.mean_agreement),
        }


def _evaluate_subset(
    gold: Sequence[str], labels: Sequence[str | None]
) -> SourceEvaluation | None:
    pairs = [(g, p) for g, p in zip(gold, labels) if p is not None]
    if not pairs:
        return None
    result = metrics(confusion([g for g, _ in pairs], [p for _, p in pairs]))
    return SourceEvaluation(
        metrics=result, evaluated=len(pairs), excluded=len(gold) - len(pairs)
    )


def build_report(
    gold: Sequence[str],
    sources: Mapping[str, Sequence[str | None]],
    corpora: Sequence[str] | None = None,
) -> EvaluationReport:
    """Evaluate several prediction sources against one gold vector.

    ``corpora``, when given, must align with ``gold`` and adds per-corpus
    breakdowns of every source.
    """
    if not gold:
        raise EmptyInput("no records to evaluate")
    names = tuple(sources)
    for name in names:
        if len(sources[name]) != len(gold):
            raise LengthMismatch(
                f"source {name!r} has {len(sources[name])} labels, "
                f"gold has {len(gold)}"
            )
    if corpora is not None and len(corpora) != len(gold):
        raise LengthMismatch("corpora vector must align with gold")

    overall = {}
    for name in names:
        evaluated = _evaluate_subset(gold, sources[name])
        if evaluated is None:
            raise EmptyInput(f"source {name!r} has no evaluable records")
        overall[name] = evaluated

    per_corpus: dict[str, dict[str, SourceEvaluation]] = {}
    if corpora is not None:
        from .records import corpus_state_order

        for corpus in corpus_state_order(corpora):
            mask = [c == corpus for c in corpora]
            gold_c = [g for g, m in zip(gold, mask) if m]
            by_source = {}
            for name in names:
                labels_c = [p for p, m in zip(sources[name], mask) if m]
                evaluated = _evaluate_subset(gold_c, labels_c)
                if evaluated is not None:
                    by_source[name] = evaluated
            per_corpus[corpus] = by_source

    k = len(names)
    agreement = np.eye(k)
    kappa = np.eye(k)
    for i in range(k):
        for j in range(i + 1, k):
            paired = [
                (x, y)
                for x, y in zip(sources[names[i]], sources[names[j]])
                if x is not None and y is not None
            ]
            if paired:
                xs = [x for x, _ in paired]
                ys = [y for _, y in paired]
                agreement[i, j] = agreement[j, i] = pairwise_agreement(xs, ys)
                try:
                    kappa[i, j] = kappa[j, i] = cohen_kappa(xs, ys)
                except DegenerateMarginals:
                    kappa[i, j] = kappa[j, i] = float("nan")
    mean_agreement = {
        names[i]: float(
            (agreement[i].sum() - agreement[i, i]) / (k - 1)
        ) if k > 1 else 1.0
        for i in range(k)
    }
    return EvaluationReport(
        sources=names,
        overall=overall,
        per_corpus=per_corpus,
        agreement=agreement,
        kappa=kappa,
        mean_agreement=mean_agreement,
    )


# rendering ---------------------------------------------------------------------


def _fmt(value: float) -> str:
    return f"{value:.4f}"


def render_overall_table(report: EvaluationReport) -> str:
    width = max([len(s) for s in report.sources] + [len("Source")])
    lines = [
        f"{'Source':<{width}}  Accuracy  Macro-F1  Weighted-F1  Evaluated",
        f"{'-' * width}  --------  --------  -----------  ---------",
    ]
    for name in report.sources:
        ev = report.overall[name]
        m = ev.metrics
        lines.append(
            f"{name:<{width}}  {_fmt(m.accuracy):>8}  {_fmt(m.macro_f1):>8}  "
            f"{_fmt(m.weighted_f1):>11}  {ev.evaluated:>9}"
        )
    return "\n".join(lines)


def render_per_class_table(report: EvaluationReport) -> str:
    width = max([len(s) for s in report.sources] + [len("Source")])
    header = f"{'Source':<{width}}"
    for label in CANONICAL_SENTIMENTS:
        header += f"  {label[:3].upper()}-P  {label[:3].upper()}-R  {label[:3].upper()}-F1"
    lines = [header, "-" * len(header)]
    for name in report.sources:
        m = report.overall[name].metrics
        row = f"{name:<{width}}"
        for label in CANONICAL_SENTIMENTS:
            c = m.per_class[label]
            row += f"  {c.precision:.3f}  {c.recall:.3f}  {c.f1:.4f}"
        lines.append(row)
    return "\n".join(lines)


def render_per_corpus_table(report: EvaluationReport) -> str:
    if not report.per_corpus:
        return "(no per-corpus breakdown)"
    width = max([len(s) for s in report.sources] + [len("Source")])
    cwidth = max(len(c) for c in report.per_corpus)
    lines = [
        f"{'Corpus':<{cwidth}}  {'Source':<{width}}  Accuracy  Macro-F1  Weighted-F1",
        f"{'-' * cwidth}  {'-' * width}  --------  --------  -----------",
    ]
    for corpus, by_source in report.per_corpus.items():
        for name in report.sources:
            if name not in by_source:
                continue
            m = by_source[name].metrics
            lines.append(
                f"{corpus:<{cwidth}}  {name:<{width}}  {_fmt(m.accuracy):>8}  "
                f"{_fmt(m.macro_f1):>8}  {_fmt(m.weighted_f1):>11}"
            )
    return "\n".join(lines)


def render_agreement_table(report: EvaluationReport) -> str:
    names = report.sources
    width = max(len(n) for n in names)
    cell = max(width, 14)
    header = f"{'Source':<{width}}  " + "  ".join(f"{n:>{cell}}" for n in names)
    header += f"  {'Mean':>6}"
    lines = [header, "-" * len(header)]
    for i, name in enumerate(names):
        cells = []
        for j in range(len(names)):
            if i == j:
                cells.append(f"{'1.000':>{cell}}")
            else:
                kappa = report.kappa[i, j]
                cells.append(
                    f"{report.agreement[i, j]:.3f} ({kappa:.3f})".rjust(cell)
                )
        lines.append(
            f"{name:<{width}}  "
            + "  ".join(cells)
            + f"  {report.mean_agreement[name]:.3f}"
        )
    return "\n".join(lines)


def overall_table_csv(report: EvaluationReport) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer)
    writer.writerow(["source", "accuracy", "macro_f1", "weighted_f1", "evaluated"])
    for name in report.sources:
        ev = report.overall[name]
        writer.writerow(
            [name, ev.metrics.accuracy, ev.metrics.macro_f1,
             ev.metrics.weighted_f1, ev.evaluated]
        )
    return buffer.getvalue()


def agreement_csv(report: EvaluationReport) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer)
    writer.writerow(["source", *report.sources, "mean"])
    for i, name in enumerate(report.sources):
        writer.writerow(
            [name, *[float(v) for v in report.agreement[i]],
             report.mean_agreement[name]]
        )
    return buffer.getvalue()
