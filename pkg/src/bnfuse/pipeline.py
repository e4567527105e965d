"""End-to-end fusion: fixed-structure network over a configured model set.

Structure: one observed corpus node, one prediction node per model, one
fused sentiment node. The corpus node parents every prediction node and the
sentiment node; every prediction node parents the sentiment node; prediction
nodes are never connected to each other, which keeps their correlations from
biasing the fusion. The corpus node carries a learned marginal prior so the
network stays a proper joint distribution, but it is always observed at
prediction time, which makes that prior inert.
"""

from __future__ import annotations

import json
from collections.abc import Mapping, Sequence
from dataclasses import dataclass
from pathlib import Path

from .errors import DataError, EmptyModelList, UnknownCorpusState
from .inference import posterior
from .learning import SmoothingConfig, fit_cpts
from .network import (
    CANONICAL_SENTIMENTS,
    Network,
    NetworkSkeleton,
    StateSpace,
    network_from_dict,
    network_to_dict,
)
from .records import (
    CORPUS_NODE,
    SENTIMENT_NODE,
    ParseIssue,
    PredictionRecord,
    SplitManifest,
    SplitResult,
    SplitSpec,
    corpus_state_order,
    split_records,
    to_training_table,
)

DEFAULT_MODELS = ("finbert", "roberta", "bertweet")


@dataclass(frozen=True)
class FusionConfig:
    model_names: tuple[str, ...] = DEFAULT_MODELS
    smoothing: SmoothingConfig = SmoothingConfig()
    split: SplitSpec = SplitSpec()
    corpus_states: tuple[str, ...] | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "model_names", tuple(self.model_names))
        if not self.model_names:
            raise EmptyModelList("at least one model is required")
        if len(set(self.model_names)) != len(self.model_names):
            raise EmptyModelList(f"duplicate model names in {self.model_names}")
        if self.corpus_states is not None:
            object.__setattr__(self, "corpus_states", tuple(self.corpus_states))


def build_fusion_structure(
    cfg: FusionConfig, corpus_states: Sequence[str]
) -> NetworkSkeleton:
    """The fixed DAG over corpus, model prediction, and sentiment nodes."""
    if len(corpus_states) < 2:
        raise DataError(
            "the corpus node needs at least 2 states; declare corpus_states "
            f"explicitly if the records cover fewer (got {list(corpus_states)})"
        )
    nodes = [
        StateSpace(CORPUS_NODE, tuple(corpus_states)),
        *(StateSpace(m, CANONICAL_SENTIMENTS) for m in cfg.model_names),
        StateSpace(SENTIMENT_NODE, CANONICAL_SENTIMENTS),
    ]
    edges = [
        *((CORPUS_NODE, m) for m in cfg.model_names),
        (CORPUS_NODE, SENTIMENT_NODE),
        *((m, SENTIMENT_NODE) for m in cfg.model_names),
    ]
    return NetworkSkeleton(tuple(nodes), tuple(edges))


@dataclass(frozen=True)
class FusionModel:
    """A fitted network plus the configuration that produced it."""

    network: Network
    model_names: tuple[str, ...]
    corpus_states: tuple[str, ...]
    alpha: float
    manifest: SplitManifest

    def to_dict(self, manifest_ref: str | None = None) -> dict:
        config: dict = {
            "model_names": list(self.model_names),
            "alpha": self.alpha,
            "corpus_states": list(self.corpus_states),
            "split": {"seed": self.manifest.seed, "fraction": self.manifest.fraction},
        }
        if manifest_ref is not None:
            config["split"]["manifest"] = manifest_ref
        return {"config": config, "network": network_to_dict(self.network)}

    def save(self, path: str | Path, manifest_path: str | Path | None = None) -> Path:
        """Write the model file; the split manifest goes to its own file
        (default: <model>.manifest.json) and is referenced from the config."""
        path = Path(path)
        if manifest_path is None:
            stem = path.name[: -len(".json")] if path.name.endswith(".json") else path.name
            manifest_path = path.with_name(stem + ".manifest.json")
        manifest_path = Path(manifest_path)
        self.manifest.save(manifest_path)
        payload = self.to_dict(manifest_ref=manifest_path.name)
        path.write_text(
            json.dumps(payload, indent=2, ensure_ascii=False) + "\n", encoding="utf-8"
        )
        return manifest_path

    @classmethod
    def from_dict(cls, payload: Mapping, manifest: SplitManifest | None = None) -> "FusionModel":
        config = payload["config"]
        if manifest is None:
            manifest = SplitManifest(
                seed=int(config["split"]["seed"]),
                fraction=float(config["split"]["fraction"]),
                train_ids=(),
                test_ids=(),
            )
        return cls(
            network=network_from_dict(payload["network"]),
            model_names=tuple(config["model_names"]),
            corpus_states=tuple(config["corpus_states"]),
            alpha=float(config["alpha"]),
            manifest=manifest,
        )

    @classmethod
    def load(cls, path: str | Path) -> "FusionModel":
        path = Path(path)
        payload = json.loads(path.read_text(encoding="utf-8"))
        manifest_ref = payload["config"]["split"].get("manifest")
        manifest = None
        if manifest_ref:
            candidate = path.parent / manifest_ref
            if candidate.exists():
                manifest = SplitManifest.load(candidate)
        return cls.from_dict(payload, manifest=manifest)


@dataclass
class FitResult:
    model: FusionModel
    split: SplitResult
    issues: list[ParseIssue]


def fit_fusion(cfg: FusionConfig, records: Sequence[PredictionRecord]) -> FitResult:
    """Split, count, and smooth: a complete fit from prediction records."""
    if not records:
        raise DataError("no records to fit on")
    corpus_states = cfg.corpus_states or corpus_state_order(
        r.corpus for r in records
    )
    unknown = sorted({r.corpus for r in records} - set(corpus_states))
    if unknown:
        raise DataError(
            f"records carry corpus tags outside the declared states: {unknown}"
        )
    split = split_records(records, cfg.split)
    skeleton = build_fusion_structure(cfg, corpus_states)
    table, issues = to_training_table(split.train, cfg.model_names)
    network = fit_cpts(skeleton, table, cfg.smoothing)
    model = FusionModel(
        network=network,
        model_names=cfg.model_names,
        corpus_states=tuple(corpus_states),
        alpha=cfg.smoothing.alpha_for(len(network.cpt(SENTIMENT_NODE).rows)),
        manifest=split.manifest,
    )
    return FitResult(model=model, split=split, issues=issues)


@dataclass(frozen=True)
class PredictionOutcome:
    id: str
    posterior: tuple[float, ...]
    label: str
    flags: tuple[str, ...] = ()

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "posterior": list(self.posterior),
            "label": self.label,
            "flags": list(self.flags),
        }


@dataclass
class BatchResult:
    outcomes: list[PredictionOutcome]
    issues: list[ParseIssue]

    def labels_by_id(self) -> dict[str, str]:
        return {o.id: o.label for o in self.outcomes}


def predict_record(
    model: FusionModel, record: PredictionRecord
) -> PredictionOutcome:
    """Posterior sentiment for one record.

    Evidence is the record's corpus tag plus every configured model's label;
    a missing model label is marginalized out rather than dropping the
    record, and flagged.
    """
    if record.corpus not in model.corpus_states:
        raise UnknownCorpusState(
            f"corpus tag {record.corpus!r} was not present at training time "
            f"(known: {list(model.corpus_states)})"
        )
    evidence: dict[str, str] = {CORPUS_NODE: record.corpus}
    flags: list[str] = []
    for name in model.model_names:
        pred = record.preds.get(name)
        if pred is None:
            flags.append(f"marginalized:{name}")
        else:
            evidence[name] = pred.label
    result = posterior(model.network, SENTIMENT_NODE, evidence)

    cpt = model.network.cpt(SENTIMENT_NODE)
    if len(evidence) == len(cpt.parents) and cpt.counts is not None:
        row = model.network.row_index(SENTIMENT_NODE, evidence)
        if int(cpt.counts[row].sum()) == 0:
            flags.append("unseen_configuration")
    return PredictionOutcome(
        id=record.id,
        posterior=result.distribution,
        label=result.argmax_state,
        flags=tuple(flags),
    )


def predict_batch(
    model: FusionModel, records: Sequence[PredictionRecord]
) -> BatchResult:
    """Predict every record; records with unknown corpus tags are reported
    in the issue list and excluded from the outcomes."""
    outcomes: list[PredictionOutcome] = []
    issues: list[ParseIssue] = []
    for record in records:
        try:
            outcomes.append(predict_record(model, record))
        except UnknownCorpusState as exc:
            issues.append(
                ParseIssue(
                    "unknown_corpus_state", str(exc), record_id=record.id
                )
            )
    return BatchResult(outcomes=outcomes, issues=issues)


def dump_outcomes(outcomes: Sequence[PredictionOutcome], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as handle:
        for outcome in outcomes:
            handle.write(json.dumps(outcome.to_dict(), ensure_ascii=False) + "\n")
