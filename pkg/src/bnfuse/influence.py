"""Per-arc strength of influence from the child's conditional distributions.

For an arc parent -> child: over every configuration of the child's other
parents and every unordered pair of the parent's states, measure the distance
between the two conditional rows, then aggregate. Euclidean distance is
normalized by sqrt(2) so a deterministic flip scores exactly 1.0; Hellinger
and max-abs already live in [0, 1].
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .errors import ModelError, NoSuchArc
from .inference import evidence_probability
from .network import Network

METRICS = ("euclidean", "hellinger", "max_abs")
AGGREGATIONS = ("average", "maximum")

_SQRT2 = math.sqrt(2.0)


def _pair_distances(a: np.ndarray, b: np.ndarray, metric: str) -> np.ndarray:
    """Distance between row batches a and b, shape (n_configs, n_states) each."""
    if metric == "euclidean":
        return np.linalg.norm(a - b, axis=-1) / _SQRT2
    if metric == "hellinger":
        return np.linalg.norm(np.sqrt(a) - np.sqrt(b), axis=-1) / _SQRT2
    if metric == "max_abs":
        return np.max(np.abs(a - b), axis=-1)
    raise ModelError(f"unknown distance metric {metric!r} (choose from {METRICS})")


@dataclass(frozen=True)
class ArcInfluence:
    parent: str
    child: str
    strength: float


@dataclass(frozen=True)
class InfluenceReport:
    """All arc strengths under one (metric, aggregation) setting, sorted descending."""

    entries: tuple[ArcInfluence, ...]
    metric: str
    aggregation: str
    config_weighted: bool

    def to_dict(self) -> dict:
        return {
            "metric": self.metric,
            "aggregation": self.aggregation,
            "config_weighted": self.config_weighted,
            "entries": [
                {"parent": e.parent, "child": e.child, "strength": e.strength}
                for e in self.entries
            ],
        }

    def render_table(self) -> str:
        width = max(
            [len(f"{e.parent} -> {e.child}") for e in self.entries] + [len("Arc")]
        )
        lines = [
            f"{'Arc':<{width}}  Strength",
            f"{'-' * width}  --------",
        ]
        for e in self.entries:
            lines.append(f"{e.parent + ' -> ' + e.child:<{width}}  {e.strength:.4f}")
        return "\n".join(lines)


def _other_config_weights(
    net: Network, other_parents: tuple[str, ...]
) -> np.ndarray:
    """Marginal probability of each other-parent configuration (mixed-radix order)."""
    spaces = [net.node(p) for p in other_parents]
    weights = []
    for combo in itertools.product(*(s.states for s in spaces)):
        weights.append(
            evidence_probability(net, dict(zip(other_parents, combo)))
        )
    arr = np.array(weights, dtype=np.float64)
    total = arr.sum()
    if total <= 0.0:
        return np.full(len(arr), 1.0 / len(arr))
    return arr / total


def arc_strength(
    net: Network,
    parent: str,
    child: str,
    metric: str = "euclidean",
    agg: str = "average",
    config_weighted: bool = False,
) -> float:
    """Strength of one arc in [0, 1].

    ``agg`` is "average" (uniform over state pairs and other-parent
    configurations) or "maximum". With ``config_weighted`` the average
    weights each other-parent configuration by its marginal probability
    instead of uniformly.
    """
    if (parent, child) not in net.edges:
        raise NoSuchArc(f"no arc {parent!r} -> {child!r} in the network")
    if agg not in AGGREGATIONS:
        raise ModelError(f"unknown aggregation {agg!r} (choose from {AGGREGATIONS})")

    cpt = net.cpt(child)
    axis = cpt.parents.index(parent)
    parent_cards = [net.node(p).cardinality for p in cpt.parents]
    n_child = net.node(child).cardinality
    k = parent_cards[axis]

    # (parent state, other-parent configuration, child state)
    tensor = cpt.rows.reshape(*parent_cards, n_child)
    grouped = np.moveaxis(tensor, axis, 0).reshape(k, -1, n_child)

    if config_weighted and agg == "average":
        others = tuple(p for i, p in enumerate(cpt.parents) if i != axis)
        weights = _other_config_weights(net, others) if others else np.ones(1)
    else:
        weights = None

    per_pair = []
    for i, j in itertools.combinations(range(k), 2):
        distances = _pair_distances(grouped[i], grouped[j], metric)
        if agg == "maximum":
            per_pair.append(float(distances.max()))
        elif weights is not None:
            per_pair.append(float(np.dot(distances, weights)))
        else:
            per_pair.append(float(distances.mean()))
    if agg == "maximum":
        return max(per_pair)
    return float(np.mean(per_pair))


def influence_report(
    net: Network,
    metric: str = "euclidean",
    agg: str = "average",
    config_weighted: bool = False,
) -> InfluenceReport:
    """arc_strength for every arc, sorted descending (ties by arc name)."""
    entries = [
        ArcInfluence(
            parent=parent,
            child=child,
            strength=arc_strength(net, parent, child, metric, agg, config_weighted),
        )
        for parent, child in net.edges
    ]
    entries.sort(key=lambda e: (-e.strength, e.parent, e.child))
    return InfluenceReport(
        entries=tuple(entries),
        metric=metric,
        aggregation=agg,
        config_weighted=config_weighted,
    )
