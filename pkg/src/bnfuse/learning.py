"""CPT parameter estimation from complete records with additive smoothing.

Counting is a commutative-monoid fold: shards may be counted independently
and merged with :func:`merge_counts`; counts stay exact integers and become
probabilities only at row finalization, so fit-on-merged equals
fit-on-concatenated bit for bit.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import (
    EmptyTrainingTable,
    ModelError,
    StructureMismatch,
    UnknownStateValue,
)
from .network import Cpt, Network, NetworkSkeleton, build_network


@dataclass(frozen=True)
class TrainingTable:
    """Complete state assignments, one row per training record."""

    columns: tuple[str, ...]
    rows: tuple[tuple[str, ...], ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "columns", tuple(self.columns))
        object.__setattr__(self, "rows", tuple(tuple(r) for r in self.rows))
        if len(set(self.columns)) != len(self.columns):
            raise StructureMismatch("training table has duplicate columns")
        width = len(self.columns)
        for i, row in enumerate(self.rows):
            if len(row) != width:
                raise StructureMismatch(
                    f"row {i} has {len(row)} cells, expected {width}"
                )

    def __len__(self) -> int:
        return len(self.rows)

    def column(self, name: str) -> tuple[str, ...]:
        idx = self.columns.index(name)
        return tuple(row[idx] for row in self.rows)


@dataclass(frozen=True)
class SmoothingConfig:
    """Additive (pseudo-count) smoothing settings.

    ``alpha`` is the pseudo-count added to every (row, child-state) cell.
    When ``equivalent_sample_size`` is set it overrides ``alpha`` per node
    as ESS / row-count, spreading a fixed total pseudo-mass over the table.
    """

    alpha: float = 1.0
    equivalent_sample_size: float | None = None

    def __post_init__(self) -> None:
        if not self.alpha > 0:
            raise ModelError(f"alpha must be > 0, got {self.alpha}")
        if self.equivalent_sample_size is not None and not self.equivalent_sample_size > 0:
            raise ModelError(
                f"equivalent_sample_size must be > 0, got {self.equivalent_sample_size}"
            )

    def alpha_for(self, n_rows: int) -> float:
        if self.equivalent_sample_size is not None:
            return self.equivalent_sample_size / n_rows
        return self.alpha


@dataclass(eq=False)
class CountTable:
    """Raw occurrence counts per node, addressed like the node's CPT rows."""

    skeleton: NetworkSkeleton
    counts: dict[str, np.ndarray] = field(default_factory=dict)

    @classmethod
    def zeros(cls, skeleton: NetworkSkeleton) -> "CountTable":
        counts = {}
        for space in skeleton.nodes:
            n_rows = 1
            for parent in skeleton.parents_of(space.name):
                n_rows *= skeleton.node(parent).cardinality
            counts[space.name] = np.zeros((n_rows, space.cardinality), dtype=np.int64)
        return cls(skeleton=skeleton, counts=counts)

    @property
    def total_records(self) -> int:
        # every record increments exactly one cell per node
        first = self.skeleton.nodes[0].name
        return int(self.counts[first].sum())


def count_records(skeleton: NetworkSkeleton, data: TrainingTable) -> CountTable:
    """Tally (parent configuration, child state) occurrences for every node."""
    if len(data) == 0:
        raise EmptyTrainingTable("training table has no rows")
    missing = [s.name for s in skeleton.nodes if s.name not in data.columns]
    if missing:
        raise StructureMismatch(f"training table lacks columns for nodes: {missing}")

    # map state names to index vectors once per node
    state_indices: dict[str, np.ndarray] = {}
    for space in skeleton.nodes:
        lookup = {state: i for i, state in enumerate(space.states)}
        values = data.column(space.name)
        try:
            state_indices[space.name] = np.array(
                [lookup[v] for v in values], dtype=np.int64
            )
        except KeyError as exc:
            raise UnknownStateValue(
                f"{exc.args[0]!r} is not a state of node {space.name!r}"
            ) from None

    table = CountTable.zeros(skeleton)
    for space in skeleton.nodes:
        row_idx = np.zeros(len(data), dtype=np.int64)
        for parent in skeleton.parents_of(space.name):
            row_idx = row_idx * skeleton.node(parent).cardinality + state_indices[parent]
        np.add.at(table.counts[space.name], (row_idx, state_indices[space.name]), 1)
    return table


def merge_counts(partial_a: CountTable, partial_b: CountTable) -> CountTable:
    """Cell-wise sum of two count tables over the same structure."""
    if partial_a.skeleton != partial_b.skeleton:
        raise StructureMismatch("count tables address different structures")
    merged = CountTable.zeros(partial_a.skeleton)
    for name, grid in merged.counts.items():
        np.add(partial_a.counts[name], partial_b.counts[name], out=grid)
    return merged


def finalize_cpts(table: CountTable, cfg: SmoothingConfig = SmoothingConfig()) -> Network:
    """Turn exact counts into smoothed probability rows.

    For node Y with parents Z: P(y|z) = (count(y,z) + a) / (count(z) + a*|Y|).
    Smoothing guarantees a defined row for every configuration.
    """
    skeleton = table.skeleton
    cpts = []
    for space in skeleton.nodes:
        counts = table.counts[space.name]
        alpha = cfg.alpha_for(counts.shape[0])
        smoothed = counts.astype(np.float64) + alpha
        rows = smoothed / smoothed.sum(axis=1, keepdims=True)
        cpts.append(
            Cpt(
                child=space.name,
                parents=skeleton.parents_of(space.name),
                rows=rows,
                alpha=alpha,
                counts=counts,
            )
        )
    return build_network(skeleton.nodes, skeleton.edges, cpts)


def fit_cpts(
    structure: NetworkSkeleton,
    data: TrainingTable,
    cfg: SmoothingConfig = SmoothingConfig(),
) -> Network:
    """Estimate every CPT of a fixed structure from complete labeled records."""
    return finalize_cpts(count_records(structure, data), cfg)
