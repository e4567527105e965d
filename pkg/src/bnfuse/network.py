"""Discrete Bayesian networks: validated construction, CPT lookup, joint evaluation.

A network is immutable once built and safe to query from any number of
threads. CPT rows are stored dense: row index = mixed-radix encoding of the
parent state indices in declared parent order, first parent most significant
(the same layout ``numpy.reshape`` produces in C order).
"""

from __future__ import annotations

import json
from collections.abc import Mapping, Sequence
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import (
    CptMismatch,
    CycleDetected,
    DuplicateEdge,
    DuplicateNode,
    IncompleteAssignment,
    IncompleteParentConfig,
    ModelError,
    UnknownNode,
    UnknownState,
)

#: Normalization tolerance for CPT rows. All production quantities are ratios
#: of small integer counts, so anything beyond this is a construction bug.
ROW_SUM_TOLERANCE = 1e-9

#: Canonical sentiment state order; all row indexing and tie-breaking depend
#: on it staying fixed.
CANONICAL_SENTIMENTS = ("negative", "neutral", "positive")


@dataclass(frozen=True)
class StateSpace:
    """A named discrete node with an ordered, fixed tuple of state names."""

    name: str
    states: tuple[str, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "states", tuple(self.states))
        if not self.name:
            raise ModelError("node name must be non-empty")
        if len(self.states) < 2:
            raise ModelError(f"node {self.name!r} needs at least 2 states")
        if len(set(self.states)) != len(self.states):
            raise ModelError(f"node {self.name!r} has duplicate state names")

    @property
    def cardinality(self) -> int:
        return len(self.states)

    def index_of(self, state: str) -> int:
        try:
            return self.states.index(state)
        except ValueError:
            raise UnknownState(
                f"{state!r} is not a state of node {self.name!r} "
                f"(states: {', '.join(self.states)})"
            ) from None


@dataclass(frozen=True)
class NetworkSkeleton:
    """Nodes plus directed arcs, validated as a DAG; no parameters yet.

    The per-node parent order (and therefore CPT row indexing) is the order
    in which the node's incoming arcs appear in ``edges``.
    """

    nodes: tuple[StateSpace, ...]
    edges: tuple[tuple[str, str], ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "nodes", tuple(self.nodes))
        object.__setattr__(
            self, "edges", tuple((str(a), str(b)) for a, b in self.edges)
        )
        names = [n.name for n in self.nodes]
        dupes = {n for n in names if names.count(n) > 1}
        if dupes:
            raise DuplicateNode(f"duplicate node names: {sorted(dupes)}")
        declared = set(names)
        seen = set()
        for edge in self.edges:
            for end in edge:
                if end not in declared:
                    raise UnknownNode(f"edge {edge} references undeclared node {end!r}")
            if edge in seen:
                raise DuplicateEdge(f"edge {edge} declared twice")
            seen.add(edge)
        object.__setattr__(self, "_topo", self._topological_order())

    def _topological_order(self) -> tuple[str, ...]:
        # Kahn's algorithm, stable in declared node order.
        names = [n.name for n in self.nodes]
        indegree = {n: 0 for n in names}
        for _, child in self.edges:
            indegree[child] += 1
        order: list[str] = []
        ready = [n for n in names if indegree[n] == 0]
        while ready:
            node = ready.pop(0)
            order.append(node)
            for parent, child in self.edges:
                if parent == node:
                    indegree[child] -= 1
                    if indegree[child] == 0:
                        ready.append(child)
        if len(order) != len(names):
            stuck = sorted(n for n in names if n not in order)
            raise CycleDetected(f"edges contain a directed cycle through {stuck}")
        return tuple(order)

    @property
    def topo_order(self) -> tuple[str, ...]:
        return self._topo  # type: ignore[attr-defined]

    def node(self, name: str) -> StateSpace:
        for space in self.nodes:
            if space.name == name:
                return space
        raise UnknownNode(f"no node named {name!r}")

    def parents_of(self, name: str) -> tuple[str, ...]:
        self.node(name)
        return tuple(parent for parent, child in self.edges if child == name)

    def children_of(self, name: str) -> tuple[str, ...]:
        self.node(name)
        return tuple(child for parent, child in self.edges if parent == name)


@dataclass(frozen=True, eq=False)
class Cpt:
    """One node's conditional probability table.

    ``rows`` has shape (product of parent cardinalities, child cardinality),
    one row per parent configuration in mixed-radix order. ``alpha`` and
    ``counts`` are audit metadata from learning: the pseudo-count used and
    the raw integer occurrence counts behind each row.
    """

    child: str
    parents: tuple[str, ...]
    rows: np.ndarray
    alpha: float | None = None
    counts: np.ndarray | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "parents", tuple(self.parents))
        rows = np.ascontiguousarray(np.asarray(self.rows, dtype=np.float64))
        if rows.ndim != 2:
            raise CptMismatch(f"CPT rows for {self.child!r} must be 2-dimensional")
        rows.setflags(write=False)
        object.__setattr__(self, "rows", rows)
        if self.counts is not None:
            counts = np.ascontiguousarray(np.asarray(self.counts, dtype=np.int64))
            if counts.shape != rows.shape:
                raise CptMismatch(
                    f"CPT counts for {self.child!r} have shape {counts.shape}, "
                    f"expected {rows.shape}"
                )
            counts.setflags(write=False)
            object.__setattr__(self, "counts", counts)


class Network:
    """Immutable discrete Bayesian network: DAG plus one CPT per node."""

    __slots__ = ("skeleton", "cpts", "_spaces", "_cpt_by_child", "_children")

    def __init__(
        self,
        nodes: Sequence[StateSpace],
        edges: Sequence[tuple[str, str]],
        cpts: Sequence[Cpt],
    ) -> None:
        skeleton = NetworkSkeleton(tuple(nodes), tuple(edges))
        spaces = {space.name: space for space in skeleton.nodes}

        by_child: dict[str, Cpt] = {}
        for cpt in cpts:
            if cpt.child not in spaces:
                raise CptMismatch(f"CPT declared for unknown node {cpt.child!r}")
            if cpt.child in by_child:
                raise CptMismatch(f"two CPTs declared for node {cpt.child!r}")
            by_child[cpt.child] = cpt
        missing = [n.name for n in skeleton.nodes if n.name not in by_child]
        if missing:
            raise CptMismatch(f"no CPT for nodes: {missing}")

        for cpt in by_child.values():
            in_neighbors = set(skeleton.parents_of(cpt.child))
            if set(cpt.parents) != in_neighbors or len(set(cpt.parents)) != len(cpt.parents):
                raise CptMismatch(
                    f"CPT parents {cpt.parents} for {cpt.child!r} do not match "
                    f"graph in-neighbors {sorted(in_neighbors)}"
                )
            n_rows = 1
            for parent in cpt.parents:
                n_rows *= spaces[parent].cardinality
            expected = (n_rows, spaces[cpt.child].cardinality)
            if cpt.rows.shape != expected:
                raise CptMismatch(
                    f"CPT for {cpt.child!r} has shape {cpt.rows.shape}, "
                    f"expected {expected}"
                )
            if np.any(cpt.rows < 0.0):
                raise CptMismatch(f"CPT for {cpt.child!r} has negative entries")
            sums = cpt.rows.sum(axis=1)
            worst = float(np.max(np.abs(sums - 1.0))) if len(sums) else 0.0
            if worst > ROW_SUM_TOLERANCE:
                raise CptMismatch(
                    f"CPT for {cpt.child!r} has a row summing to 1{worst:+.3e}"
                )

        object.__setattr__(self, "skeleton", skeleton)
        object.__setattr__(
            self, "cpts", tuple(by_child[n.name] for n in skeleton.nodes)
        )
        object.__setattr__(self, "_spaces", spaces)
        object.__setattr__(self, "_cpt_by_child", by_child)
        object.__setattr__(
            self,
            "_children",
            {n.name: skeleton.children_of(n.name) for n in skeleton.nodes},
        )

    def __setattr__(self, name: str, value: object) -> None:
        raise AttributeError("Network is immutable")

    # structure accessors -------------------------------------------------

    @property
    def nodes(self) -> tuple[StateSpace, ...]:
        return self.skeleton.nodes

    @property
    def edges(self) -> tuple[tuple[str, str], ...]:
        return self.skeleton.edges

    @property
    def topo_order(self) -> tuple[str, ...]:
        return self.skeleton.topo_order

    def node(self, name: str) -> StateSpace:
        try:
            return self._spaces[name]
        except KeyError:
            raise UnknownNode(f"no node named {name!r}") from None

    def cpt(self, child: str) -> Cpt:
        try:
            return self._cpt_by_child[child]
        except KeyError:
            raise UnknownNode(f"no node named {child!r}") from None

    def parents_of(self, name: str) -> tuple[str, ...]:
        return self.cpt(name).parents

    def children_of(self, name: str) -> tuple[str, ...]:
        self.node(name)
        return self._children[name]

    # row addressing -------------------------------------------------------

    def row_index(self, child: str, parent_config: Mapping[str, str]) -> int:
        """Mixed-radix row index of a parent configuration.

        Extra bindings beyond the child's parents are ignored, so a full
        evidence map can be passed directly.
        """
        cpt = self.cpt(child)
        index = 0
        for parent in cpt.parents:
            if parent not in parent_config:
                raise IncompleteParentConfig(
                    f"configuration for {child!r} does not bind parent {parent!r}"
                )
            space = self._spaces[parent]
            index = index * space.cardinality + space.index_of(parent_config[parent])
        return index


def build_network(
    nodes: Sequence[StateSpace],
    edges: Sequence[tuple[str, str]],
    cpts: Sequence[Cpt],
) -> Network:
    """Validate and assemble a network; rejects rather than building partially."""
    return Network(nodes, edges, cpts)


def cpt_row(net: Network, child: str, parent_config: Mapping[str, str]) -> np.ndarray:
    """The stored, normalized probability row for one parent configuration.

    Returns a read-only view: no recomputation, bit-identical across calls.
    """
    return net.cpt(child).rows[net.row_index(child, parent_config)]


def joint_probability(net: Network, assignment: Mapping[str, str]) -> float:
    """Product over nodes of P(child state | parent states) under a full assignment."""
    missing = [n.name for n in net.nodes if n.name not in assignment]
    if missing:
        raise IncompleteAssignment(f"assignment does not bind: {missing}")
    prob = 1.0
    for space in net.nodes:
        cpt = net.cpt(space.name)
        row = cpt.rows[net.row_index(space.name, assignment)]
        prob *= float(row[space.index_of(assignment[space.name])])
    return prob


# serialization -------------------------------------------------------------


def network_to_dict(net: Network) -> dict:
    return {
        "nodes": [{"name": s.name, "states": list(s.states)} for s in net.nodes],
        "edges": [{"from": a, "to": b} for a, b in net.edges],
        "cpts": [
            {
                "child": cpt.child,
                "parents": list(cpt.parents),
                "rows": [[float(p) for p in row] for row in cpt.rows],
                "alpha": None if cpt.alpha is None else float(cpt.alpha),
                "counts": None
                if cpt.counts is None
                else [[int(c) for c in row] for row in cpt.counts],
            }
            for cpt in net.cpts
        ],
    }


def network_from_dict(payload: Mapping) -> Network:
    nodes = [
        StateSpace(entry["name"], tuple(entry["states"]))
        for entry in payload["nodes"]
    ]
    edges = [(entry["from"], entry["to"]) for entry in payload["edges"]]
    cpts = [
        Cpt(
            child=entry["child"],
            parents=tuple(entry["parents"]),
            rows=np.array(entry["rows"], dtype=np.float64),
            alpha=entry.get("alpha"),
            counts=None
            if entry.get("counts") is None
            else np.array(entry["counts"], dtype=np.int64),
        )
        for entry in payload["cpts"]
    ]
    return build_network(nodes, edges, cpts)


def network_to_json(net: Network) -> str:
    # json round-trips doubles via repr, so serialization is lossless.
    return json.dumps(network_to_dict(net), indent=2, ensure_ascii=False)


def network_from_json(text: str) -> Network:
    return network_from_dict(json.loads(text))


def save_network(net: Network, path: str | Path) -> None:
    Path(path).write_text(network_to_json(net) + "\n", encoding="utf-8")


def load_network(path: str | Path) -> Network:
    return network_from_json(Path(path).read_text(encoding="utf-8"))
