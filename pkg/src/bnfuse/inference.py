"""Exact posterior computation by enumeration over unobserved nodes.

Enumeration is trivially correct at this scale (the fusion network leaves at
most a handful of nodes unobserved) and doubles as a reference
implementation; a faster engine could replace it behind the same contract.
"""

from __future__ import annotations

import itertools
from collections.abc import Mapping
from dataclasses import dataclass

import numpy as np

from .errors import InconsistentEvidence, QueryBoundInEvidence, UnknownState
from .network import Network


@dataclass(frozen=True)
class Posterior:
    """Normalized distribution over a query node's states, given evidence."""

    node: str
    states: tuple[str, ...]
    distribution: tuple[float, ...]
    evidence: dict[str, str]

    def probability(self, state: str) -> float:
        try:
            return self.distribution[self.states.index(state)]
        except ValueError:
            raise UnknownState(f"{state!r} is not a state of {self.node!r}") from None

    @property
    def argmax_state(self) -> str:
        # ties break to the first maximal state in canonical order
        return self.states[int(np.argmax(self.distribution))]


def _validate_evidence(net: Network, evidence: Mapping[str, str]) -> None:
    for name, state in evidence.items():
        net.node(name).index_of(state)


def _sum_joint_by_query(
    net: Network, evidence: Mapping[str, str], query: str
) -> np.ndarray:
    """Unnormalized P(query=q, evidence) for every q, by full enumeration."""
    spaces = {s.name: s for s in net.nodes}
    unbound = [n for n in net.topo_order if n not in evidence and n != query]
    query_space = spaces[query]
    totals = np.zeros(query_space.cardinality, dtype=np.float64)

    # state-index lookups and per-node factor metadata, resolved once
    index_of = {
        s.name: {st: i for i, st in enumerate(s.states)} for s in net.nodes
    }
    cards = {s.name: s.cardinality for s in net.nodes}
    node_meta = [(s.name, net.cpt(s.name)) for s in net.nodes]

    assignment: dict[str, int] = {
        name: index_of[name][state] for name, state in evidence.items()
    }
    index_lists = [range(cards[n]) for n in unbound]
    for q_idx in range(query_space.cardinality):
        assignment[query] = q_idx
        subtotal = 0.0
        for combo in itertools.product(*index_lists):
            for name, state_idx in zip(unbound, combo):
                assignment[name] = state_idx
            prob = 1.0
            for name, cpt in node_meta:
                row = 0
                for parent in cpt.parents:
                    row = row * cards[parent] + assignment[parent]
                prob *= float(cpt.rows[row, assignment[name]])
                if prob == 0.0:
                    break
            subtotal += prob
        totals[q_idx] = subtotal
    return totals


def evidence_probability(net: Network, evidence: Mapping[str, str]) -> float:
    """Prior probability of a partial assignment, summed over completions."""
    _validate_evidence(net, evidence)
    if not evidence:
        return 1.0
    # reuse the enumeration with an arbitrary bound node acting as query
    name = next(iter(evidence))
    rest = {k: v for k, v in evidence.items() if k != name}
    totals = _sum_joint_by_query(net, rest, name)
    return float(totals[net.node(name).index_of(evidence[name])])


def posterior(net: Network, query: str, evidence: Mapping[str, str]) -> Posterior:
    """P(query | evidence) by exact enumeration.

    When the query is a sink and the evidence binds all its parents, the
    stored CPT row is returned exactly (bitwise), which is the normal path
    for fused sentiment prediction.
    """
    space = net.node(query)
    if query in evidence:
        raise QueryBoundInEvidence(f"query node {query!r} is bound in the evidence")
    _validate_evidence(net, evidence)

    totals = _sum_joint_by_query(net, evidence, query)
    mass = float(totals.sum())
    if mass == 0.0:
        raise InconsistentEvidence(
            f"evidence {dict(evidence)} has probability 0 under the network"
        )

    cpt = net.cpt(query)
    if not net.children_of(query) and all(p in evidence for p in cpt.parents):
        row = cpt.rows[net.row_index(query, evidence)]
        distribution = tuple(float(p) for p in row)
    else:
        distribution = tuple(float(p) for p in totals / mass)
    return Posterior(
        node=query,
        states=space.states,
        distribution=distribution,
        evidence=dict(evidence),
    )


def predict_label(
    net: Network, evidence: Mapping[str, str], query: str = "sentiment"
) -> str:
    """Argmax state of the posterior, ties broken by canonical state order."""
    return posterior(net, query, evidence).argmax_state
