"""Shared builders and independent oracles for the test suite.

The full-joint oracle here deliberately avoids the library's enumeration
path: it walks every complete assignment with itertools, multiplies CPT
entries fetched by direct row lookup, and sums with math.fsum.
"""

from __future__ import annotations

import itertools
import math

import numpy as np
import pytest

from bnfuse.network import Cpt, Network, StateSpace, build_network, cpt_row


def make_chain() -> Network:
    """A -> B with P(A)=(0.6,0.4), P(B|A=a0)=(0.9,0.1), P(B|A=a1)=(0.2,0.8)."""
    nodes = [StateSpace("A", ("a0", "a1")), StateSpace("B", ("b0", "b1"))]
    cpts = [
        Cpt("A", (), np.array([[0.6, 0.4]])),
        Cpt("B", ("A",), np.array([[0.9, 0.1], [0.2, 0.8]])),
    ]
    return build_network(nodes, [("A", "B")], cpts)


def make_copy_network() -> Network:
    """Y is a deterministic copy of binary X."""
    nodes = [StateSpace("X", ("x0", "x1")), StateSpace("Y", ("y0", "y1"))]
    cpts = [
        Cpt("X", (), np.array([[0.5, 0.5]])),
        Cpt("Y", ("X",), np.array([[1.0, 0.0], [0.0, 1.0]])),
    ]
    return build_network(nodes, [("X", "Y")], cpts)


def random_dirichlet_rows(rng: np.random.Generator, n_rows: int, n_states: int) -> np.ndarray:
    raw = rng.gamma(shape=1.0, scale=1.0, size=(n_rows, n_states)) + 1e-3
    return raw / raw.sum(axis=1, keepdims=True)


def random_network(rng: np.random.Generator, max_nodes: int = 6, max_states: int = 4) -> Network:
    """Random DAG with random positive CPTs; nodes named n0..nk."""
    n = int(rng.integers(2, max_nodes + 1))
    cards = [int(rng.integers(2, max_states + 1)) for _ in range(n)]
    names = [f"n{i}" for i in range(n)]
    order = list(rng.permutation(n))
    edges = []
    for pos_b in range(1, n):
        for pos_a in range(pos_b):
            if rng.random() < 0.4:
                edges.append((names[order[pos_a]], names[order[pos_b]]))
    nodes = [StateSpace(names[i], tuple(f"s{j}" for j in range(cards[i]))) for i in range(n)]
    parents = {name: tuple(a for a, b in edges if b == name) for name in names}
    cpts = []
    for i, name in enumerate(names):
        n_rows = 1
        for p in parents[name]:
            n_rows *= cards[names.index(p)]
        cpts.append(Cpt(name, parents[name], random_dirichlet_rows(rng, n_rows, cards[i])))
    return build_network(nodes, edges, cpts)


def full_joint_table(net: Network) -> dict[tuple[str, ...], float]:
    """Every complete assignment mapped to its joint probability."""
    names = [s.name for s in net.nodes]
    state_lists = [s.states for s in net.nodes]
    table = {}
    for combo in itertools.product(*state_lists):
        assignment = dict(zip(names, combo))
        factors = []
        for name in names:
            row = cpt_row(net, name, assignment)
            factors.append(float(row[net.node(name).index_of(assignment[name])]))
        table[combo] = math.prod(factors)
    return table


def oracle_posterior(
    net: Network, query: str, evidence: dict[str, str]
) -> np.ndarray:
    """Posterior by filtering the full joint table; sums via math.fsum."""
    names = [s.name for s in net.nodes]
    table = full_joint_table(net)
    states = net.node(query).states
    q_pos = names.index(query)
    masses = []
    for state in states:
        rows = [
            p
            for combo, p in table.items()
            if combo[q_pos] == state
            and all(combo[names.index(k)] == v for k, v in evidence.items())
        ]
        masses.append(math.fsum(rows))
    total = math.fsum(masses)
    return np.array(masses) / total


SENTIMENTS = ("negative", "neutral", "positive")
CORPORA = ("financial_phrasebank", "tfns", "fiqa")
MODELS = ("finbert", "roberta", "bertweet")


def synthetic_home_corpus_records(
    rng: np.random.Generator,
    n_per_corpus: int,
    accuracies: dict[str, dict[str, float]] | None = None,
    home_accuracy: float = 0.9,
    away_accuracy: float = 0.55,
    with_probs: bool = False,
):
    """Records where model i is reliable on corpus i and weak elsewhere.

    Gold labels are uniform; a wrong model picks uniformly between the two
    wrong labels. ``accuracies`` may override the per-model home/away rates.
    With ``with_probs`` every prediction carries a 0.8/0.1/0.1 vector peaked
    on its label.
    """
    from bnfuse.records import Prediction, PredictionRecord

    records = []
    for c_idx, corpus in enumerate(CORPORA):
        for i in range(n_per_corpus):
            gold = SENTIMENTS[int(rng.integers(3))]
            preds = {}
            for m_idx, model in enumerate(MODELS):
                if accuracies is not None:
                    rates = accuracies[model]
                    acc = rates["home"] if m_idx == c_idx else rates["away"]
                else:
                    acc = home_accuracy if m_idx == c_idx else away_accuracy
                if rng.random() < acc:
                    label = gold
                else:
                    others = [s for s in SENTIMENTS if s != gold]
                    label = others[int(rng.integers(2))]
                probs = None
                if with_probs:
                    probs = tuple(
                        0.8 if s == label else 0.1 for s in SENTIMENTS
                    )
                preds[model] = Prediction(label=label, probs=probs)
            records.append(
                PredictionRecord(
                    id=f"{corpus}-{i:05d}", corpus=corpus, gold=gold, preds=preds
                )
            )
    return records


@pytest.fixture
def chain() -> Network:
    return make_chain()


@pytest.fixture
def copy_net() -> Network:
    return make_copy_network()


def pytest_runtest_logreport(report):
    """One PASS/FAIL line per acceptance criterion."""
    if report.when == "call" and "test_acceptance" in report.nodeid:
        name = report.nodeid.split("::")[-1]
        verdict = "PASS" if report.passed else "FAIL"
        print(f"\n[ACCEPTANCE] {name}: {verdict}")
