"""Metrics, agreement, kappa, and ensemble baselines against fraction oracles."""

import itertools
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bnfuse.errors import (
    DegenerateMarginals,
    EmptyInput,
    LengthMismatch,
    MissingFallbackPrediction,
    MissingProbabilities,
)
from bnfuse.evaluation import (
    build_report,
    cohen_kappa,
    confusion,
    majority_vote,
    metrics,
    pairwise_agreement,
    probability_average,
)
from bnfuse.network import CANONICAL_SENTIMENTS

NEG, NEU, POS = CANONICAL_SENTIMENTS

labels_strategy = st.lists(
    st.sampled_from(CANONICAL_SENTIMENTS), min_size=1, max_size=60
)


def fraction_metrics(gold, pred):
    """Independent oracle: exact rational per-class metrics."""
    per_class = {}
    for label in CANONICAL_SENTIMENTS:
        tp = sum(1 for g, p in zip(gold, pred) if g == label and p == label)
        fp = sum(1 for g, p in zip(gold, pred) if g != label and p == label)
        fn = sum(1 for g, p in zip(gold, pred) if g == label and p != label)
        precision = Fraction(tp, tp + fp) if tp + fp else Fraction(0)
        recall = Fraction(tp, tp + fn) if tp + fn else Fraction(0)
        f1 = (
            2 * precision * recall / (precision + recall)
            if precision + recall
            else Fraction(0)
        )
        per_class[label] = (precision, recall, f1, tp + fn)
    accuracy = Fraction(sum(1 for g, p in zip(gold, pred) if g == p), len(gold))
    macro = sum(v[2] for v in per_class.values()) / Fraction(3)
    weighted = sum(v[2] * v[3] for v in per_class.values()) / Fraction(len(gold))
    return accuracy, macro, weighted, per_class


class TestConfusion:
    def test_direct_count_example(self):
        gold = [NEG, NEG, NEU, POS]
        pred = [NEG, NEU, NEU, POS]
        cm = confusion(gold, pred)
        assert cm.count(NEG, NEG) == 1
        assert cm.count(NEG, NEU) == 1
        assert cm.count(NEU, NEU) == 1
        assert cm.count(POS, POS) == 1
        assert cm.total == 4

    def test_identical_vectors_are_diagonal(self):
        gold = [NEG, NEU, POS, POS]
        cm = confusion(gold, gold)
        assert np.trace(cm.counts) == 4

    def test_total_miss_single_cell(self):
        cm = confusion([NEG] * 5, [POS] * 5)
        assert cm.count(NEG, POS) == 5
        assert np.trace(cm.counts) == 0

    def test_length_mismatch(self):
        with pytest.raises(LengthMismatch):
            confusion([NEG], [NEG, POS])

    def test_empty_input(self):
        with pytest.raises(EmptyInput):
            confusion([], [])


class TestMetrics:
    def test_hand_derived_example_against_fraction_oracle(self):
        gold = [NEG, NEG, NEU, POS]
        pred = [NEG, NEU, NEU, POS]
        result = metrics(confusion(gold, pred))
        accuracy, macro, weighted, per_class = fraction_metrics(gold, pred)
        assert result.accuracy == float(accuracy) == 0.75
        assert result.macro_f1 == pytest.approx(float(macro), abs=1e-12)
        assert result.weighted_f1 == pytest.approx(float(weighted), abs=1e-12)
        assert round(result.macro_f1, 4) == 0.7778
        assert round(result.weighted_f1, 4) == 0.75
        assert result.per_class[NEG].f1 == pytest.approx(2 / 3, abs=1e-12)
        assert result.per_class[NEU].f1 == pytest.approx(2 / 3, abs=1e-12)
        assert result.per_class[POS].f1 == 1.0

    def test_perfect_predictions(self):
        gold = [NEG, NEU, POS] * 4
        result = metrics(confusion(gold, gold))
        assert result.accuracy == 1.0
        assert result.macro_f1 == 1.0
        assert result.weighted_f1 == 1.0

    def test_absent_class_zero_with_flag(self):
        gold = [NEG, NEG, POS, POS]
        pred = [NEG, NEG, POS, POS]
        result = metrics(confusion(gold, pred))
        assert result.per_class[NEU].f1 == 0.0
        assert "precision:neutral" in result.zero_division_flags
        assert "recall:neutral" in result.zero_division_flags
        assert "f1:neutral" in result.zero_division_flags

    @given(labels_strategy)
    @settings(max_examples=60, deadline=None)
    def test_accuracy_is_support_weighted_recall(self, gold):
        rng = np.random.default_rng(len(gold))
        pred = [CANONICAL_SENTIMENTS[rng.integers(3)] for _ in gold]
        result = metrics(confusion(gold, pred))
        weighted_recall = sum(
            cm.recall * cm.support for cm in result.per_class.values()
        ) / len(gold)
        assert result.accuracy == pytest.approx(weighted_recall, abs=1e-12)

    @given(labels_strategy)
    @settings(max_examples=60, deadline=None)
    def test_macro_is_unweighted_mean_and_weighted_in_range(self, gold):
        rng = np.random.default_rng(len(gold) + 1)
        pred = [CANONICAL_SENTIMENTS[rng.integers(3)] for _ in gold]
        result = metrics(confusion(gold, pred))
        f1s = [cm.f1 for cm in result.per_class.values()]
        assert result.macro_f1 == pytest.approx(sum(f1s) / 3, abs=1e-12)
        present = [
            cm.f1 for cm in result.per_class.values() if cm.support > 0
        ]
        assert min(present) - 1e-12 <= result.weighted_f1 <= max(present) + 1e-12


class TestAgreement:
    def test_identical_is_one(self):
        assert pairwise_agreement([NEG, POS], [NEG, POS]) == 1.0

    def test_three_of_four(self):
        a = [NEG, NEG, POS, POS]
        b = [NEG, POS, POS, POS]
        assert pairwise_agreement(a, b) == 0.75

    def test_disjoint_is_zero(self):
        assert pairwise_agreement([NEG, NEG], [POS, NEU]) == 0.0

    @given(labels_strategy)
    @settings(max_examples=40, deadline=None)
    def test_symmetry(self, a):
        rng = np.random.default_rng(7)
        b = [CANONICAL_SENTIMENTS[rng.integers(3)] for _ in a]
        assert pairwise_agreement(a, b) == pairwise_agreement(b, a)


class TestCohenKappa:
    def test_identical_vectors(self):
        assert cohen_kappa([NEG, POS, NEU], [NEG, POS, NEU]) == 1.0

    def test_hand_derived_marginals(self):
        # p_o = 0.75, p_e = 0.5*0.25 + 0.5*0.75 = 0.5 -> kappa = 0.5
        a = [NEG, NEG, POS, POS]
        b = [NEG, POS, POS, POS]
        assert cohen_kappa(a, b) == 0.5

    def test_constant_identical_vectors(self):
        assert cohen_kappa([NEG, NEG], [NEG, NEG]) == 1.0

    def test_constant_rater_against_mixed_rater_is_zero(self):
        # p_o = 0.5, p_e = 1.0*0.5 + 0.0*0.5 = 0.5 -> kappa = 0; the
        # p_e == 1 with p_o < 1 guard is unreachable for marginals of the
        # same vectors (p_e = 1 forces both vectors constant and equal)
        assert cohen_kappa([NEG, NEG], [NEG, POS]) == 0.0

    def test_length_mismatch(self):
        with pytest.raises(LengthMismatch):
            cohen_kappa([NEG], [NEG, NEG])

    @given(labels_strategy)
    @settings(max_examples=40, deadline=None)
    def test_kappa_at_most_observed_agreement(self, a):
        rng = np.random.default_rng(11)
        b = [CANONICAL_SENTIMENTS[rng.integers(3)] for _ in a]
        p_o = pairwise_agreement(a, b)
        try:
            kappa = cohen_kappa(a, b)
        except DegenerateMarginals:
            return
        assert kappa <= p_o + 1e-12
        assert kappa <= 1.0 + 1e-12
        assert kappa == pytest.approx(cohen_kappa(b, a), abs=1e-12)


class TestMajorityVote:
    def test_two_of_three(self):
        assert majority_vote(
            {"finbert": NEG, "roberta": NEG, "bertweet": POS}, "finbert"
        ) == NEG

    def test_full_disagreement_uses_fallback(self):
        preds = {"finbert": NEG, "roberta": NEU, "bertweet": POS}
        assert majority_vote(preds, "finbert") == NEG
        assert majority_vote(preds, "roberta") == NEU

    def test_unanimity(self):
        assert majority_vote(
            {"finbert": POS, "roberta": POS, "bertweet": POS}, "finbert"
        ) == POS

    def test_missing_fallback_rejected(self):
        with pytest.raises(MissingFallbackPrediction):
            majority_vote({"roberta": NEG, "bertweet": NEG}, "finbert")

    def test_exhaustive_27_combinations(self):
        models = ("finbert", "roberta", "bertweet")
        disagreements = 0
        for combo in itertools.product(CANONICAL_SENTIMENTS, repeat=3):
            preds = dict(zip(models, combo))
            result = majority_vote(preds, "finbert")
            counts = {label: combo.count(label) for label in set(combo)}
            if max(counts.values()) >= 2:
                expected = max(counts, key=counts.get)
                assert result == expected
            else:
                disagreements += 1
                assert result == preds["finbert"]
        assert disagreements == 6

    def test_permutation_invariance_in_non_fallback_models(self):
        for combo in itertools.product(CANONICAL_SENTIMENTS, repeat=3):
            base = majority_vote(
                {"f": combo[0], "a": combo[1], "b": combo[2]}, "f"
            )
            swapped = majority_vote(
                {"f": combo[0], "b": combo[2], "a": combo[1]}, "f"
            )
            assert base == swapped


class TestProbabilityAverage:
    def test_column_means_by_hand(self):
        mean, label = probability_average(
            {
                "finbert": (0.6, 0.3, 0.1),
                "roberta": (0.2, 0.5, 0.3),
                "bertweet": (0.1, 0.6, 0.3),
            }
        )
        assert mean == pytest.approx((0.3, 1.4 / 3, 0.7 / 3), abs=1e-12)
        assert label == NEU

    def test_one_hot_unanimity(self):
        mean, label = probability_average(
            {"a": (0.0, 0.0, 1.0), "b": (0.0, 0.0, 1.0), "c": (0.0, 0.0, 1.0)}
        )
        assert mean == (0.0, 0.0, 1.0)
        assert label == POS

    def test_tied_means_break_to_canonical_order(self):
        _, label = probability_average({"a": (0.5, 0.5, 0.0), "b": (0.5, 0.5, 0.0)})
        assert label == NEG

    def test_missing_probabilities_rejected(self):
        with pytest.raises(MissingProbabilities):
            probability_average({"a": (0.5, 0.5, 0.0), "b": None})

    def test_random_triples_match_mean_arithmetic(self):
        rng = np.random.default_rng(0)
        for _ in range(100):
            raw = rng.dirichlet((1.0, 1.0, 1.0), size=3)
            preds = {f"m{i}": tuple(raw[i]) for i in range(3)}
            mean, _ = probability_average(preds)
            manual = [sum(raw[i][c] for i in range(3)) / 3 for c in range(3)]
            assert mean == pytest.approx(manual, abs=1e-12)


class TestBuildReport:
    def _report(self):
        gold = [NEG, NEG, NEU, NEU, POS, POS]
        corpora = ["tfns", "tfns", "tfns", "fiqa", "fiqa", "fiqa"]
        sources = {
            "m1": [NEG, NEG, NEU, NEU, POS, POS],
            "m2": [NEG, POS, NEU, NEU, NEG, POS],
            "avg": [NEG, None, NEU, NEU, None, POS],
        }
        return build_report(gold, sources, corpora)

    def test_overall_and_exclusions(self):
        report = self._report()
        assert report.overall["m1"].metrics.accuracy == 1.0
        assert report.overall["avg"].evaluated == 4
        assert report.overall["avg"].excluded == 2

    def test_agreement_matrix_symmetric_unit_diagonal(self):
        report = self._report()
        assert np.allclose(report.agreement, report.agreement.T)
        assert np.allclose(np.diag(report.agreement), 1.0)
        assert np.allclose(np.diag(report.kappa), 1.0)

    def test_mean_agreement_excludes_self(self):
        report = self._report()
        i = report.sources.index("m1")
        others = [
            report.agreement[i, j]
            for j in range(len(report.sources))
            if j != i
        ]
        assert report.mean_agreement["m1"] == pytest.approx(
            sum(others) / len(others)
        )

    def test_per_corpus_breakdown(self):
        report = self._report()
        assert set(report.per_corpus) == {"tfns", "fiqa"}
        assert report.per_corpus["tfns"]["m1"].evaluated == 3

    def test_length_mismatch_rejected(self):
        with pytest.raises(LengthMismatch):
            build_report([NEG], {"m": [NEG, POS]})

    def test_to_dict_full_precision(self):
        payload = self._report().to_dict()
        assert payload["sources"] == ["m1", "m2", "avg"]
        assert isinstance(payload["overall"]["m1"]["accuracy"], float)
        assert len(payload["agreement"]) == 3
