"""Metric correctness, anchored by an O(n^2) pair-counting AUC oracle."""

import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from xraybench import metrics
from xraybench.errors import InvalidArgument, UndefinedMetricError


def pair_count_auc(scores, truths):
    """Direct Mann-Whitney definition: wins + half-ties over all pairs."""
    pos = [s for s, t in zip(scores, truths) if t == 1]
    neg = [s for s, t in zip(scores, truths) if t == 0]
    wins = 0.0
    for p in pos:
        for q in neg:
            if p > q:
                wins += 1.0
            elif p == q:
                wins += 0.5
    return wins / (len(pos) * len(neg))


def make_preds(p_pos, truth, predicted=None):
    p_pos = np.asarray(p_pos, dtype=np.float64)
    truth = np.asarray(truth, dtype=np.int64)
    if predicted is None:
        predicted = (p_pos > 0.5).astype(np.int64)
    return metrics.PredictionSet(
        ids=[f"s{i}" for i in range(len(truth))],
        p_pos=p_pos,
        predicted=np.asarray(predicted, dtype=np.int64),
        truth=truth,
    )


class TestRocAuc:
    def test_matches_pair_oracle_on_100_random_sets(self):
        rng = np.random.default_rng(0)
        for _ in range(100):
            n = int(rng.integers(2, 201))
            truths = rng.integers(0, 2, size=n)
            if truths.min() == truths.max():
                truths[0] = 1 - truths[0]
            # quantized scores force plenty of ties
            scores = np.round(rng.random(n), 2)
            got = metrics.roc_auc(scores, truths)
            want = pair_count_auc(scores, truths)
            assert got == want, f"n={n}: {got} != {want}"

    def test_derived_four_sample_example(self):
        scores = np.array([0.9, 0.8, 0.7, 0.3])
        truths = np.array([1, 0, 1, 0])
        assert metrics.roc_auc(scores, truths) == 0.75

    def test_perfect_separation_and_all_ties(self):
        assert metrics.roc_auc([0.9, 0.8, 0.2, 0.1], [1, 1, 0, 0]) == 1.0
        assert metrics.roc_auc([0.5, 0.5, 0.5, 0.5], [1, 0, 1, 0]) == 0.5

    def test_invariant_under_strictly_increasing_transform(self):
        rng = np.random.default_rng(1)
        scores = rng.random(50)
        truths = rng.integers(0, 2, size=50)
        truths[:2] = [0, 1]
        base = metrics.roc_auc(scores, truths)
        assert metrics.roc_auc(np.exp(3 * scores), truths) == base
        assert metrics.roc_auc(np.log(scores + 1e-9), truths) == base

    def test_negation_complement_without_ties(self):
        rng = np.random.default_rng(2)
        scores = rng.permutation(60) / 60.0  # distinct
        truths = rng.integers(0, 2, size=60)
        truths[:2] = [0, 1]
        assert metrics.roc_auc(scores, truths) + metrics.roc_auc(-scores, truths) == 1.0

    def test_single_class_is_undefined(self):
        with pytest.raises(UndefinedMetricError):
            metrics.roc_auc([0.1, 0.9], [1, 1])


class TestAccuracyAndF1:
    def test_accuracy_basics(self):
        assert metrics.accuracy(make_preds([0.9, 0.1], [1, 0], [1, 0])) == 1.0
        assert metrics.accuracy(make_preds([0.9, 0.9], [1, 0], [1, 1])) == 0.5

    def test_f1_direct_formula(self):
        # TP=1, FP=1, FN=1 -> 2/(2+1+1)
        preds = make_preds([0.9, 0.9, 0.1], [1, 0, 1], [1, 1, 0])
        assert metrics.f1_binary(preds) == 0.5

    def test_f1_zero_denominator_convention(self):
        preds = make_preds([0.1, 0.2], [0, 0], [0, 0])
        assert metrics.f1_binary(preds) == 0.0

    def test_order_invariance(self):
        rng = np.random.default_rng(3)
        p = rng.random(30)
        t = rng.integers(0, 2, size=30)
        yhat = rng.integers(0, 2, size=30)
        a = make_preds(p, t, yhat)
        perm = rng.permutation(30)
        b = metrics.PredictionSet(
            ids=[a.ids[i] for i in perm],
            p_pos=p[perm], predicted=yhat[perm], truth=t[perm],
        )
        assert metrics.accuracy(a) == metrics.accuracy(b)
        assert metrics.f1_binary(a) == metrics.f1_binary(b)

    def test_empty_set_rejected(self):
        empty = metrics.PredictionSet(
            ids=[], p_pos=np.array([]), predicted=np.array([], dtype=np.int64),
            truth=np.array([], dtype=np.int64),
        )
        with pytest.raises(InvalidArgument):
            metrics.accuracy(empty)
        with pytest.raises(InvalidArgument):
            metrics.f1_binary(empty)


class TestPredictionSetValidation:
    def test_rejects_length_mismatch(self):
        with pytest.raises(InvalidArgument):
            make_preds([0.5, 0.5], [1])

    def test_rejects_probabilities_outside_unit_interval(self):
        with pytest.raises(InvalidArgument):
            make_preds([1.5], [1])
        with pytest.raises(InvalidArgument):
            make_preds([np.nan], [1])

    def test_rejects_nonbinary_labels(self):
        with pytest.raises(InvalidArgument):
            make_preds([0.5], [2])


class TestReportAndCsv:
    def test_report_fields_are_consistent(self):
        rng = np.random.default_rng(4)
        p = rng.random(40)
        t = rng.integers(0, 2, size=40)
        t[:2] = [0, 1]
        preds = make_preds(p, t)
        rep = metrics.report(preds, threshold=0.5)
        c = rep.confusion
        assert c["tp"] + c["fp"] + c["tn"] + c["fn"] == rep.n == 40
        assert rep.acc == (c["tp"] + c["tn"]) / rep.n
        assert rep.threshold == 0.5

    def test_report_json_is_canonical_and_stable(self):
        preds = make_preds([0.9, 0.2, 0.7], [1, 0, 1])
        rep = metrics.report(preds, threshold=0.5)
        text = rep.to_json()
        assert text == metrics.report(preds, threshold=0.5).to_json()
        parsed = json.loads(text)
        assert list(parsed) == sorted(parsed)
        assert text.endswith("\n")

    def test_report_accepts_null_threshold(self):
        preds = make_preds([0.9, 0.2], [1, 0])
        rep = metrics.report(preds, threshold=None)
        assert json.loads(rep.to_json())["threshold"] is None

    def test_roc_curve_points_and_csv(self, tmp_path):
        preds = make_preds([0.9, 0.8, 0.7, 0.3], [1, 0, 1, 0])
        pts = metrics.roc_curve_points(preds.p_pos, preds.truth)
        assert tuple(pts[0]) == (0.0, 0.0, np.inf)
        assert tuple(pts[-1][:2]) == (1.0, 1.0)
        # one row per distinct score, thresholds strictly decreasing
        assert len(pts) == 5
        assert all(pts[i][2] > pts[i + 1][2] for i in range(len(pts) - 1))

        path = tmp_path / "roc.csv"
        metrics.write_roc_csv(path, pts)
        lines = path.read_text().splitlines()
        assert lines[0] == "fpr,tpr,threshold"
        assert lines[1] == "0.0,0.0,inf"
        assert len(lines) == 6

    def test_roc_curve_tied_scores_collapse_to_one_row(self):
        pts = metrics.roc_curve_points([0.5, 0.5, 0.5], [1, 0, 1])
        assert len(pts) == 2
        assert tuple(pts[1]) == (1.0, 1.0, 0.5)


@given(
    st.lists(
        st.tuples(st.floats(0, 1, allow_nan=False), st.integers(0, 1)),
        min_size=2, max_size=120,
    ).filter(lambda rows: len({t for _, t in rows}) == 2)
)
@settings(max_examples=60, deadline=None)
def test_rank_auc_always_matches_pair_oracle(rows):
    scores = [s for s, _ in rows]
    truths = [t for _, t in rows]
    assert metrics.roc_auc(scores, truths) == pair_count_auc(scores, truths)
