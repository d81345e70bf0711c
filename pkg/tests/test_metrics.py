from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dldnet.metrics import (
    ConfusionMatrix,
    accuracy,
    auc,
    confusion,
    degenerate_flags,
    f1,
    kappa,
    mean_roc,
    metrics_report,
    precision,
    recall,
    roc_curve,
)


def pairwise_auc(scores, labels):
    """P(score_pos > score_neg) + 0.5 P(tie), over all positive/negative pairs."""
    pos = [s for s, l in zip(scores, labels) if l]
    neg = [s for s, l in zip(scores, labels) if not l]
    total = Fraction(0)
    for p in pos:
        for n in neg:
            total += 1 if p > n else Fraction(1, 2) if p == n else 0
    return total / (len(pos) * len(neg))


def brute_force(labels, preds):
    tp = sum(1 for l, p in zip(labels, preds) if l and p)
    fp = sum(1 for l, p in zip(labels, preds) if not l and p)
    fn = sum(1 for l, p in zip(labels, preds) if l and not p)
    tn = sum(1 for l, p in zip(labels, preds) if not l and not p)
    n = len(labels)
    acc = Fraction(tp + tn, n)
    prec = Fraction(tp, tp + fp) if tp + fp else Fraction(0)
    rec = Fraction(tp, tp + fn) if tp + fn else Fraction(0)
    f = 2 * prec * rec / (prec + rec) if prec + rec else Fraction(0)
    p_o = acc
    p_e = Fraction((tp + fn) * (tp + fp) + (fp + tn) * (fn + tn), n * n)
    k = (p_o - p_e) / (1 - p_e) if p_e != 1 else Fraction(1 if p_o == 1 else 0)
    return (tp, fp, fn, tn), {"accuracy": acc, "precision": prec, "recall": rec, "f1": f, "kappa": k}


class TestConfusion:
    def test_perfect_pair(self):
        assert confusion(["DLD", "TD"], ["DLD", "TD"]) == ConfusionMatrix(1, 0, 0, 1)

    def test_hand_count(self):
        assert confusion(["DLD", "DLD", "TD"], ["TD", "DLD", "DLD"]) == ConfusionMatrix(1, 1, 1, 0)

    def test_all_td(self):
        assert confusion(["TD"] * 4, ["TD"] * 4) == ConfusionMatrix(0, 0, 0, 4)

    def test_length_mismatch(self):
        with pytest.raises(ValueError, match="length mismatch"):
            confusion(["DLD"], ["DLD", "TD"])

    def test_empty(self):
        with pytest.raises(ValueError):
            confusion([], [])


class TestFormulas:
    def test_hand_values(self):
        cm = ConfusionMatrix(3, 1, 1, 5)
        assert (accuracy(cm), precision(cm), recall(cm), f1(cm)) == (0.8, 0.75, 0.75, 0.75)

    def test_perfect(self):
        cm = ConfusionMatrix(7, 0, 0, 4)
        assert accuracy(cm) == precision(cm) == recall(cm) == f1(cm) == kappa(cm) == 1.0

    def test_degenerate_precision(self):
        cm = ConfusionMatrix(0, 0, 3, 5)
        assert precision(cm) == 0.0 and f1(cm) == 0.0
        assert {"precision", "f1"} <= set(degenerate_flags(cm))

    def test_kappa_chance(self):
        assert kappa(ConfusionMatrix(25, 25, 25, 25)) == 0.0

    def test_kappa_hand(self):
        assert kappa(ConfusionMatrix(4, 1, 2, 3)) == pytest.approx(0.4, abs=1e-15)

    def test_kappa_constant_raters(self):
        cm = ConfusionMatrix(0, 0, 0, 6)
        assert kappa(cm) == 1.0
        assert "kappa" in degenerate_flags(cm)

    @settings(max_examples=300, deadline=None)
    @given(st.lists(st.tuples(st.booleans(), st.booleans()), min_size=1, max_size=30))
    def test_against_rational_counting(self, pairs):
        labels = [l for l, _ in pairs]
        preds = [p for _, p in pairs]
        counts, expected = brute_force(labels, preds)
        cm = confusion(labels, preds)
        assert (cm.tp, cm.fp, cm.fn, cm.tn) == counts
        got = {"accuracy": accuracy(cm), "precision": precision(cm), "recall": recall(cm), "f1": f1(cm), "kappa": kappa(cm)}
        for name, value in expected.items():
            assert got[name] == float(value), name
        assert accuracy(cm) == float(1 - Fraction(cm.fp + cm.fn, cm.n))

    @settings(max_examples=200, deadline=None)
    @given(st.lists(st.tuples(st.booleans(), st.booleans()), min_size=2, max_size=30))
    def test_kappa_one_iff_no_errors(self, pairs):
        labels = [l for l, _ in pairs]
        preds = [p for _, p in pairs]
        if len(set(labels)) < 2:
            return
        cm = confusion(labels, preds)
        assert (kappa(cm) == 1.0) == (cm.fp == 0 and cm.fn == 0)

    @settings(max_examples=100, deadline=None)
    @given(st.lists(st.tuples(st.booleans(), st.booleans()), min_size=1, max_size=30), st.randoms())
    def test_order_invariance(self, pairs, rnd):
        shuffled = pairs[:]
        rnd.shuffle(shuffled)
        a = confusion([l for l, _ in pairs], [p for _, p in pairs])
        b = confusion([l for l, _ in shuffled], [p for _, p in shuffled])
        assert a == b


class TestRoc:
    def test_perfect(self):
        c = roc_curve([0.9, 0.1], [1, 0])
        assert c.points == [(0, 0), (0, 1), (1, 1)]
        assert auc(c) == 1.0

    def test_all_ties(self):
        c = roc_curve([0.3] * 4, [1, 0, 1, 0])
        assert c.points == [(0, 0), (1, 1)]
        assert auc(c) == 0.5

    def test_hand_enumeration(self):
        c = roc_curve([0.9, 0.4, 0.6, 0.1], ["DLD", "DLD", "TD", "TD"])
        assert c.points == [(0, 0), (0, 0.5), (0.5, 0.5), (0.5, 1), (1, 1)]
        assert c.thresholds == (float("inf"), 0.9, 0.6, 0.4, 0.1)
        assert auc(c) == 0.75

    def test_single_class(self):
        with pytest.raises(ValueError, match="both"):
            roc_curve([0.1, 0.2], [1, 1])

    def test_non_finite(self):
        with pytest.raises(ValueError, match="finite"):
            roc_curve([0.1, float("nan")], [1, 0])

    @settings(max_examples=200, deadline=None)
    @given(st.lists(st.tuples(st.integers(0, 6), st.booleans()), min_size=2, max_size=30))
    def test_monotone_and_oracle(self, data):
        scores = [s / 6 for s, _ in data]
        labels = [l for _, l in data]
        if len(set(labels)) < 2:
            return
        c = roc_curve(scores, labels)
        assert c.points[0] == (0, 0) and c.points[-1] == (1, 1)
        assert all(np.diff(c.fpr) >= 0) and all(np.diff(c.tpr) >= 0)
        assert abs(auc(c) - float(pairwise_auc(scores, labels))) < 1e-12
        flipped = auc(roc_curve(scores, [not l for l in labels]))
        assert abs(flipped - (1 - auc(c))) < 1e-12


class TestMeanRoc:
    def test_identical_curves(self):
        c = roc_curve([0.9, 0.4, 0.6, 0.1], [1, 1, 0, 0])
        band = mean_roc([c, c, c])
        assert len(band.fpr) == 101
        assert all(s == 0 for s in band.sd_tpr)
        assert band.mean_auc == 0.75

    def test_single_curve(self):
        c = roc_curve([0.9, 0.4, 0.6, 0.1], [1, 1, 0, 0])
        band = mean_roc([c])
        assert "single_curve" in band.flags
        assert all(s == 0 for s in band.sd_tpr)
        # vertical runs at fpr 0 and 0.5 resolve to their tops
        assert band.mean_tpr[0] == 0.5
        assert band.mean_tpr[25] == 0.5
        assert band.mean_tpr[50] == 1.0

    def test_perfect_and_diagonal(self):
        perfect = roc_curve([0.9, 0.1], [1, 0])
        diagonal = roc_curve([0.5, 0.5], [1, 0])
        band = mean_roc([perfect, diagonal])
        assert band.mean_tpr[50] == pytest.approx(0.75, abs=1e-15)
        assert band.mean_tpr[0] == 0.5
        assert band.mean_auc == 0.75

    def test_empty(self):
        with pytest.raises(ValueError):
            mean_roc([])

    @settings(max_examples=50, deadline=None)
    @given(st.lists(st.lists(st.tuples(st.integers(0, 9), st.booleans()), min_size=4, max_size=20), min_size=1, max_size=6))
    def test_band_monotone(self, families):
        curves = []
        for data in families:
            labels = [l for _, l in data]
            if len(set(labels)) == 2:
                curves.append(roc_curve([s for s, _ in data], labels))
        if not curves:
            return
        band = mean_roc(curves)
        assert all(np.diff(band.mean_tpr) >= 0)
        assert all(s >= 0 for s in band.sd_tpr)


class TestReport:
    def test_perfect_model(self):
        rep = metrics_report(["DLD", "DLD", "TD"], [0.9, 0.8, 0.2])
        d = rep.to_dict()
        assert {k: d[k] for k in ("accuracy", "precision", "recall", "f1", "kappa", "auc")} == dict.fromkeys(
            ("accuracy", "precision", "recall", "f1", "kappa", "auc"), 1.0
        )
        assert d["confusion"] == {"tp": 2, "fp": 0, "fn": 0, "tn": 1}
        assert d["degenerate_flags"] == []

    def test_threshold_tie(self):
        rep = metrics_report(["DLD", "TD"], [0.5, 0.2])
        assert rep.confusion == ConfusionMatrix(1, 0, 0, 1)

    def test_single_class_auc_flagged(self):
        rep = metrics_report(["TD", "TD"], [0.1, 0.2])
        assert rep.auc is None and "auc" in rep.degenerate_flags
