"""Confusion-matrix metrics, ROC curves, AUC and fold-averaged ROC bands.

DLD is the positive class throughout.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from dldnet.dataset import POSITIVE_CLASS


@dataclass(frozen=True)
class ConfusionMatrix:
    tp: int
    fp: int
    fn: int
    tn: int

    def __post_init__(self):
        for name in ("tp", "fp", "fn", "tn"):
            v = getattr(self, name)
            if int(v) != v or v < 0:
                raise ValueError(f"{name} must be a non-negative integer, got {v}")
        if self.n < 1:
            raise ValueError("confusion matrix is empty")

    @property
    def n(self) -> int:
        return self.tp + self.fp + self.fn + self.tn

    def to_dict(self) -> dict:
        return {"tp": self.tp, "fp": self.fp, "fn": self.fn, "tn": self.tn}


def _is_positive(label) -> bool:
    if isinstance(label, str):
        return label.strip().upper() == POSITIVE_CLASS
    return bool(label)


def confusion(labels: Sequence, preds: Sequence) -> ConfusionMatrix:
    """Count outcomes; labels may be ``"DLD"``/``"TD"`` strings or 1/0."""
    if len(labels) != len(preds):
        raise ValueError(f"length mismatch: {len(labels)} labels vs {len(preds)} predictions")
    if not len(labels):
        raise ValueError("cannot build a confusion matrix from zero samples")
    tp = fp = fn = tn = 0
    for lab, pred in zip(labels, preds):
        actual, predicted = _is_positive(lab), _is_positive(pred)
        if actual and predicted:
            tp += 1
        elif predicted:
            fp += 1
        elif actual:
            fn += 1
        else:
            tn += 1
    return ConfusionMatrix(tp, fp, fn, tn)


def accuracy(cm: ConfusionMatrix) -> float:
    return (cm.tp + cm.tn) / cm.n


def precision(cm: ConfusionMatrix) -> float:
    """tp / (tp + fp); 0 when nothing was predicted positive."""
    denom = cm.tp + cm.fp
    return cm.tp / denom if denom else 0.0


def recall(cm: ConfusionMatrix) -> float:
    """tp / (tp + fn); 0 when there are no actual positives."""
    denom = cm.tp + cm.fn
    return cm.tp / denom if denom else 0.0


def f1(cm: ConfusionMatrix) -> float:
    """Harmonic mean of precision and recall.

    Evaluated as ``2 tp / (2 tp + fp + fn)``, which equals
    ``2 P R / (P + R)`` whenever ``P + R > 0`` but needs only one rounding.
    Returns 0 when ``tp == 0`` (precision and recall both zero).
    """
    if cm.tp == 0:
        return 0.0
    return 2 * cm.tp / (2 * cm.tp + cm.fp + cm.fn)


def kappa(cm: ConfusionMatrix) -> float:
    """Cohen's kappa for the 2x2 table.

    With ``p_o = a / n`` and ``p_e = b / n**2`` the statistic is
    ``(a n - b) / (n**2 - b)``; integer arithmetic keeps it to one rounding.
    When ``p_e == 1`` (both raters constant and equal) the result is 1 if the
    raters agree perfectly, else 0.
    """
    n = cm.n
    agree = cm.tp + cm.tn
    chance = (cm.tp + cm.fn) * (cm.tp + cm.fp) + (cm.fp + cm.tn) * (cm.fn + cm.tn)
    denom = n * n - chance
    if denom == 0:
        return 1.0 if agree == n else 0.0
    return (agree * n - chance) / denom


def degenerate_flags(cm: ConfusionMatrix) -> tuple[str, ...]:
    flags = []
    if cm.tp + cm.fp == 0:
        flags.append("precision")
    if cm.tp + cm.fn == 0:
        flags.append("recall")
    if cm.tp == 0:
        flags.append("f1")
    if cm.n * cm.n == (cm.tp + cm.fn) * (cm.tp + cm.fp) + (cm.fp + cm.tn) * (cm.fn + cm.tn):
        flags.append("kappa")
    return tuple(flags)


# -- ROC -------------------------------------------------------------------


@dataclass(frozen=True)
class RocCurve:
    fpr: tuple[float, ...]
    tpr: tuple[float, ...]
    thresholds: tuple[float, ...]

    def __len__(self) -> int:
        return len(self.fpr)

    @property
    def points(self) -> list[tuple[float, float]]:
        return list(zip(self.fpr, self.tpr))

    def to_csv(self) -> str:
        lines = ["fpr,tpr,threshold"]
        for f, t, th in zip(self.fpr, self.tpr, self.thresholds):
            lines.append(f"{f!r},{t!r},{th!r}")
        return "\n".join(lines) + "\n"


def _positive_mask(labels: Sequence) -> np.ndarray:
    return np.array([_is_positive(lab) for lab in labels], dtype=bool)


def roc_curve(scores: Sequence[float], labels: Sequence) -> RocCurve:
    """ROC points for the rule "positive iff score >= threshold".

    Thresholds run over +inf, the distinct scores in descending order, and
    -inf. Tied scores move the curve in one diagonal step. A threshold whose
    point coincides with the previous one (only ever the -inf sentinel) is
    dropped.
    """
    s = np.asarray(scores, dtype=float)
    pos = _positive_mask(labels)
    if s.shape != pos.shape:
        raise ValueError("scores and labels differ in length")
    if not np.isfinite(s).all():
        raise ValueError("scores must be finite")
    n_pos = int(pos.sum())
    n_neg = int((~pos).sum())
    if n_pos == 0 or n_neg == 0:
        raise ValueError("ROC needs both positive and negative labels")

    thresholds = [math.inf] + sorted(set(s.tolist()), reverse=True) + [-math.inf]
    fpr, tpr, kept = [], [], []
    for th in thresholds:
        called = s >= th
        point = (int((called & ~pos).sum()) / n_neg, int((called & pos).sum()) / n_pos)
        if fpr and point == (fpr[-1], tpr[-1]):
            continue
        fpr.append(point[0])
        tpr.append(point[1])
        kept.append(th)
    return RocCurve(tuple(fpr), tuple(tpr), tuple(kept))


def auc(curve: RocCurve) -> float:
    """Trapezoidal area under the curve."""
    f = np.asarray(curve.fpr)
    t = np.asarray(curve.tpr)
    return float(np.sum(np.diff(f) * (t[1:] + t[:-1]) / 2.0))


@dataclass(frozen=True)
class MeanRocBand:
    fpr: tuple[float, ...]
    mean_tpr: tuple[float, ...]
    sd_tpr: tuple[float, ...]
    mean_auc: float
    sd_auc: float
    n_curves: int
    flags: tuple[str, ...] = field(default=())

    def to_csv(self) -> str:
        lines = ["fpr,mean_tpr,sd_tpr"]
        for f, m, s in zip(self.fpr, self.mean_tpr, self.sd_tpr):
            lines.append(f"{f!r},{m!r},{s!r}")
        return "\n".join(lines) + "\n"


def interpolate_tpr(curve: RocCurve, grid: np.ndarray) -> np.ndarray:
    """TPR of ``curve`` at each grid fpr.

    Linear between points; at an fpr with a vertical run the top of the run is
    used (right-continuous).
    """
    f = np.asarray(curve.fpr)
    t = np.asarray(curve.tpr)
    idx = np.searchsorted(f, grid, side="right") - 1
    idx = np.clip(idx, 0, len(f) - 1)
    out = t[idx].astype(float)
    between = (f[idx] < grid) & (idx < len(f) - 1)
    j = idx[between]
    frac = (grid[between] - f[j]) / (f[j + 1] - f[j])
    out[between] = t[j] + frac * (t[j + 1] - t[j])
    return out


def mean_roc(curves: Sequence[RocCurve], grid_size: int = 101) -> MeanRocBand:
    """Vertically average ROC curves on an equally spaced fpr grid.

    The band carries the per-point sample sd (n-1). With a single curve the sd
    is undefined; it is reported as 0 and ``"single_curve"`` is flagged.
    """
    if not curves:
        raise ValueError("mean_roc needs at least one curve")
    if grid_size < 2:
        raise ValueError("grid_size must be >= 2")
    grid = np.linspace(0.0, 1.0, grid_size)
    stack = np.vstack([interpolate_tpr(c, grid) for c in curves])
    aucs = np.array([auc(c) for c in curves])
    mean = stack.mean(axis=0)
    if len(curves) > 1:
        sd = stack.std(axis=0, ddof=1)
        sd_auc = float(aucs.std(ddof=1))
        flags: tuple[str, ...] = ()
    else:
        sd = np.zeros(grid_size)
        sd_auc = 0.0
        flags = ("single_curve",)
    return MeanRocBand(
        tuple(grid.tolist()),
        tuple(mean.tolist()),
        tuple(sd.tolist()),
        float(aucs.mean()),
        sd_auc,
        len(curves),
        flags,
    )


# -- report ----------------------------------------------------------------


@dataclass(frozen=True)
class MetricsReport:
    accuracy: float
    precision: float
    recall: float
    f1: float
    kappa: float
    auc: float | None
    confusion: ConfusionMatrix
    degenerate_flags: tuple[str, ...] = ()

    def to_dict(self) -> dict:
        return {
            "accuracy": self.accuracy,
            "precision": self.precision,
            "recall": self.recall,
            "f1": self.f1,
            "kappa": self.kappa,
            "auc": self.auc,
            "confusion": self.confusion.to_dict(),
            "degenerate_flags": list(self.degenerate_flags),
        }


def metrics_report(labels: Sequence, scores: Sequence[float], threshold: float = 0.5) -> MetricsReport:
    """All classification metrics for positive-class scores at ``threshold``.

    AUC is ``None`` and flagged when only one class is present.
    """
    preds = [float(p) >= threshold for p in scores]
    cm = confusion(labels, preds)
    flags = list(degenerate_flags(cm))
    try:
        area: float | None = auc(roc_curve(scores, labels))
    except ValueError:
        area = None
        flags.append("auc")
    return MetricsReport(
        accuracy=accuracy(cm),
        precision=precision(cm),
        recall=recall(cm),
        f1=f1(cm),
        kappa=kappa(cm),
        auc=area,
        confusion=cm,
        degenerate_flags=tuple(flags),
    )
