"""Cross-validated grid search over hidden-layer size and weight decay."""

from __future__ import annotations

import logging
import statistics
import struct
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from dldnet.dataset import Dataset, FoldAssignment, make_folds
from dldnet.metrics import accuracy, confusion, kappa
from dldnet.network import Hyperparams, TrainedModel, WeightCapError, count_weights, label_for, train

log = logging.getLogger(__name__)

DEFAULT_SIZES: tuple[int, ...] = tuple(range(1, 11))
DEFAULT_DECAYS: tuple[float, ...] = (0.0, 0.0001, 0.001, 0.01, 0.1)


@dataclass(frozen=True)
class GridSpec:
    sizes: tuple[int, ...] = DEFAULT_SIZES
    decays: tuple[float, ...] = DEFAULT_DECAYS
    k: int = 10
    seed: int = 0
    maxit: int = 100
    max_weights: int = 500

    def __post_init__(self):
        object.__setattr__(self, "sizes", tuple(int(s) for s in self.sizes))
        object.__setattr__(self, "decays", tuple(float(d) for d in self.decays))
        if not self.sizes or not self.decays:
            raise ValueError("grid needs at least one size and one decay")
        if any(s < 1 for s in self.sizes):
            raise ValueError("sizes must be positive integers")
        if any(not (d >= 0) for d in self.decays):
            raise ValueError("decays must be >= 0")
        if len(set(self.sizes)) != len(self.sizes) or len(set(self.decays)) != len(self.decays):
            raise ValueError("grid sizes and decays must not repeat")
        if self.seed < 0:
            raise ValueError("seed must be a non-negative integer")

    def check_caps(self, n_inputs: int) -> None:
        """Reject the whole grid if any size breaks the weight cap."""
        bad = [(s, count_weights(n_inputs, s)) for s in self.sizes if count_weights(n_inputs, s) > self.max_weights]
        if bad:
            listing = ", ".join(f"size {s} ({n} weights)" for s, n in bad)
            raise WeightCapError(f"grid cells exceed the {self.max_weights}-weight cap: {listing}")

    def to_dict(self) -> dict:
        return {
            "sizes": list(self.sizes),
            "decays": list(self.decays),
            "k": self.k,
            "seed": self.seed,
            "maxit": self.maxit,
            "max_weights": self.max_weights,
        }


@dataclass(frozen=True)
class FoldScores:
    """Scores from one fold's model: on its own training part and on the held-out fold."""

    train_scores: tuple[float, ...]
    train_labels: tuple[int, ...]
    test_scores: tuple[float, ...]
    test_labels: tuple[int, ...]

    def to_dict(self) -> dict:
        return {
            "train_scores": list(self.train_scores),
            "train_labels": list(self.train_labels),
            "test_scores": list(self.test_scores),
            "test_labels": list(self.test_labels),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "FoldScores":
        return cls(
            tuple(float(v) for v in d["train_scores"]),
            tuple(int(v) for v in d["train_labels"]),
            tuple(float(v) for v in d["test_scores"]),
            tuple(int(v) for v in d["test_labels"]),
        )


def _mean_sd(values: Sequence[float]) -> tuple[float, float]:
    mean = statistics.fmean(values)
    sd = statistics.stdev(values) if len(values) > 1 else 0.0
    return mean, sd


@dataclass(frozen=True)
class CellResult:
    size: int
    decay: float
    fold_accuracy: tuple[float, ...]
    fold_kappa: tuple[float, ...]
    fold_scores: tuple[FoldScores, ...] = field(default=(), compare=False, repr=False)

    @property
    def accuracy(self) -> float:
        return _mean_sd(self.fold_accuracy)[0]

    @property
    def accuracy_sd(self) -> float:
        return _mean_sd(self.fold_accuracy)[1]

    @property
    def kappa(self) -> float:
        return _mean_sd(self.fold_kappa)[0]

    @property
    def kappa_sd(self) -> float:
        return _mean_sd(self.fold_kappa)[1]

    def to_dict(self) -> dict:
        return {
            "size": self.size,
            "decay": self.decay,
            "accuracy": self.accuracy,
            "accuracy_sd": self.accuracy_sd,
            "kappa": self.kappa,
            "kappa_sd": self.kappa_sd,
            "fold_accuracy": list(self.fold_accuracy),
            "fold_kappa": list(self.fold_kappa),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "CellResult":
        return cls(int(d["size"]), float(d["decay"]), tuple(d["fold_accuracy"]), tuple(d["fold_kappa"]))


@dataclass(frozen=True)
class GridSearchResult:
    cells: tuple[CellResult, ...]
    best: tuple[int, float]
    folds: FoldAssignment | None = field(default=None, compare=False)

    def cell(self, size: int, decay: float) -> CellResult:
        for c in self.cells:
            if c.size == size and c.decay == decay:
                return c
        raise KeyError((size, decay))

    def to_csv(self) -> str:
        lines = ["size,decay,accuracy,accuracy_sd,kappa,kappa_sd"]
        for c in self.cells:
            lines.append(f"{c.size},{c.decay!r},{c.accuracy!r},{c.accuracy_sd!r},{c.kappa!r},{c.kappa_sd!r}")
        return "\n".join(lines) + "\n"


def cell_seed(seed: int, size: int, decay: float, fold: int) -> int:
    """Training seed for one (size, decay, fold) cell, independent of grid order."""
    decay_bits = struct.unpack("<Q", struct.pack("<d", float(decay)))[0]
    ss = np.random.SeedSequence([int(seed), int(size), decay_bits, int(fold)])
    return int(ss.generate_state(2, dtype=np.uint64)[0])


def evaluate_cell(
    train_ds: Dataset, folds: FoldAssignment, size: int, decay: float, grid: GridSpec
) -> CellResult:
    hp = Hyperparams(size=size, decay=decay, maxit=grid.maxit, max_weights=grid.max_weights)
    X, y = train_ds.X, train_ds.y
    accs, kappas, scores = [], [], []
    for f in range(folds.k):
        held = folds.members(f)
        rest = folds.complement(f)
        model = train(train_ds.subset(rest), hp, seed=cell_seed(grid.seed, size, decay, f))
        p_held = model.predict_proba(X[held])
        p_rest = model.predict_proba(X[rest])
        cm = confusion(y[held].astype(int).tolist(), [label_for(p) == "DLD" for p in p_held])
        accs.append(accuracy(cm))
        kappas.append(kappa(cm))
        scores.append(
            FoldScores(
                tuple(p_rest.tolist()),
                tuple(y[rest].astype(int).tolist()),
                tuple(p_held.tolist()),
                tuple(y[held].astype(int).tolist()),
            )
        )
    return CellResult(size, decay, tuple(accs), tuple(kappas), tuple(scores))


def select_best(cells: GridSearchResult | Sequence[CellResult]) -> tuple[int, float]:
    """Highest mean accuracy; ties go to higher mean kappa, then smaller size, then smaller decay."""
    if isinstance(cells, GridSearchResult):
        cells = cells.cells
    if not cells:
        raise ValueError("no cells to select from")
    best = min(cells, key=lambda c: (-c.accuracy, -c.kappa, c.size, c.decay))
    return best.size, best.decay


def grid_search(train_ds: Dataset, grid: GridSpec = GridSpec()) -> GridSearchResult:
    """Score every (size, decay) pair by k-fold cross-validation on ``train_ds``.

    One stratified fold assignment, seeded by ``grid.seed``, is shared by all
    cells. Each fold model fits its own standardizer on its training part.
    """
    train_ds.require_both_classes()
    grid.check_caps(len(train_ds.feature_order))
    folds = make_folds(train_ds, grid.k, grid.seed)
    cells = []
    for size in sorted(grid.sizes):
        for decay in sorted(grid.decays):
            cell = evaluate_cell(train_ds, folds, size, decay, grid)
            log.debug("size=%d decay=%g accuracy=%.3f kappa=%.3f", size, decay, cell.accuracy, cell.kappa)
            cells.append(cell)
    cells_t = tuple(cells)
    return GridSearchResult(cells_t, select_best(cells_t), folds)


def fit_final(train_ds: Dataset, best: tuple[int, float], seed: int, maxit: int = 100, max_weights: int = 500) -> TrainedModel:
    size, decay = best
    return train(train_ds, Hyperparams(size=size, decay=decay, maxit=maxit, max_weights=max_weights), seed=seed)
