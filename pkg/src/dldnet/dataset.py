"""Cohort ingestion, standardization, and stratified partitioning."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

FEATURE_ORDER: tuple[str, ...] = (
    "perception",
    "rt_perception",
    "vocabulary",
    "morphosyntax",
    "repetition",
)
GROUPS: tuple[str, str] = ("DLD", "TD")
POSITIVE_CLASS = "DLD"
COHORT_HEADER: tuple[str, ...] = ("id", "group") + FEATURE_ORDER


class CohortError(ValueError):
    """Raised for malformed cohort files or invalid samples."""


def normalize_group(value: str) -> str:
    label = value.strip().upper()
    if label not in GROUPS:
        raise CohortError(f"unknown group label {value!r} (expected DLD or TD)")
    return label


@dataclass(frozen=True)
class Sample:
    """One child: five feature values and, for training data, a group label."""

    id: str
    group: str | None
    perception: float
    rt_perception: float
    vocabulary: float
    morphosyntax: float
    repetition: float

    def __post_init__(self):
        if not self.id:
            raise CohortError("sample id must be non-empty")
        if self.group is not None:
            object.__setattr__(self, "group", normalize_group(self.group))
        for name in FEATURE_ORDER:
            value = getattr(self, name)
            if not math.isfinite(value):
                raise CohortError(f"sample {self.id!r}: {name} is not finite")
            if value < 0:
                raise CohortError(f"sample {self.id!r}: {name} must be >= 0, got {value}")
        if self.rt_perception <= 0:
            raise CohortError(f"sample {self.id!r}: rt_perception must be > 0")

    @property
    def features(self) -> np.ndarray:
        return np.array([getattr(self, name) for name in FEATURE_ORDER], dtype=float)


@dataclass(frozen=True)
class Dataset:
    samples: tuple[Sample, ...]
    feature_order: tuple[str, ...] = FEATURE_ORDER

    def __post_init__(self):
        object.__setattr__(self, "samples", tuple(self.samples))
        seen: set[str] = set()
        for s in self.samples:
            if s.id in seen:
                raise CohortError(f"duplicate sample id {s.id!r}")
            seen.add(s.id)

    def __len__(self) -> int:
        return len(self.samples)

    @property
    def ids(self) -> list[str]:
        return [s.id for s in self.samples]

    @property
    def X(self) -> np.ndarray:
        """Raw feature matrix, one row per sample, columns in ``feature_order``."""
        if not self.samples:
            return np.empty((0, len(self.feature_order)))
        return np.array([[getattr(s, f) for f in self.feature_order] for s in self.samples], dtype=float)

    @property
    def y(self) -> np.ndarray:
        """Binary targets, 1 for DLD and 0 for TD."""
        if any(s.group is None for s in self.samples):
            raise CohortError("dataset contains unlabeled samples")
        return np.array([1.0 if s.group == POSITIVE_CLASS else 0.0 for s in self.samples])

    @property
    def labels(self) -> list[str]:
        return [s.group for s in self.samples]

    def class_counts(self) -> dict[str, int]:
        counts = {g: 0 for g in GROUPS}
        for s in self.samples:
            if s.group is not None:
                counts[s.group] += 1
        return counts

    def subset(self, indices: Iterable[int]) -> "Dataset":
        return Dataset(tuple(self.samples[i] for i in indices), self.feature_order)

    def require_both_classes(self) -> None:
        counts = self.class_counts()
        missing = [g for g, n in counts.items() if n == 0]
        if missing:
            raise CohortError(f"both DLD and TD are required; missing {', '.join(missing)}")


def _parse_feature(raw: str, column: str, row: int) -> float:
    try:
        value = float(raw)
    except (TypeError, ValueError):
        raise CohortError(f"row {row}, column {column!r}: non-numeric value {raw!r}") from None
    if not math.isfinite(value):
        raise CohortError(f"row {row}, column {column!r}: non-finite value {raw!r}")
    return value


def load_cohort(path: str | Path, require_group: bool = True) -> Dataset:
    """Read a cohort CSV.

    The header must contain ``id``, ``group`` and the five feature columns.
    With ``require_group=False`` (prediction input) the ``group`` column may be
    absent or blank. Row numbers in error messages count the header as row 1.
    """
    path = Path(path)
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise CohortError(f"{path}: no samples (empty file)") from None
        expected = set(COHORT_HEADER) if require_group else set(("id",) + FEATURE_ORDER)
        allowed = set(COHORT_HEADER)
        missing = [c for c in COHORT_HEADER if c in expected and c not in header]
        extra = [c for c in header if c not in allowed]
        if missing:
            raise CohortError(f"{path}: missing column(s) {', '.join(missing)}")
        if extra:
            raise CohortError(f"{path}: unknown column(s) {', '.join(extra)}")
        if len(set(header)) != len(header):
            raise CohortError(f"{path}: duplicate column names in header")
        col = {name: i for i, name in enumerate(header)}

        samples: list[Sample] = []
        seen: dict[str, int] = {}
        for rownum, row in enumerate(reader, start=2):
            if not row or all(not cell.strip() for cell in row):
                continue
            if len(row) != len(header):
                raise CohortError(f"{path}: row {rownum} has {len(row)} cells, expected {len(header)}")
            sid = row[col["id"]].strip()
            if not sid:
                raise CohortError(f"{path}: row {rownum}, column 'id': empty identifier")
            if sid in seen:
                raise CohortError(f"{path}: row {rownum}: duplicate id {sid!r} (first seen on row {seen[sid]})")
            seen[sid] = rownum
            group = None
            if "group" in col:
                raw_group = row[col["group"]].strip()
                if raw_group:
                    try:
                        group = normalize_group(raw_group)
                    except CohortError as exc:
                        raise CohortError(f"{path}: row {rownum}, column 'group': {exc}") from None
            if require_group and group is None:
                raise CohortError(f"{path}: row {rownum}, column 'group': missing label")
            values = {}
            for name in FEATURE_ORDER:
                cell = row[col[name]].strip()
                if not cell:
                    raise CohortError(f"{path}: row {rownum}, column {name!r}: missing value")
                values[name] = _parse_feature(cell, name, rownum)
            try:
                samples.append(Sample(id=sid, group=group, **values))
            except CohortError as exc:
                raise CohortError(f"{path}: row {rownum}: {exc}") from None
    if not samples:
        raise CohortError(f"{path}: no samples")
    return Dataset(tuple(samples))


def format_number(value: float) -> str:
    """Shortest round-tripping decimal; integral values are written without a fraction."""
    if float(value).is_integer() and abs(value) < 1e15:
        return str(int(value))
    return repr(float(value))


def write_cohort(ds: Dataset, path: str | Path) -> None:
    from dldnet._io import atomic_write_text

    lines = [",".join(COHORT_HEADER)]
    for s in ds.samples:
        cells = [s.id, s.group or ""] + [format_number(getattr(s, f)) for f in FEATURE_ORDER]
        lines.append(",".join(cells))
    atomic_write_text(path, "\n".join(lines) + "\n")


# -- standardization -------------------------------------------------------


@dataclass(frozen=True)
class StandardizationParams:
    mean: tuple[float, ...]
    sd: tuple[float, ...]
    constant_flags: tuple[bool, ...]

    def __post_init__(self):
        if not (len(self.mean) == len(self.sd) == len(self.constant_flags)):
            raise ValueError("standardizer vectors must have equal length")
        if any(not (s > 0) for s in self.sd):
            raise ValueError("standardizer sds must be > 0")

    def __len__(self) -> int:
        return len(self.mean)

    def to_dict(self) -> dict:
        return {
            "means": list(self.mean),
            "sds": list(self.sd),
            "constant_flags": list(self.constant_flags),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "StandardizationParams":
        return cls(
            tuple(float(v) for v in d["means"]),
            tuple(float(v) for v in d["sds"]),
            tuple(bool(v) for v in d["constant_flags"]),
        )


def fit_standardizer(train: Dataset | np.ndarray) -> StandardizationParams:
    """Per-feature mean and sample (n-1) standard deviation.

    Zero-variance features, and the single-sample case where the sample sd is
    undefined, store sd = 1 and are flagged constant.
    """
    X = train.X if isinstance(train, Dataset) else np.asarray(train, dtype=float)
    if X.ndim != 2 or X.shape[0] == 0:
        raise ValueError("cannot fit a standardizer on an empty dataset")
    mean = X.mean(axis=0)
    if X.shape[0] > 1:
        sd = X.std(axis=0, ddof=1)
    else:
        sd = np.zeros(X.shape[1])
    constant = ~(sd > 0)
    sd = np.where(constant, 1.0, sd)
    return StandardizationParams(
        tuple(float(v) for v in mean),
        tuple(float(v) for v in sd),
        tuple(bool(v) for v in constant),
    )


def apply_standardizer(params: StandardizationParams, x: Sequence[float] | np.ndarray) -> np.ndarray:
    """Z-score a feature vector, or each row of a feature matrix."""
    arr = np.asarray(x, dtype=float)
    if arr.shape[-1] != len(params):
        raise ValueError(f"expected {len(params)} features, got {arr.shape[-1]}")
    return (arr - np.asarray(params.mean)) / np.asarray(params.sd)


# -- partitioning ----------------------------------------------------------


def _rng(seed: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(int(seed)))


def _round_half_up(x: float) -> int:
    # guard against 2.4999999999 coming from 0.2 * 12.5 style products
    return int(math.floor(x + 0.5 + 1e-9))


@dataclass(frozen=True)
class SplitSpec:
    train_fraction: float = 0.8
    seed: int = 0
    stratified: bool = True

    def __post_init__(self):
        if not (0.0 < self.train_fraction < 1.0):
            raise ValueError(f"train_fraction must lie in (0, 1), got {self.train_fraction}")
        if self.seed < 0:
            raise ValueError("seed must be a non-negative integer")


def _test_counts(class_sizes: dict[str, int], test_fraction: float) -> dict[str, int]:
    counts = {g: _round_half_up(n * test_fraction) for g, n in class_sizes.items()}
    target = _round_half_up(sum(class_sizes.values()) * test_fraction)
    diff = target - sum(counts.values())
    if diff:
        # ties on size resolve to the positive class for determinism
        larger = max(class_sizes, key=lambda g: (class_sizes[g], g == POSITIVE_CLASS))
        counts[larger] += 1 if diff > 0 else -1
    return counts


def split_train_test(ds: Dataset, spec: SplitSpec = SplitSpec()) -> tuple[Dataset, Dataset]:
    """Partition ``ds`` into train and test subsets.

    With stratification each class contributes ``round(n_class * (1 - f))``
    samples to the test side. Both subsets keep the original sample order.
    """
    ds.require_both_classes()
    test_fraction = 1.0 - spec.train_fraction
    rng = _rng(spec.seed)
    test_idx: list[int] = []
    if spec.stratified:
        sizes = ds.class_counts()
        counts = _test_counts(sizes, test_fraction)
        for g in GROUPS:
            if counts[g] < 1 or counts[g] > sizes[g] - 1:
                raise ValueError(
                    f"class {g} with {sizes[g]} samples would get {counts[g]} test and "
                    f"{sizes[g] - counts[g]} train samples at train_fraction={spec.train_fraction}"
                )
        for g in GROUPS:
            members = [i for i, s in enumerate(ds.samples) if s.group == g]
            chosen = rng.permutation(len(members))[: counts[g]]
            test_idx.extend(members[j] for j in chosen)
    else:
        n_test = _round_half_up(len(ds) * test_fraction)
        test_idx = [int(i) for i in rng.permutation(len(ds))[:n_test]]
        train_groups = {ds.samples[i].group for i in range(len(ds)) if i not in set(test_idx)}
        test_groups = {ds.samples[i].group for i in test_idx}
        if len(train_groups) < 2 or not test_groups:
            raise ValueError("unstratified split left a partition without a required class")
    test_set = set(test_idx)
    train = ds.subset(i for i in range(len(ds)) if i not in test_set)
    test = ds.subset(i for i in range(len(ds)) if i in test_set)
    return train, test


@dataclass(frozen=True)
class FoldAssignment:
    fold_index: tuple[int, ...]
    k: int = 10
    ids: tuple[str, ...] = field(default=())

    def members(self, fold: int) -> list[int]:
        return [i for i, f in enumerate(self.fold_index) if f == fold]

    def complement(self, fold: int) -> list[int]:
        return [i for i, f in enumerate(self.fold_index) if f != fold]

    def sizes(self) -> list[int]:
        return [self.fold_index.count(f) for f in range(self.k)]

    def to_dict(self) -> dict:
        return {
            "k": self.k,
            "assignments": [{"id": i, "fold": f} for i, f in zip(self.ids, self.fold_index)],
        }


def make_folds(train: Dataset, k: int = 10, seed: int = 0) -> FoldAssignment:
    """Stratified k-fold assignment.

    Each class is shuffled and the classes are concatenated; folds are then
    dealt round-robin along that sequence, so per-class and overall fold sizes
    each differ by at most one.
    """
    if k < 2:
        raise ValueError(f"k must be >= 2, got {k}")
    if k > len(train):
        raise ValueError(f"k={k} exceeds the number of training samples ({len(train)})")
    labels = [s.group for s in train.samples]
    if any(g is None for g in labels):
        raise ValueError("folds require labeled samples")
    rng = _rng(seed)
    order: list[int] = []
    for g in GROUPS:
        members = [i for i, lab in enumerate(labels) if lab == g]
        order.extend(members[j] for j in rng.permutation(len(members)))
    fold_index = [0] * len(train)
    for pos, i in enumerate(order):
        fold_index[i] = pos % k
    return FoldAssignment(tuple(fold_index), k, tuple(train.ids))
