"""Seeded synthetic DLD/TD cohorts with Gaussian features."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from dldnet.dataset import FEATURE_ORDER, GROUPS, Dataset, Sample


@dataclass(frozen=True)
class FeatureDist:
    mean: float
    sd: float


@dataclass(frozen=True)
class SynthSpec:
    """Per-class, per-feature Gaussian parameters.

    ``features[group][feature]`` holds a :class:`FeatureDist` for every group in
    ``("DLD", "TD")`` and every feature in ``FEATURE_ORDER``.
    """

    n_per_class: int
    features: dict = field(default_factory=dict)
    seed: int = 0

    def __post_init__(self):
        if int(self.n_per_class) != self.n_per_class or self.n_per_class < 1:
            raise ValueError(f"n_per_class must be a positive integer, got {self.n_per_class}")
        if self.seed < 0:
            raise ValueError("seed must be a non-negative integer")
        for g in GROUPS:
            if g not in self.features:
                raise ValueError(f"missing distribution block for group {g}")
            for f in FEATURE_ORDER:
                if f not in self.features[g]:
                    raise ValueError(f"missing distribution for {g}/{f}")
                d = self.features[g][f]
                if not (d.sd > 0 and np.isfinite(d.sd) and np.isfinite(d.mean)):
                    raise ValueError(f"{g}/{f}: sd must be finite and > 0, mean finite")
            if not self.features[g]["rt_perception"].mean > 0:
                raise ValueError(f"{g}/rt_perception: mean must be > 0")

    def with_seed(self, seed: int) -> "SynthSpec":
        return SynthSpec(self.n_per_class, self.features, seed)

    def to_dict(self) -> dict:
        return {
            "n_per_class": self.n_per_class,
            "seed": self.seed,
            "features": {
                g: {f: {"mean": d.mean, "sd": d.sd} for f, d in self.features[g].items()}
                for g in GROUPS
            },
        }

    @classmethod
    def from_dict(cls, d: dict) -> "SynthSpec":
        features = {
            g: {f: FeatureDist(float(v["mean"]), float(v["sd"])) for f, v in d["features"][g].items()}
            for g in GROUPS
        }
        return cls(int(d["n_per_class"]), features, int(d.get("seed", 0)))

    @classmethod
    def from_json(cls, path: str | Path) -> "SynthSpec":
        with open(path, encoding="utf-8") as fh:
            return cls.from_dict(json.load(fh))


# TD reference distributions; DLD means sit below by the given standardized difference.
_PAPER_LIKE = {
    "perception": (60.0, 6.0, 0.5),
    "rt_perception": (2.0, 0.4, 0.0),
    "vocabulary": (30.0, 5.0, 1.5),
    "morphosyntax": (25.0, 4.0, 2.0),
    "repetition": (20.0, 5.0, 1.2),
}


def default_paper_like_spec(seed: int = 0) -> SynthSpec:
    """15 children per class; production scores separate strongly, reaction time not at all."""
    td = {f: FeatureDist(m, sd) for f, (m, sd, _) in _PAPER_LIKE.items()}
    dld = {f: FeatureDist(m - smd * sd, sd) for f, (m, sd, smd) in _PAPER_LIKE.items()}
    return SynthSpec(15, {"DLD": dld, "TD": td}, seed)


def generate_with_flags(spec: SynthSpec) -> tuple[Dataset, tuple[str, ...]]:
    """Like :func:`generate`, also returning ``group/feature`` names that hit the 0 clamp."""
    rng = np.random.default_rng(np.random.SeedSequence(int(spec.seed)))
    samples: list[Sample] = []
    clamped: list[str] = []
    n = spec.n_per_class
    for g in GROUPS:
        columns = {}
        for f in FEATURE_ORDER:
            d = spec.features[g][f]
            values = rng.normal(d.mean, d.sd, n)
            if f == "rt_perception":
                bad = values <= 0
                while bad.any():
                    values[bad] = rng.normal(d.mean, d.sd, int(bad.sum()))
                    bad = values <= 0
            elif (values < 0).any():
                clamped.append(f"{g}/{f}")
                values = np.maximum(values, 0.0)
            columns[f] = values
        width = max(3, len(str(n)))
        for i in range(n):
            samples.append(
                Sample(id=f"{g}-{i + 1:0{width}d}", group=g, **{f: float(columns[f][i]) for f in FEATURE_ORDER})
            )
    return Dataset(tuple(samples)), tuple(clamped)


def generate(spec: SynthSpec) -> Dataset:
    """Draw ``n_per_class`` DLD samples followed by ``n_per_class`` TD samples."""
    return generate_with_flags(spec)[0]
