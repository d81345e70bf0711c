import numpy as np
import pytest

from dldnet.dataset import COHORT_HEADER, Dataset, Sample


def make_sample(sid, group, perception=50.0, rt=1.0, vocabulary=20.0, morphosyntax=20.0, repetition=20.0):
    return Sample(sid, group, perception, rt, vocabulary, morphosyntax, repetition)


def balanced(n_per_class, seed=0):
    """Random labeled cohort with n_per_class samples of each group."""
    rng = np.random.default_rng(seed)
    samples = []
    for g in ("DLD", "TD"):
        for i in range(n_per_class):
            vals = rng.uniform(1, 50, 5)
            samples.append(make_sample(f"{g}-{i}", g, *vals))
    return Dataset(tuple(samples))


def separable_toy(n_per_class=10, seed=0):
    """Two informative features with class means 10 +/- 3 and sd 0.1; the rest constant.

    After standardization this is the two-feature +/-3 separable construction,
    shifted so every score stays non-negative.
    """
    rng = np.random.default_rng(seed)
    samples = []
    for g, sign in (("DLD", 1.0), ("TD", -1.0)):
        a = rng.normal(10 + 3 * sign, 0.1, n_per_class)
        b = rng.normal(10 + 3 * sign, 0.1, n_per_class)
        for i in range(n_per_class):
            samples.append(make_sample(f"{g}-{i}", g, vocabulary=a[i], morphosyntax=b[i]))
    return Dataset(tuple(samples))


def write_csv(path, rows, header=COHORT_HEADER):
    lines = [",".join(header)] + [",".join(str(c) for c in r) for r in rows]
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


@pytest.fixture
def toy():
    return separable_toy()
