"""Connection-weights variable importance (absolute-weight shares, min-max scaled)."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from dldnet.network import NetworkWeights, TrainedModel


class ImportanceError(ValueError):
    pass


@dataclass(frozen=True)
class ImportanceReport:
    features: tuple[str, ...]
    raw_share: tuple[float, ...]
    scaled: tuple[float, ...]
    degenerate: bool = False

    def ranked(self) -> list[tuple[str, float, float]]:
        """Rows sorted by scaled value, highest first; ties keep feature order."""
        rows = list(zip(self.features, self.raw_share, self.scaled))
        return sorted(rows, key=lambda r: -r[2])

    def to_csv(self) -> str:
        lines = ["feature,raw_share,scaled"]
        lines += [f"{f},{r!r},{s!r}" for f, r, s in self.ranked()]
        return "\n".join(lines) + "\n"

    def to_dict(self) -> dict:
        return {
            "features": [{"feature": f, "raw_share": r, "scaled": s} for f, r, s in self.ranked()],
            "degenerate": self.degenerate,
        }


def raw_importance(w: NetworkWeights) -> np.ndarray:
    """Percent share of each input, biases excluded.

    Each hidden unit splits its absolute output weight among the inputs in
    proportion to their absolute incoming weights; shares sum to 100.
    """
    a = np.abs(w.input_to_hidden[:-1])  # inputs x hidden, bias row dropped
    v = np.abs(w.hidden_to_output[:-1])
    col = a.sum(axis=0)
    with np.errstate(invalid="ignore", divide="ignore"):
        frac = np.where(col > 0, a / col, 0.0)
    contrib = frac @ v
    total = contrib.sum()
    if not total > 0:
        raise ImportanceError("importance undefined: every input-to-hidden (or hidden-to-output) weight is zero")
    return 100.0 * contrib / total


def scale_importance(shares) -> tuple[np.ndarray, bool]:
    """Min-max scale to [0, 100]; equal shares all map to 100 and flag degeneracy."""
    s = np.asarray(shares, dtype=float)
    lo, hi = s.min(), s.max()
    if hi == lo:
        return np.full_like(s, 100.0), True
    scaled = 100.0 * (s - lo) / (hi - lo)
    # pin the endpoints so they are exact regardless of rounding
    scaled[s == hi] = 100.0
    scaled[s == lo] = 0.0
    return scaled, False


def importance_report(m: TrainedModel | NetworkWeights, features: tuple[str, ...] | None = None) -> ImportanceReport:
    w = m.weights if isinstance(m, TrainedModel) else m
    if features is None:
        features = m.feature_order if isinstance(m, TrainedModel) else tuple(f"x{i + 1}" for i in range(w.n_inputs))
    if len(features) != w.n_inputs:
        raise ValueError("feature names do not match the network input count")
    shares = raw_importance(w)
    scaled, degenerate = scale_importance(shares)
    return ImportanceReport(tuple(features), tuple(shares.tolist()), tuple(scaled.tolist()), degenerate)
