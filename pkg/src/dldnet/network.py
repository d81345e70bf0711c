"""Single-hidden-layer logistic network trained by penalized cross-entropy.

Parameters are kept in one flat vector laid out as the input-to-hidden matrix
(``(n_inputs + 1) x size``, row-major, bias row last) followed by the
hidden-to-output vector (``size + 1``, bias last).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np
from scipy.special import expit

from dldnet.dataset import (
    FEATURE_ORDER,
    POSITIVE_CLASS,
    CohortError,
    Dataset,
    Sample,
    StandardizationParams,
    apply_standardizer,
    fit_standardizer,
)

FORMAT_VERSION = 1
PROB_EPS = 1e-12
ARMIJO_C = 1e-4
LOSS_TOL = 1e-8
MIN_STEP = 1e-12
INIT_SCALE = 0.5


class WeightCapError(ValueError):
    """Network would exceed the configured total-weight cap."""


def count_weights(n_inputs: int, size: int) -> int:
    """Total number of weights and biases for ``n_inputs`` -> ``size`` -> 1."""
    if n_inputs < 1 or size < 1:
        raise ValueError("n_inputs and size must be >= 1")
    return (n_inputs + 1) * size + (size + 1)


@dataclass(frozen=True)
class Hyperparams:
    size: int = 8
    decay: float = 0.001
    maxit: int = 100
    max_weights: int = 500

    def __post_init__(self):
        if int(self.size) != self.size or self.size < 1:
            raise ValueError(f"size must be a positive integer, got {self.size}")
        if not (self.decay >= 0 and math.isfinite(self.decay)):
            raise ValueError(f"decay must be a finite value >= 0, got {self.decay}")
        if int(self.maxit) != self.maxit or self.maxit < 1:
            raise ValueError(f"maxit must be a positive integer, got {self.maxit}")
        if int(self.max_weights) != self.max_weights or self.max_weights < 1:
            raise ValueError(f"max_weights must be a positive integer, got {self.max_weights}")

    def check(self, n_inputs: int) -> None:
        n = count_weights(n_inputs, self.size)
        if n > self.max_weights:
            raise WeightCapError(
                f"size {self.size} with {n_inputs} inputs needs {n} weights, "
                f"exceeding the cap of {self.max_weights} (max_weights)"
            )

    def to_dict(self) -> dict:
        return {"size": self.size, "decay": self.decay, "maxit": self.maxit, "max_weights": self.max_weights}


@dataclass(frozen=True)
class NetworkWeights:
    input_to_hidden: np.ndarray
    hidden_to_output: np.ndarray
    n_inputs: int

    def __post_init__(self):
        w1 = np.array(self.input_to_hidden, dtype=float)
        w2 = np.array(self.hidden_to_output, dtype=float).reshape(-1)
        if w1.ndim != 2 or w1.shape[0] != self.n_inputs + 1:
            raise ValueError(f"input_to_hidden must have shape ({self.n_inputs + 1}, size), got {w1.shape}")
        if w2.shape[0] != w1.shape[1] + 1:
            raise ValueError("hidden_to_output must have size + 1 entries")
        if not (np.isfinite(w1).all() and np.isfinite(w2).all()):
            raise ValueError("network weights must be finite")
        w1.flags.writeable = False
        w2.flags.writeable = False
        object.__setattr__(self, "input_to_hidden", w1)
        object.__setattr__(self, "hidden_to_output", w2)

    @property
    def size(self) -> int:
        return self.input_to_hidden.shape[1]

    def flat(self) -> np.ndarray:
        return np.concatenate([self.input_to_hidden.ravel(), self.hidden_to_output])

    @classmethod
    def from_flat(cls, theta: np.ndarray, n_inputs: int, size: int) -> "NetworkWeights":
        theta = np.asarray(theta, dtype=float)
        if theta.shape != (count_weights(n_inputs, size),):
            raise ValueError("flat parameter vector has the wrong length")
        cut = (n_inputs + 1) * size
        return cls(theta[:cut].reshape(n_inputs + 1, size), theta[cut:], n_inputs)

    def __eq__(self, other):
        if not isinstance(other, NetworkWeights):
            return NotImplemented
        return (
            self.n_inputs == other.n_inputs
            and np.array_equal(self.input_to_hidden, other.input_to_hidden)
            and np.array_equal(self.hidden_to_output, other.hidden_to_output)
        )

    __hash__ = None

    def to_dict(self) -> dict:
        return {
            "n_inputs": self.n_inputs,
            "size": self.size,
            "input_to_hidden": [[float(v) for v in row] for row in self.input_to_hidden],
            "hidden_to_output": [float(v) for v in self.hidden_to_output],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "NetworkWeights":
        return cls(np.array(d["input_to_hidden"], dtype=float), np.array(d["hidden_to_output"], dtype=float), int(d["n_inputs"]))


def init_weights(n_inputs: int, size: int, seed: int, max_weights: int = 500) -> NetworkWeights:
    """Draw every weight and bias uniformly from [-0.5, 0.5]."""
    n = count_weights(n_inputs, size)
    if n > max_weights:
        raise WeightCapError(f"network needs {n} weights, exceeding the cap of {max_weights}")
    rng = np.random.default_rng(np.random.SeedSequence(int(seed)))
    return NetworkWeights.from_flat(rng.uniform(-INIT_SCALE, INIT_SCALE, n), n_inputs, size)


def _sigmoid(t):
    return expit(t)


class _Objective:
    """Penalized cross-entropy over a fixed standardized design matrix."""

    def __init__(self, Z: np.ndarray, y: np.ndarray, decay: float, n_inputs: int, size: int):
        Z = np.asarray(Z, dtype=float)
        y = np.asarray(y, dtype=float).reshape(-1)
        if Z.ndim != 2 or Z.shape[0] == 0:
            raise ValueError("loss needs at least one sample")
        if Z.shape[0] != y.shape[0]:
            raise ValueError(f"{Z.shape[0]} rows but {y.shape[0]} labels")
        if Z.shape[1] != n_inputs:
            raise ValueError(f"expected {n_inputs} input columns, got {Z.shape[1]}")
        if not np.isfinite(Z).all():
            raise ValueError("inputs must be finite")
        if not np.isin(y, (0.0, 1.0)).all():
            raise ValueError("labels must be 0 or 1")
        self.Za = np.hstack([Z, np.ones((Z.shape[0], 1))])
        self.y = y
        self.positive = y == 1.0
        self.decay = float(decay)
        self.cut = (n_inputs + 1) * size
        self.shape1 = (n_inputs + 1, size)

    def _forward(self, theta):
        W1 = theta[: self.cut].reshape(self.shape1)
        H = expit(self.Za @ W1)
        p = expit(H @ theta[self.cut : -1] + theta[-1])
        return H, p

    def _data_loss(self, p):
        pc = np.clip(p, PROB_EPS, 1.0 - PROB_EPS)
        # probability assigned to the observed label
        q = np.where(self.positive, pc, 1.0 - pc)
        return -float(np.log(q).sum())

    def value(self, theta) -> float:
        _, p = self._forward(theta)
        return self._data_loss(p) + self.decay * float(theta @ theta)

    def value_and_grad(self, theta):
        H, p = self._forward(theta)
        value = self._data_loss(p) + self.decay * float(theta @ theta)
        # the clip makes the loss flat outside [eps, 1 - eps]
        delta_out = np.where((p >= PROB_EPS) & (p <= 1.0 - PROB_EPS), p - self.y, 0.0)
        v = theta[self.cut : -1]
        grad = 2.0 * self.decay * theta
        grad[self.cut : -1] += delta_out @ H
        grad[-1] += delta_out.sum()
        delta_hidden = np.multiply.outer(delta_out, v) * H * (1.0 - H)
        grad[: self.cut] += (self.Za.T @ delta_hidden).ravel()
        return value, grad


def _as_matrix(z, n_inputs: int) -> np.ndarray:
    Z = np.asarray(z, dtype=float)
    if Z.ndim == 1:
        Z = Z.reshape(1, -1)
    if Z.shape[1] != n_inputs:
        raise ValueError(f"expected {n_inputs} features, got {Z.shape[1]}")
    if not np.isfinite(Z).all():
        raise ValueError("inputs must be finite")
    return Z


def forward(w: NetworkWeights, z) -> float | np.ndarray:
    """Positive-class (DLD) probability for one standardized vector or each row of a matrix."""
    Z = _as_matrix(z, w.n_inputs)
    W1 = w.input_to_hidden
    w2 = w.hidden_to_output
    H = _sigmoid(Z @ W1[:-1] + W1[-1])
    p = _sigmoid(H @ w2[:-1] + w2[-1])
    return float(p[0]) if np.ndim(z) == 1 else p


def loss(w: NetworkWeights, Z, y, decay: float) -> float:
    """Summed binary cross-entropy plus ``decay`` times the sum of squared parameters."""
    obj = _Objective(Z, y, decay, w.n_inputs, w.size)
    return obj.value(w.flat())


def gradient(w: NetworkWeights, Z, y, decay: float) -> NetworkWeights:
    """Analytic gradient of :func:`loss`, returned in the weight layout."""
    obj = _Objective(Z, y, decay, w.n_inputs, w.size)
    _, g = obj.value_and_grad(w.flat())
    return NetworkWeights.from_flat(g, w.n_inputs, w.size)


def minimize(obj: _Objective, theta0: np.ndarray, maxit: int) -> tuple[np.ndarray, list[float]]:
    """Full-batch gradient descent with a backtracking Armijo line search.

    Every iteration starts from step 1.0 and halves until the sufficient
    decrease condition holds; one accepted update counts as one iteration.
    """
    theta = theta0.copy()
    value, grad = obj.value_and_grad(theta)
    trace = [value]
    for _ in range(maxit):
        gg = float(grad @ grad)
        if gg == 0.0:
            break
        step = 1.0
        while True:
            candidate = theta - step * grad
            cand_value = obj.value(candidate)
            if cand_value <= value - ARMIJO_C * step * gg:
                break
            step *= 0.5
            if step < MIN_STEP:
                return theta, trace
        improvement = value - cand_value
        theta = candidate
        value, grad = obj.value_and_grad(theta)
        trace.append(value)
        if improvement < LOSS_TOL:
            break
    return theta, trace


@dataclass(frozen=True, eq=False)
class TrainedModel:
    weights: NetworkWeights
    standardizer: StandardizationParams
    hyperparams: Hyperparams
    loss_trace: tuple[float, ...]
    seed: int
    feature_order: tuple[str, ...] = FEATURE_ORDER
    positive_class: str = field(default=POSITIVE_CLASS)

    def __post_init__(self):
        object.__setattr__(self, "loss_trace", tuple(float(v) for v in self.loss_trace))
        if not self.loss_trace:
            raise ValueError("loss_trace must be non-empty")

    def __eq__(self, other):
        if not isinstance(other, TrainedModel):
            return NotImplemented
        return self.to_dict() == other.to_dict()

    __hash__ = None

    def predict_proba(self, X) -> np.ndarray:
        """Probabilities for a raw (unstandardized) feature matrix."""
        Z = apply_standardizer(self.standardizer, _as_matrix(X, len(self.standardizer)))
        return forward(self.weights, Z)

    def to_dict(self) -> dict:
        return {
            "format_version": FORMAT_VERSION,
            "feature_order": list(self.feature_order),
            "positive_class": self.positive_class,
            "standardizer": self.standardizer.to_dict(),
            "hyperparams": self.hyperparams.to_dict(),
            "weights": self.weights.to_dict(),
            "seed": self.seed,
            "loss_trace": list(self.loss_trace),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "TrainedModel":
        version = d.get("format_version")
        if version != FORMAT_VERSION:
            raise ValueError(f"unsupported model format_version {version!r} (expected {FORMAT_VERSION})")
        return cls(
            weights=NetworkWeights.from_dict(d["weights"]),
            standardizer=StandardizationParams.from_dict(d["standardizer"]),
            hyperparams=Hyperparams(**d["hyperparams"]),
            loss_trace=tuple(d["loss_trace"]),
            seed=int(d["seed"]),
            feature_order=tuple(d["feature_order"]),
            positive_class=d.get("positive_class", POSITIVE_CLASS),
        )

    def save(self, path: str | Path) -> None:
        from dldnet._io import atomic_write_json

        atomic_write_json(path, self.to_dict())

    @classmethod
    def load(cls, path: str | Path) -> "TrainedModel":
        with open(path, encoding="utf-8") as fh:
            return cls.from_dict(json.load(fh))


def train(train: Dataset, hp: Hyperparams = Hyperparams(), seed: int = 0) -> TrainedModel:
    """Fit a standardizer on ``train`` and minimize the penalized loss from a seeded start."""
    train.require_both_classes()
    n_inputs = len(train.feature_order)
    hp.check(n_inputs)
    standardizer = fit_standardizer(train)
    Z = apply_standardizer(standardizer, train.X)
    obj = _Objective(Z, train.y, hp.decay, n_inputs, hp.size)
    w0 = init_weights(n_inputs, hp.size, seed, hp.max_weights)
    theta, trace = minimize(obj, w0.flat(), hp.maxit)
    return TrainedModel(
        weights=NetworkWeights.from_flat(theta, n_inputs, hp.size),
        standardizer=standardizer,
        hyperparams=hp,
        loss_trace=tuple(trace),
        seed=int(seed),
        feature_order=tuple(train.feature_order),
    )


def label_for(p: float) -> str:
    return POSITIVE_CLASS if p >= 0.5 else "TD"


def predict(m: TrainedModel, s: Sample | Sequence[float]) -> tuple[float, str]:
    """Probability of DLD and the thresholded label (p >= 0.5 is DLD)."""
    if isinstance(s, Sample):
        x = s.features
    else:
        x = np.asarray(s, dtype=float)
        if x.shape != (len(m.feature_order),):
            raise CohortError(f"expected {len(m.feature_order)} feature values, got {x.shape}")
    p = float(m.predict_proba(x.reshape(1, -1))[0])
    return p, label_for(p)
