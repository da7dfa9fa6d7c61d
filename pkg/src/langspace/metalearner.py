"""A 96-parameter perceptron mapping metric triples to embedding distances.

Architecture: ``3 -> 6 -> 9 -> 1`` with ReLU hidden layers carrying biases and a
bias-free softplus output. Parameter count is ``(18 + 6) + (54 + 9) + 9 = 96``.

The hidden biases are what let the network bend away from ``softplus(0)``
near the origin: without them the pre-activation is positively homogeneous
in the input, so along any ray the output moves monotonically away from
``ln 2`` and cannot track a distance that grows from 0.
"""
from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from .catalog import Catalog
from .embedding import EmbeddingTable
from .metrics import pairwise_metrics

ARCH = (3, 6, 9, 1)
N_PARAMS = 96
_SHAPES = (
    ("W1", (6, 3)), ("b1", (6,)),
    ("W2", (9, 6)), ("b2", (9,)),
    ("W3", (1, 9)),
)


class ModelError(ValueError):
    pass


def _softplus(z):
    return np.logaddexp(0.0, z)


def _sigmoid(z):
    return 0.5 * (1.0 + np.tanh(0.5 * z))


@dataclass
class MetaLearner:
    W1: np.ndarray
    b1: np.ndarray
    W2: np.ndarray
    b2: np.ndarray
    W3: np.ndarray

    def __post_init__(self):
        for name, shape in _SHAPES:
            arr = np.array(getattr(self, name), dtype=np.float64)
            if arr.shape != shape:
                raise ModelError(f"{name} has shape {arr.shape}, expected {shape}")
            if not np.all(np.isfinite(arr)):
                raise ModelError(f"{name} contains non-finite values")
            setattr(self, name, arr)

    @classmethod
    def zeros(cls) -> "MetaLearner":
        return cls.from_vector(np.zeros(N_PARAMS))

    @classmethod
    def random(cls, seed: int, scale: float = 0.5) -> "MetaLearner":
        rng = np.random.default_rng(seed)
        return cls.from_vector(rng.uniform(-scale, scale, N_PARAMS))

    @classmethod
    def from_vector(cls, theta) -> "MetaLearner":
        theta = np.asarray(theta, dtype=np.float64)
        if theta.shape != (N_PARAMS,):
            raise ModelError(f"expected {N_PARAMS} parameters, got {theta.shape}")
        parts, at = {}, 0
        for name, shape in _SHAPES:
            size = int(np.prod(shape))
            parts[name] = theta[at:at + size].reshape(shape).copy()
            at += size
        return cls(**parts)

    def to_vector(self) -> np.ndarray:
        return np.concatenate([getattr(self, name).ravel() for name, _ in _SHAPES])

    @property
    def n_params(self) -> int:
        return sum(getattr(self, name).size for name, _ in _SHAPES)

    # forward / backward ------------------------------------------------

    def _forward(self, X):
        Z1 = X @ self.W1.T + self.b1
        H1 = np.maximum(Z1, 0.0)
        Z2 = H1 @ self.W2.T + self.b2
        H2 = np.maximum(Z2, 0.0)
        z3 = (H2 @ self.W3.T)[:, 0]
        return Z1, H1, Z2, H2, z3

    def predict_many(self, X) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=np.float64))
        return _softplus(self._forward(X)[-1])

    def predict(self, m) -> float:
        """Predicted embedding distance for one metric triple (tree, map, inv_asp)."""
        x = m.as_array() if hasattr(m, "as_array") else np.asarray(m, dtype=np.float64)
        return float(self.predict_many(x[None, :])[0])

    def loss_and_grad(self, X, t) -> tuple[float, np.ndarray]:
        """Mean squared error against targets ``t`` and its gradient (flat, 96)."""
        X = np.atleast_2d(np.asarray(X, dtype=np.float64))
        t = np.asarray(t, dtype=np.float64)
        Z1, H1, Z2, H2, z3 = self._forward(X)
        y = _softplus(z3)
        r = y - t
        loss = float(np.mean(r * r))
        dz3 = (2.0 / len(t)) * r * _sigmoid(z3)
        dW3 = dz3[None, :] @ H2
        dZ2 = np.outer(dz3, self.W3[0]) * (Z2 > 0)
        dW2 = dZ2.T @ H1
        db2 = dZ2.sum(axis=0)
        dZ1 = (dZ2 @ self.W2) * (Z1 > 0)
        dW1 = dZ1.T @ X
        db1 = dZ1.sum(axis=0)
        grad = np.concatenate([dW1.ravel(), db1, dW2.ravel(), db2, dW3.ravel()])
        return loss, grad

    def lipschitz_bound(self) -> float:
        """Upper bound on the Lipschitz constant: product of spectral norms."""
        return float(np.prod([np.linalg.norm(W, 2) for W in (self.W1, self.W2, self.W3)]))

    # serialization -----------------------------------------------------

    def to_dict(self, training: dict | None = None) -> dict:
        return {
            "arch": list(ARCH),
            "activation": {"hidden": "relu", "output": "softplus"},
            "weights": [self.W1.tolist(), self.W2.tolist(), self.W3.tolist()],
            "biases": [self.b1.tolist(), self.b2.tolist(), []],
            "training": training or {},
        }

    @classmethod
    def from_dict(cls, d) -> "MetaLearner":
        if not isinstance(d, dict):
            raise ModelError("model file must hold a JSON object")
        if list(d.get("arch", [])) != list(ARCH):
            raise ModelError(f"architecture {d.get('arch')} does not match {list(ARCH)}")
        try:
            W1, W2, W3 = d["weights"]
            b1, b2, b3 = d["biases"]
        except (KeyError, ValueError, TypeError) as exc:
            raise ModelError(f"model file needs three weight matrices and three bias vectors: {exc}") from None
        if b3:
            raise ModelError("output layer has no bias")
        try:
            return cls(W1=np.array(W1, dtype=np.float64), b1=np.array(b1, dtype=np.float64),
                       W2=np.array(W2, dtype=np.float64), b2=np.array(b2, dtype=np.float64),
                       W3=np.array(W3, dtype=np.float64))
        except (ValueError, TypeError) as exc:
            if isinstance(exc, ModelError):
                raise
            raise ModelError(f"malformed weights: {exc}") from None

    def save(self, path, training: dict | None = None) -> None:
        Path(path).write_text(json.dumps(self.to_dict(training), sort_keys=True) + "\n", encoding="utf-8")

    @classmethod
    def load(cls, path) -> "MetaLearner":
        try:
            d = json.loads(Path(path).read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise ModelError(f"{path}:{exc.lineno}: {exc.msg}") from exc
        return cls.from_dict(d)


def backprop_check(ml: MetaLearner, m, target: float, h: float = 1e-5) -> float:
    """Max relative error between analytic and central-difference gradients.

    Relative error is ``|a - n| / max(|a|, |n|, 1e-7)``; the floor keeps
    gradients that are zero up to rounding from dominating.
    """
    x = m.as_array() if hasattr(m, "as_array") else np.asarray(m, dtype=np.float64)
    X, t = x[None, :], np.array([float(target)])
    _, analytic = ml.loss_and_grad(X, t)
    theta = ml.to_vector()
    numeric = np.empty_like(theta)
    for i in range(theta.size):
        up, dn = theta.copy(), theta.copy()
        up[i] += h
        dn[i] -= h
        lp, _ = MetaLearner.from_vector(up).loss_and_grad(X, t)
        lm, _ = MetaLearner.from_vector(dn).loss_and_grad(X, t)
        numeric[i] = (lp - lm) / (2 * h)
    denom = np.maximum(np.maximum(np.abs(analytic), np.abs(numeric)), 1e-7)
    return float(np.max(np.abs(analytic - numeric) / denom))


@dataclass(frozen=True)
class TrainConfig:
    epochs: int = 20000
    learning_rate: float = 0.5
    seed: int = 42
    validation_fraction: float = 0.1
    patience: int = 3000
    init_scale: float = 0.5

    def __post_init__(self):
        if self.epochs < 1 or self.patience < 1:
            raise ValueError("epochs and patience must be positive")
        if not self.learning_rate > 0:
            raise ValueError("learning_rate must be positive")
        if not 0 < self.validation_fraction < 1:
            raise ValueError("validation_fraction must lie in (0, 1)")


@dataclass
class TrainReport:
    seed: int
    n_train: int
    n_val: int
    epochs_run: int
    best_epoch: int
    train_losses: list[float] = field(default_factory=list)
    val_losses: list[float] = field(default_factory=list)
    halvings: list[int] = field(default_factory=list)
    final_learning_rate: float = 0.0

    @property
    def best_val_rmse(self) -> float:
        return math.sqrt(self.val_losses[self.best_epoch])

    def summary(self) -> dict:
        return {
            "seed": self.seed,
            "epochs": self.epochs_run,
            "best_epoch": self.best_epoch,
            "pairs": {"train": self.n_train, "validation": self.n_val},
            "final_losses": {
                "train": self.train_losses[self.best_epoch],
                "validation": self.val_losses[self.best_epoch],
            },
            "step_halvings": len(self.halvings),
        }


class TrainingError(ValueError):
    pass


def training_pairs(catalog: Catalog, table: EmbeddingTable) -> tuple[np.ndarray, np.ndarray]:
    """Metric triples and embedding distances for all unordered pairs, in sorted-id order."""
    table.check_covers(catalog)
    ids = catalog.ids
    M = pairwise_metrics(catalog)
    E = table.matrix(ids)
    ia, ib = np.triu_indices(len(ids), 1)
    return M[ia, ib], np.sqrt(np.sum((E[ia] - E[ib]) ** 2, axis=1))


def fit(X, t, cfg: TrainConfig = TrainConfig()) -> tuple[MetaLearner, TrainReport]:
    """Full-batch gradient descent with step halving on any loss increase."""
    X = np.asarray(X, dtype=np.float64)
    t = np.asarray(t, dtype=np.float64)
    n = len(t)
    rng = np.random.default_rng(cfg.seed)
    order = rng.permutation(n)
    n_val = min(n - 1, max(1, int(round(cfg.validation_fraction * n))))
    val, tr = order[:n_val], order[n_val:]
    Xtr, ttr, Xv, tv = X[tr], t[tr], X[val], t[val]

    theta = MetaLearner.random(int(rng.integers(2**63)), cfg.init_scale).to_vector()
    lr = cfg.learning_rate
    loss, grad = MetaLearner.from_vector(theta).loss_and_grad(Xtr, ttr)
    vloss = MetaLearner.from_vector(theta).loss_and_grad(Xv, tv)[0]
    report = TrainReport(cfg.seed, len(tr), n_val, 0, 0, [loss], [vloss])
    best = (vloss, 0, theta)
    for epoch in range(1, cfg.epochs + 1):
        while True:
            cand = theta - lr * grad
            c_loss, c_grad = MetaLearner.from_vector(cand).loss_and_grad(Xtr, ttr)
            if c_loss <= loss:
                break
            lr *= 0.5
            report.halvings.append(epoch)
            if lr < 1e-12:
                cand, c_loss, c_grad = theta, loss, grad
                break
        if not math.isfinite(c_loss):
            raise TrainingError(f"non-finite training loss at epoch {epoch}")
        theta, loss, grad = cand, c_loss, c_grad
        vloss = MetaLearner.from_vector(theta).loss_and_grad(Xv, tv)[0]
        report.train_losses.append(loss)
        report.val_losses.append(vloss)
        report.epochs_run = epoch
        if vloss < best[0]:
            best = (vloss, epoch, theta)
        elif epoch - best[1] >= cfg.patience:
            break
    report.best_epoch = best[1]
    report.final_learning_rate = lr
    return MetaLearner.from_vector(best[2]), report


def train(catalog: Catalog, table: EmbeddingTable, cfg: TrainConfig = TrainConfig()) -> tuple[MetaLearner, TrainReport]:
    """Train on every unordered catalog pair: metric triple -> embedding distance."""
    if len(catalog) < 3:
        raise TrainingError("need at least 3 languages to train")
    X, t = training_pairs(catalog, table)
    return fit(X, t, cfg)
