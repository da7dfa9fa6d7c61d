"""Language embedding tables and the embedding-space structure loss.

For a pair of languages the structure loss is::

    | ||e(l1) - e(l2)|| - mean(tree, map, inv_asp) |

i.e. the embedding distance should equal the mean of the normalized
linguistic distances. :func:`fit_embeddings` minimizes it on its own with
plain full-batch gradient descent, standing in for adding it to a larger
training objective.
"""
from __future__ import annotations

import enum
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from .catalog import Catalog
from .metrics import MetricVector, pairwise_metrics


class Provenance(str, enum.Enum):
    FITTED = "fitted"
    IMPORTED = "imported"
    SYNTHETIC = "synthetic"


class EmbeddingError(ValueError):
    pass


class PairSampling(str, enum.Enum):
    ALL_PAIRS = "all_pairs"
    UNIFORM_K = "uniform_k_per_language"


@dataclass
class EmbeddingTable:
    dim: int
    entries: dict[str, np.ndarray]
    provenance: Provenance = Provenance.IMPORTED

    def __post_init__(self):
        if self.dim < 1:
            raise EmbeddingError("dim must be positive")
        self.provenance = Provenance(self.provenance)
        clean = {}
        for k in sorted(self.entries):
            v = np.array(self.entries[k], dtype=np.float64)
            if v.shape != (self.dim,):
                raise EmbeddingError(f"embedding for {k!r} has shape {v.shape}, expected ({self.dim},)")
            if not np.all(np.isfinite(v)):
                raise EmbeddingError(f"embedding for {k!r} is not finite")
            clean[k] = v
        self.entries = clean

    @property
    def ids(self) -> tuple[str, ...]:
        return tuple(self.entries)

    def __getitem__(self, lang_id: str) -> np.ndarray:
        try:
            return self.entries[lang_id]
        except KeyError:
            raise KeyError(f"no embedding for {lang_id!r}") from None

    def __contains__(self, lang_id) -> bool:
        return lang_id in self.entries

    def __len__(self) -> int:
        return len(self.entries)

    def matrix(self, ids: Sequence[str] | None = None) -> np.ndarray:
        ids = self.ids if ids is None else ids
        if not ids:
            return np.zeros((0, self.dim))
        return np.stack([self[i] for i in ids])

    def check_covers(self, catalog: Catalog) -> None:
        missing = [i for i in catalog.ids if i not in self.entries]
        if missing:
            raise EmbeddingError(f"embedding table lacks {len(missing)} catalog languages, e.g. {missing[:3]}")

    def check_known(self, catalog: Catalog) -> None:
        extra = [i for i in self.entries if i not in catalog]
        if extra:
            raise EmbeddingError(f"embedding ids not in catalog: {extra[:3]}")

    def to_dict(self) -> dict:
        return {
            "dim": self.dim,
            "provenance": self.provenance.value,
            "entries": {k: [float(x) for x in v] for k, v in self.entries.items()},
        }

    def save(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), sort_keys=True) + "\n", encoding="utf-8")

    @classmethod
    def from_dict(cls, d: Mapping) -> "EmbeddingTable":
        try:
            return cls(int(d["dim"]), dict(d["entries"]), Provenance(d.get("provenance", "imported")))
        except (KeyError, TypeError, ValueError) as exc:
            raise EmbeddingError(f"malformed embedding table: {exc}") from exc

    @classmethod
    def load(cls, path: str | Path) -> "EmbeddingTable":
        try:
            d = json.loads(Path(path).read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise EmbeddingError(f"{path}:{exc.lineno}: {exc.msg}") from exc
        return cls.from_dict(d)

    def equals(self, other: "EmbeddingTable") -> bool:
        """Bit-exact equality of dim, provenance and every entry."""
        return (
            self.dim == other.dim
            and self.provenance == other.provenance
            and self.ids == other.ids
            and all(np.array_equal(self.entries[k], other.entries[k]) for k in self.ids)
        )


@dataclass(frozen=True)
class LessConfig:
    epochs: int = 2000
    learning_rate: float = 0.5
    seed: int = 42
    pair_sampling: PairSampling = PairSampling.ALL_PAIRS
    pairs_per_language: int = 10
    epsilon: float = 1e-8
    weight: float = 1.0

    def __post_init__(self):
        if self.epochs < 1:
            raise ValueError("epochs must be positive")
        if not self.learning_rate > 0:
            raise ValueError("learning_rate must be positive")
        if not self.epsilon > 0:
            raise ValueError("epsilon must be positive")
        if self.pairs_per_language < 1:
            raise ValueError("pairs_per_language must be positive")
        object.__setattr__(self, "pair_sampling", PairSampling(self.pair_sampling))


def _target(metrics) -> float:
    if isinstance(metrics, MetricVector):
        return metrics.mean
    return float(np.mean(metrics))


def _pair(u, v) -> tuple[np.ndarray, np.ndarray]:
    u = np.asarray(u, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    if u.shape != v.shape:
        raise EmbeddingError(f"dimension mismatch: {u.shape} vs {v.shape}")
    return u, v


def euclidean(u, v) -> float:
    u, v = _pair(u, v)
    return math.sqrt(float(np.sum((u - v) ** 2)))


def less_loss(e1, e2, metrics) -> float:
    """Absolute gap between the embedding distance and the mean metric distance."""
    return abs(euclidean(e1, e2) - _target(metrics))


def less_gradient(e1, e2, metrics, epsilon: float = 1e-8) -> tuple[np.ndarray, np.ndarray]:
    """Gradient of :func:`less_loss` w.r.t. both embeddings.

    The inner distance is smoothed to ``sqrt(||e1 - e2||^2 + epsilon^2)``; the
    outer absolute value uses subgradient 0 at its kink.
    """
    e1, e2 = _pair(e1, e2)
    diff = e1 - e2
    d = math.sqrt(float(diff @ diff) + epsilon * epsilon)
    g = np.sign(d - _target(metrics)) * diff / d
    return g, -g


def _pairs_for_epoch(rng, n: int, cfg: LessConfig, all_ia, all_ib):
    if cfg.pair_sampling is PairSampling.ALL_PAIRS:
        return all_ia, all_ib
    k = min(cfg.pairs_per_language, n - 1)
    ia = np.repeat(np.arange(n), k)
    ib = np.concatenate([
        (i + 1 + rng.choice(n - 1, k, replace=False)) % n for i in range(n)
    ])
    lo, hi = np.minimum(ia, ib), np.maximum(ia, ib)
    order = np.lexsort((hi, lo))
    return lo[order], hi[order]


def fit_embeddings_with_history(catalog: Catalog, dim: int = 16, cfg: LessConfig = LessConfig()):
    """Fit a table by gradient descent on the mean pair loss.

    Returns ``(table, losses)`` where ``losses[0]`` is the loss at
    initialization and ``losses[t]`` the loss after ``t`` updates, all over
    the full pair set.
    """
    ids = catalog.ids
    n = len(ids)
    rng = np.random.default_rng(cfg.seed)
    E = rng.uniform(-0.1, 0.1, size=(n, dim))
    if n < 2:
        return EmbeddingTable(dim, dict(zip(ids, E)), Provenance.FITTED), [0.0]

    M = pairwise_metrics(catalog)
    T = M.mean(axis=2)
    all_ia, all_ib = np.triu_indices(n, 1)
    eps2 = cfg.epsilon ** 2

    def full_loss(E):
        # divergence shows up as inf/nan here and is reported by the caller
        with np.errstate(over="ignore", invalid="ignore"):
            d = np.sqrt(np.sum((E[all_ia] - E[all_ib]) ** 2, axis=1))
        return cfg.weight * float(np.mean(np.abs(d - T[all_ia, all_ib])))

    losses = [full_loss(E)]
    for epoch in range(cfg.epochs):
        ia, ib = _pairs_for_epoch(rng, n, cfg, all_ia, all_ib)
        diff = E[ia] - E[ib]
        d = np.sqrt(np.sum(diff * diff, axis=1) + eps2)
        g = (cfg.weight * np.sign(d - T[ia, ib]) / d)[:, None] * diff / len(ia)
        grad = np.zeros_like(E)
        np.add.at(grad, ia, g)
        np.add.at(grad, ib, -g)
        E = E - cfg.learning_rate * grad
        loss = full_loss(E)
        if not math.isfinite(loss):
            raise EmbeddingError(f"non-finite loss at epoch {epoch + 1}; try a smaller learning rate")
        losses.append(loss)
    return EmbeddingTable(dim, dict(zip(ids, E)), Provenance.FITTED), losses


def fit_embeddings(catalog: Catalog, dim: int = 16, cfg: LessConfig = LessConfig()) -> EmbeddingTable:
    return fit_embeddings_with_history(catalog, dim, cfg)[0]
