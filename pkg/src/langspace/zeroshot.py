"""Approximate embeddings of unseen languages from supervised neighbours.

The meta-learner predicts a distance from the target to every supervised
language. The ``k_min`` nearest are always kept; further neighbours are
added, nearest first, while their distance stays below a threshold and
fewer than ``k_max`` are selected. The default threshold is the median,
over supervised languages, of the distance to their 25th-nearest
supervised neighbour.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Union

import numpy as np

from .catalog import Catalog, Language
from .embedding import EmbeddingTable
from .metalearner import MetaLearner
from .metrics import cross_metrics, pairwise_metrics

AUTO = "auto"
THRESHOLD_RANK = 25


class SelectionError(ValueError):
    pass


@dataclass(frozen=True)
class NeighborPolicy:
    k_min: int = 5
    k_max: int = 25
    threshold: Union[float, str] = AUTO
    weighted: bool = False

    def __post_init__(self):
        if self.k_min < 1:
            raise ValueError("k_min must be at least 1")
        if self.k_min > self.k_max:
            raise ValueError("k_min must not exceed k_max")
        if self.threshold != AUTO:
            if not isinstance(self.threshold, (int, float)) or self.threshold < 0:
                raise ValueError("threshold must be 'auto' or a non-negative number")

    @classmethod
    def fixed(cls, k: int) -> "NeighborPolicy":
        """Exactly ``k`` neighbours, no threshold extension."""
        return cls(k_min=k, k_max=k, threshold=0.0)


@dataclass
class NeighborSelection:
    target: str
    neighbors: list[tuple[str, float]]
    threshold_used: float
    approximated: np.ndarray

    @property
    def neighbor_ids(self) -> list[str]:
        return [i for i, _ in self.neighbors]

    def to_dict(self) -> dict:
        return {
            "target": self.target,
            "neighbors": [{"id": i, "distance": d} for i, d in self.neighbors],
            "threshold_used": self.threshold_used,
            "approximated": [float(x) for x in self.approximated],
        }


def mean_embedding(table: EmbeddingTable, ids: list[str], weights=None) -> np.ndarray:
    """Average of the listed embeddings (optionally weighted), summed in list order.

    Offsets are accumulated relative to the first embedding, so identical
    inputs give back that vector exactly.
    """
    E = table.matrix(ids)
    D = E - E[0]
    if weights is None:
        return E[0] + D.sum(axis=0) / len(ids)
    w = np.asarray(weights, dtype=np.float64)
    return E[0] + (w[:, None] * D).sum(axis=0) / w.sum()


def _supervised_ids(catalog: Catalog, supervised: Iterable[str]) -> list[str]:
    ids = sorted(set(supervised))
    for i in ids:
        catalog[i]
    return ids


def predicted_distance_matrix(catalog: Catalog, ml: MetaLearner, ids: list[str]) -> np.ndarray:
    M = pairwise_metrics(catalog, ids)
    D = ml.predict_many(M.reshape(-1, 3)).reshape(len(ids), len(ids))
    return D


def auto_threshold(catalog: Catalog, ml: MetaLearner, supervised: Iterable[str], rank: int = THRESHOLD_RANK) -> float:
    """Median over supervised languages of the distance to their ``rank``-th nearest other supervised language."""
    ids = _supervised_ids(catalog, supervised)
    if len(ids) < rank + 1:
        raise SelectionError(f"need at least {rank + 1} supervised languages, got {len(ids)}")
    D = predicted_distance_matrix(catalog, ml, ids)
    np.fill_diagonal(D, np.inf)
    kth = np.sort(D, axis=1)[:, rank - 1]
    return float(np.median(kth))


def _resolve_target(catalog: Catalog, target) -> Language:
    if isinstance(target, Language):
        return target
    return catalog[target]


def select_neighbors(catalog: Catalog, ml: MetaLearner, supervised: Iterable[str], table: EmbeddingTable,
                     target, policy: NeighborPolicy = NeighborPolicy()) -> NeighborSelection:
    """Choose supervised neighbours for ``target`` (an id or a :class:`Language`).

    A target that is itself supervised is left out of its own candidate set.
    Ties in predicted distance are broken by id.
    """
    lang = _resolve_target(catalog, target)
    ids = [i for i in _supervised_ids(catalog, supervised) if i != lang.id]
    if not ids:
        raise SelectionError("supervised set is empty")
    if policy.threshold == AUTO:
        threshold = auto_threshold(catalog, ml, ids)
    else:
        threshold = float(policy.threshold)

    M = cross_metrics([lang], [catalog[i] for i in ids])[0]
    dist = ml.predict_many(M)
    order = np.lexsort((np.arange(len(ids)), dist))  # ids are sorted, so index breaks ties by id
    take = min(policy.k_min, len(ids))
    while take < min(policy.k_max, len(ids)) and dist[order[take]] < threshold:
        take += 1
    chosen = order[:take]
    neighbors = [(ids[j], float(dist[j])) for j in chosen]
    weights = None
    if policy.weighted:
        weights = 1.0 / np.maximum(dist[chosen], 1e-12)
    approx = mean_embedding(table, [i for i, _ in neighbors], weights)
    return NeighborSelection(lang.id, neighbors, threshold, approx)


def approximate_unseen(catalog: Catalog, ml: MetaLearner, supervised: Iterable[str], table: EmbeddingTable,
                       target, policy: NeighborPolicy = NeighborPolicy()) -> np.ndarray:
    return select_neighbors(catalog, ml, supervised, table, target, policy).approximated
