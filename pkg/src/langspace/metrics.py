"""Normalized phonetic distances between two languages.

Three distances, each in ``[0, 1]``:

tree
    ``1 - 2 * depth(lca) / (depth(a) + depth(b))`` where depths count lineage
    elements and the youngest common ancestor is the longest shared lineage
    prefix. Siblings deep in a finely split family stay closer than siblings
    under a coarse one.
map
    WGS84 ellipsoidal distance divided by half the equatorial circumference
    (``pi * a``, 20,037.508 km), clamped to 1.
inv_asp
    ``2 * theta / pi`` where ``theta`` is the angle between the binary phoneme
    vectors. Non-negative vectors keep ``theta`` in ``[0, pi/2]``, so disjoint
    inventories reach exactly 1.
"""
from __future__ import annotations

import math
import threading
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import kernels
from .catalog import Catalog, Language

MAP_NORMALIZER_M = math.pi * kernels.WGS84_A
METRIC_NAMES = ("tree", "map", "inv_asp")


class MetricError(ValueError):
    """A metric cannot be computed for a pair (missing location or inventory)."""


@dataclass(frozen=True)
class MetricVector:
    tree: float
    map: float
    inv_asp: float

    @property
    def mean(self) -> float:
        return (self.tree + self.map + self.inv_asp) / 3.0

    def as_array(self) -> np.ndarray:
        return np.array([self.tree, self.map, self.inv_asp], dtype=np.float64)

    def __iter__(self):
        return iter((self.tree, self.map, self.inv_asp))


def _lang(catalog_or_lang, lang) -> Language:
    if isinstance(lang, Language):
        return lang
    return catalog_or_lang[lang]


def tree_distance_langs(a: Language, b: Language) -> float:
    if a.id == b.id:
        return 0.0
    la, lb = a.lineage, b.lineage
    m = min(len(la), len(lb))
    n = 0
    while n < m and la[n] == lb[n]:
        n += 1
    return 1.0 - 2.0 * n / (len(la) + len(lb))


def map_distance_langs(a: Language, b: Language) -> float:
    for lang in (a, b):
        if lang.location is None:
            raise MetricError(f"language {lang.id!r} has no location")
    pa, pb = a.location, b.location
    d = kernels.vincenty_inverse(pa.latitude_deg, pa.longitude_deg, pb.latitude_deg, pb.longitude_deg)
    return min(1.0, d / MAP_NORMALIZER_M)


def _angle_distance(n_shared: float, n_a: float, n_b: float) -> float:
    cos = n_shared / math.sqrt(n_a * n_b)
    return 2.0 * math.acos(min(1.0, cos)) / math.pi


def inverse_asp_langs(a: Language, b: Language) -> float:
    for lang in (a, b):
        if not lang.phonemes:
            raise MetricError(f"language {lang.id!r} has an empty phoneme inventory")
    return _angle_distance(len(a.phonemes & b.phonemes), len(a.phonemes), len(b.phonemes))


def metric_vector_langs(a: Language, b: Language) -> MetricVector:
    return MetricVector(tree_distance_langs(a, b), map_distance_langs(a, b), inverse_asp_langs(a, b))


def tree_distance(catalog: Catalog, a, b) -> float:
    return tree_distance_langs(_lang(catalog, a), _lang(catalog, b))


def map_distance(catalog: Catalog, a, b) -> float:
    return map_distance_langs(_lang(catalog, a), _lang(catalog, b))


def inverse_asp(catalog: Catalog, a, b) -> float:
    return inverse_asp_langs(_lang(catalog, a), _lang(catalog, b))


def metric_vector(catalog: Catalog, a, b) -> MetricVector:
    """Bundle of the three distances for one pair; ``a``/``b`` are ids or :class:`Language`."""
    return metric_vector_langs(_lang(catalog, a), _lang(catalog, b))


# batched evaluation -----------------------------------------------------

def _check_complete(langs: Sequence[Language]) -> None:
    for lang in langs:
        if lang.location is None:
            raise MetricError(f"language {lang.id!r} has no location")
        if not lang.phonemes:
            raise MetricError(f"language {lang.id!r} has an empty phoneme inventory")


def cross_metrics(rows: Sequence[Language], cols: Sequence[Language]) -> np.ndarray:
    """Metric tensor of shape ``(len(rows), len(cols), 3)`` (tree, map, inv_asp).

    Entries where a row and a column are the same language id are exactly 0.
    """
    rows, cols = list(rows), list(cols)
    _check_complete(rows)
    _check_complete(cols)
    nr, nc = len(rows), len(cols)
    out = np.zeros((nr, nc, 3), dtype=np.float64)
    if nr == 0 or nc == 0:
        return out
    ia, ib = np.meshgrid(np.arange(nr), np.arange(nc), indexing="ij")
    ia, ib = ia.ravel(), ib.ravel()

    # tree
    every = rows + cols
    nodes: dict[str, int] = {}
    width = max(len(l.lineage) for l in every)
    codes = np.full((len(every), width), -1, dtype=np.int32)
    lengths = np.empty(len(every), dtype=np.int32)
    for r, lang in enumerate(every):
        lengths[r] = len(lang.lineage)
        for c, node in enumerate(lang.lineage):
            codes[r, c] = nodes.setdefault(node, len(nodes))
    lcp = kernels.prefix_pairs(codes, lengths, ia, ib + nr)
    tree = 1.0 - 2.0 * lcp / (lengths[ia] + lengths[ib + nr])

    # map
    lat = np.array([l.location.latitude_deg for l in every])
    lon = np.array([l.location.longitude_deg for l in every])
    geo = kernels.geodesic_pairs(lat[ia], lon[ia], lat[ib + nr], lon[ib + nr])
    mp = np.minimum(1.0, geo / MAP_NORMALIZER_M)

    # inverse ASP over binary indicator vectors
    universe = sorted(set().union(*(l.phonemes for l in every)))
    index = {p: i for i, p in enumerate(universe)}
    vec = np.zeros((len(every), len(universe)), dtype=np.float64)
    for r, lang in enumerate(every):
        vec[r, [index[p] for p in lang.phonemes]] = 1.0
    shared = vec[:nr] @ vec[nr:].T
    sizes = vec.sum(axis=1)
    cos = shared / np.sqrt(np.outer(sizes[:nr], sizes[nr:]))
    asp = 2.0 * np.arccos(np.minimum(1.0, cos)) / math.pi

    out[..., 0] = tree.reshape(nr, nc)
    out[..., 1] = mp.reshape(nr, nc)
    out[..., 2] = asp
    same = np.array([[a.id == b.id for b in cols] for a in rows])
    out[same] = 0.0
    return out


def pairwise_metrics(catalog: Catalog, ids: Sequence[str] | None = None) -> np.ndarray:
    """Symmetric ``(n, n, 3)`` metric tensor over ``ids`` (default: all, sorted)."""
    langs = [catalog[i] for i in (catalog.ids if ids is None else ids)]
    full = cross_metrics(langs, langs)
    # enforce exact symmetry from the upper triangle
    iu = np.triu_indices(len(langs), 1)
    full[iu[1], iu[0]] = full[iu[0], iu[1]]
    return full


class PairwiseCache:
    """Thread-safe memo of :class:`MetricVector` keyed by ``(min id, max id)``."""

    def __init__(self, catalog: Catalog):
        self.catalog = catalog
        self._store: dict[tuple[str, str], MetricVector] = {}
        self._lock = threading.Lock()

    def __len__(self):
        return len(self._store)

    def get(self, a: str, b: str) -> MetricVector:
        key = (a, b) if a <= b else (b, a)
        with self._lock:
            hit = self._store.get(key)
        if hit is not None:
            return hit
        value = metric_vector(self.catalog, *key)
        with self._lock:
            return self._store.setdefault(key, value)
