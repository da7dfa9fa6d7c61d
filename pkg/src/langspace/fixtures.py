"""Synthetic language catalogs for demos and tests.

:func:`generate_catalog` builds a family-structured catalog: languages in a
family share a lineage prefix, cluster geographically around the family
homeland and inherit (then mutate) a family phoneme inventory. A few
languages migrate far from home and some borrow phonemes from geographic
neighbours, so the three metrics disagree often enough to be informative.

The bundled 50-language fixture is ``generate_catalog(50, seed=FIXTURE_SEED)``
written to ``data/``; :func:`bundled_catalog` loads it.
"""
from __future__ import annotations

from importlib import resources

import numpy as np

from .catalog import Catalog, GeoPoint, Language, load_catalog

FIXTURE_SEED = 20240417

PHONEMES = (
    "p b t d k g q ʔ m n ŋ ɲ f v s z ʃ ʒ x ɣ h l r ɾ j w ts dz tʃ dʒ "
    "pʰ tʰ kʰ ɬ ʎ ç ʁ χ ħ ʕ ɸ β θ ð ɖ ʈ ɳ ɭ ɓ ɗ "
    "a e i o u ə ɛ ɔ ɪ ʊ y ø œ ɯ ɨ aː eː iː oː uː ã õ ĩ"
).split()

_SYLLABLES = ("ka", "lo", "mi", "ra", "tu", "ne", "sa", "vo", "bi", "dra", "gen", "hal", "yu", "zel", "pon")


def _unique_ids(rng: np.random.Generator, n: int) -> list[str]:
    letters = np.array(list("abcdefghijklmnopqrstuvwxyz"))
    ids: list[str] = []
    seen = set()
    while len(ids) < n:
        code = "".join(rng.choice(letters, 3))
        if code not in seen:
            seen.add(code)
            ids.append(code)
    return ids


def _mutate(rng, inventory: set[str], n_drop: int, n_add: int) -> set[str]:
    inv = set(inventory)
    if n_drop and len(inv) > n_drop + 5:
        inv -= set(rng.choice(sorted(inv), n_drop, replace=False))
    pool = sorted(set(PHONEMES) - inv)
    if n_add and pool:
        inv |= set(rng.choice(pool, min(n_add, len(pool)), replace=False))
    return inv


def _wrap_lon(lon: float) -> float:
    return (lon + 180.0) % 360.0 - 180.0


def generate_catalog(n: int = 50, seed: int = FIXTURE_SEED) -> Catalog:
    """Deterministic synthetic catalog of ``n`` complete languages."""
    rng = np.random.default_rng(seed)
    n_fam = max(2, n // 8)
    ids = _unique_ids(rng, n)

    families = []
    for f in range(n_fam):
        center = (rng.uniform(-40, 60), rng.uniform(-150, 160))
        base = set(rng.choice(PHONEMES, int(rng.integers(18, 28)), replace=False))
        # a family is a small random tree of subgroups, given as paths
        groups = []
        for g in range(int(rng.integers(2, 5))):
            path = [f"F{f}", f"F{f}.{g}"]
            groups.append(path)
            if rng.random() < 0.6:
                for h in range(int(rng.integers(1, 3))):
                    groups.append(path + [f"F{f}.{g}.{h}"])
        sub = {}
        for path in groups:
            parent = sub.get(tuple(path[:-1]), (center, base))
            off = (parent[0][0] + rng.normal(0, 5), parent[0][1] + rng.normal(0, 7))
            sub[tuple(path)] = (off, _mutate(rng, parent[1], 2, 2))
        families.append((f"F{f}", center, base, groups, sub))

    langs = []
    homes = rng.integers(0, n_fam, n)
    homes[:n_fam] = np.arange(n_fam)
    for lang_id, fam in zip(ids, homes):
        name, center, base, groups, sub = families[fam]
        path = groups[int(rng.integers(len(groups)))]
        (lat0, lon0), inv = sub[tuple(path)]
        if rng.random() < 0.1:
            lat0, lon0 = rng.uniform(-45, 65), rng.uniform(-170, 170)
        lat = float(np.clip(lat0 + rng.normal(0, 2.5), -85, 85))
        lon = _wrap_lon(lon0 + rng.normal(0, 3.5))
        inv = _mutate(rng, inv, int(rng.integers(0, 4)), int(rng.integers(0, 4)))
        word = "".join(rng.choice(_SYLLABLES, int(rng.integers(2, 4)))).capitalize()
        langs.append(Language(lang_id, word, GeoPoint(round(lat, 4), round(lon, 4)),
                              tuple(path) + (lang_id,), frozenset(inv)))

    # areal borrowing from the nearest language of another family
    locs = np.radians([[l.location.latitude_deg, l.location.longitude_deg] for l in langs])
    xyz = np.column_stack([np.cos(locs[:, 0]) * np.cos(locs[:, 1]),
                           np.cos(locs[:, 0]) * np.sin(locs[:, 1]),
                           np.sin(locs[:, 0])])
    borrowed = []
    for i, lang in enumerate(langs):
        d = np.linalg.norm(xyz - xyz[i], axis=1)
        d[[j for j in range(n) if homes[j] == homes[i]]] = np.inf
        j = int(np.argmin(d))
        inv = set(lang.phonemes)
        if np.isfinite(d[j]) and d[j] < 0.35:
            donor = sorted(langs[j].phonemes - inv)
            if donor:
                inv |= set(rng.choice(donor, min(3, len(donor)), replace=False))
        borrowed.append(Language(lang.id, lang.name, lang.location, lang.lineage, frozenset(inv)))
    return Catalog.from_languages(borrowed)


def bundled_paths():
    root = resources.files("langspace") / "data"
    return root / "fixture50_languages.json", root / "fixture50_inventories.json"


def bundled_catalog() -> Catalog:
    """The shipped 50-language fixture catalog."""
    langs, invs = bundled_paths()
    with resources.as_file(langs) as lp, resources.as_file(invs) as ip:
        return load_catalog(lp, ip)
