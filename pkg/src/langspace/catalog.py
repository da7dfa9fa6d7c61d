"""Per-language data: ids, coordinates, lineage paths and phoneme inventories.

A :class:`Catalog` is built once from two JSON files and is immutable
afterwards. The phylogenetic tree is never stored explicitly; it is implied
by the lineage paths (root-to-leaf lists of node names), so the youngest
common ancestor of two languages is their longest common lineage prefix.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from types import MappingProxyType
from typing import Iterable, Mapping

import numpy as np


class CatalogError(ValueError):
    """Base class for catalog problems."""


class CatalogParseError(CatalogError):
    """Malformed input file; the message carries file and record context."""


class CatalogValidationError(CatalogError):
    """Well-formed input that violates a catalog invariant."""


@dataclass(frozen=True)
class GeoPoint:
    latitude_deg: float
    longitude_deg: float

    def __post_init__(self):
        if not -90.0 <= self.latitude_deg <= 90.0:
            raise CatalogValidationError(f"latitude {self.latitude_deg} outside [-90, 90]")
        if not -180.0 <= self.longitude_deg <= 180.0:
            raise CatalogValidationError(f"longitude {self.longitude_deg} outside [-180, 180]")


@dataclass(frozen=True)
class Language:
    id: str
    name: str
    location: GeoPoint | None
    lineage: tuple[str, ...]
    phonemes: frozenset[str] = frozenset()

    def __post_init__(self):
        if not self.id:
            raise CatalogValidationError("language id must be nonempty")
        if not self.lineage:
            raise CatalogValidationError(f"{self.id}: lineage must have at least one element")
        if self.lineage[-1] != self.id:
            raise CatalogValidationError(
                f"{self.id}: last lineage element is {self.lineage[-1]!r}, expected the id"
            )

    def to_record(self) -> dict:
        loc = self.location
        return {
            "id": self.id,
            "name": self.name,
            "lat": None if loc is None else loc.latitude_deg,
            "lon": None if loc is None else loc.longitude_deg,
            "lineage": list(self.lineage),
        }


@dataclass(frozen=True)
class LoadReport:
    """Non-fatal findings from :func:`load_catalog`."""

    missing_inventory: tuple[str, ...] = ()
    missing_location: tuple[str, ...] = ()
    unknown_inventory_ids: tuple[str, ...] = ()

    @property
    def clean(self) -> bool:
        return not (self.missing_inventory or self.missing_location or self.unknown_inventory_ids)


def _parent_map(lineages: Iterable[tuple[str, tuple[str, ...]]]) -> dict[str, str | None]:
    parents: dict[str, str | None] = {}
    for lang_id, path in lineages:
        prev = None
        for node in path:
            seen = parents.setdefault(node, prev)
            if seen != prev:
                raise CatalogValidationError(
                    f"{lang_id}: lineage node {node!r} has parent {prev!r} "
                    f"but another lineage gives it parent {seen!r}"
                )
            prev = node
    return parents


@dataclass(frozen=True, eq=False)
class Catalog:
    languages: Mapping[str, Language]
    phoneme_universe: tuple[str, ...]
    report: LoadReport = field(default_factory=LoadReport, compare=False)

    @classmethod
    def from_languages(cls, languages: Iterable[Language], report: LoadReport | None = None) -> "Catalog":
        by_id: dict[str, Language] = {}
        for lang in languages:
            if lang.id in by_id:
                raise CatalogValidationError(f"duplicate language id {lang.id!r}")
            by_id[lang.id] = lang
        ordered = {k: by_id[k] for k in sorted(by_id)}
        _parent_map((k, v.lineage) for k, v in ordered.items())
        universe = sorted(set().union(*(v.phonemes for v in ordered.values())))
        return cls(MappingProxyType(ordered), tuple(universe), report or LoadReport())

    @property
    def ids(self) -> tuple[str, ...]:
        return tuple(self.languages)

    def __len__(self) -> int:
        return len(self.languages)

    def __contains__(self, lang_id: object) -> bool:
        return lang_id in self.languages

    def __getitem__(self, lang_id: str) -> Language:
        try:
            return self.languages[lang_id]
        except KeyError:
            raise KeyError(f"unknown language id {lang_id!r}") from None

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Catalog):
            return NotImplemented
        return self.canonical_json() == other.canonical_json()

    def __hash__(self):
        return hash(self.canonical_json())

    def subset(self, ids: Iterable[str]) -> "Catalog":
        return Catalog.from_languages(self[i] for i in ids)

    def phoneme_index(self) -> dict[str, int]:
        return {p: i for i, p in enumerate(self.phoneme_universe)}

    def to_dict(self) -> dict:
        return {
            "languages": [lang.to_record() for lang in self.languages.values()],
            "inventories": {k: sorted(v.phonemes) for k, v in self.languages.items()},
            "phoneme_universe": list(self.phoneme_universe),
        }

    def canonical_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"), ensure_ascii=False)

    def save(self, languages_file: str | Path, inventories_file: str | Path) -> None:
        d = self.to_dict()
        Path(languages_file).write_text(
            json.dumps(d["languages"], sort_keys=True, indent=1, ensure_ascii=False) + "\n",
            encoding="utf-8",
        )
        Path(inventories_file).write_text(
            json.dumps(d["inventories"], sort_keys=True, indent=1, ensure_ascii=False) + "\n",
            encoding="utf-8",
        )


def phoneme_vector(catalog: Catalog, lang_id: str) -> np.ndarray:
    """Binary indicator vector of a language's phonemes over ``catalog.phoneme_universe``."""
    phonemes = catalog[lang_id].phonemes
    return np.fromiter((p in phonemes for p in catalog.phoneme_universe),
                       dtype=np.uint8, count=len(catalog.phoneme_universe))


def _read_json(path: str | Path):
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise CatalogParseError(f"{path}: cannot read ({exc.strerror})") from exc
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise CatalogParseError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}") from exc


def _coord(value, what: str, ctx: str) -> float | None:
    if value is None:
        return None
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise CatalogParseError(f"{ctx}: {what} must be a number or null, got {value!r}")
    return float(value)


def parse_language_record(rec, ctx: str = "record") -> Language:
    """Build a :class:`Language` from one languages-file object; an optional ``phonemes`` list is honoured."""
    if not isinstance(rec, dict):
        raise CatalogParseError(f"{ctx}: expected an object, got {type(rec).__name__}")
    lang_id = rec.get("id")
    if not isinstance(lang_id, str):
        raise CatalogParseError(f"{ctx}: missing or non-string 'id'")
    ctx = f"{ctx} ({lang_id})"
    lineage = rec.get("lineage")
    if not isinstance(lineage, list) or not all(isinstance(n, str) for n in lineage):
        raise CatalogParseError(f"{ctx}: 'lineage' must be a list of strings")
    lat = _coord(rec.get("lat"), "lat", ctx)
    lon = _coord(rec.get("lon"), "lon", ctx)
    if (lat is None) != (lon is None):
        raise CatalogParseError(f"{ctx}: lat and lon must both be set or both be null")
    try:
        loc = None if lat is None else GeoPoint(lat, lon)
        phon = rec.get("phonemes")
        return Language(lang_id, str(rec.get("name", lang_id)), loc, tuple(lineage),
                        frozenset(phon) if phon else frozenset())
    except CatalogValidationError as exc:
        raise CatalogValidationError(f"{ctx}: {exc}") from None


def load_catalog(languages_file: str | Path, inventories_file: str | Path) -> Catalog:
    """Load and validate a catalog.

    Parameters
    ----------
    languages_file
        JSON array of ``{"id", "name", "lat", "lon", "lineage"}`` objects.
    inventories_file
        JSON object mapping language id to a list of phoneme strings.

    Returns
    -------
    Catalog
        Languages missing an inventory or a location are admitted and listed
        in ``catalog.report``; metrics that need the missing data fail later.
    """
    records = _read_json(languages_file)
    if not isinstance(records, list):
        raise CatalogParseError(f"{languages_file}: top level must be a JSON array")
    inventories = _read_json(inventories_file)
    if not isinstance(inventories, dict):
        raise CatalogParseError(f"{inventories_file}: top level must be a JSON object")

    langs = []
    for i, rec in enumerate(records):
        lang = parse_language_record(rec, f"{languages_file}: record {i}")
        inv = inventories.get(lang.id)
        if inv is not None:
            if not isinstance(inv, list) or not all(isinstance(p, str) for p in inv):
                raise CatalogParseError(f"{inventories_file}: entry {lang.id!r} must be a list of strings")
            lang = Language(lang.id, lang.name, lang.location, lang.lineage, frozenset(inv))
        langs.append(lang)

    ids = {lang.id for lang in langs}
    report = LoadReport(
        missing_inventory=tuple(sorted(l.id for l in langs if l.id not in inventories)),
        missing_location=tuple(sorted(l.id for l in langs if l.location is None)),
        unknown_inventory_ids=tuple(sorted(k for k in inventories if k not in ids)),
    )
    return Catalog.from_languages(langs, report)


def load_catalog_file(path: str | Path, inventories_file: str | Path | None = None) -> Catalog:
    """Load either a canonical combined catalog file or, with ``inventories_file``,
    a languages file plus inventories file."""
    if inventories_file is not None:
        return load_catalog(path, inventories_file)
    data = _read_json(path)
    if not isinstance(data, dict) or "languages" not in data or "inventories" not in data:
        raise CatalogParseError(
            f"{path}: expected a combined catalog object with 'languages' and 'inventories' "
            "(or pass the inventories file separately)"
        )
    records, inventories = data["languages"], data["inventories"]
    if not isinstance(records, list) or not isinstance(inventories, dict):
        raise CatalogParseError(f"{path}: 'languages' must be an array and 'inventories' an object")
    langs = []
    for i, rec in enumerate(records):
        lang = parse_language_record(rec, f"{path}: record {i}")
        inv = inventories.get(lang.id, [])
        if not isinstance(inv, list) or not all(isinstance(p, str) for p in inv):
            raise CatalogParseError(f"{path}: inventory {lang.id!r} must be a list of strings")
        langs.append(Language(lang.id, lang.name, lang.location, lang.lineage, frozenset(inv)))
    cat = Catalog.from_languages(langs)
    if "phoneme_universe" in data and list(data["phoneme_universe"]) != list(cat.phoneme_universe):
        raise CatalogValidationError(f"{path}: stored phoneme_universe does not match the inventories")
    return cat


def save_catalog_file(catalog: Catalog, path: str | Path) -> None:
    Path(path).write_text(catalog.canonical_json() + "\n", encoding="utf-8")
