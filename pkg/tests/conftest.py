import json

import numpy as np
import pytest

from langspace.catalog import Catalog, GeoPoint, Language
from langspace.fixtures import bundled_catalog, generate_catalog
from langspace.metalearner import TrainConfig, train
from langspace.synth import synthesize_embeddings


def make_lang(lang_id, lineage=None, loc=(0.0, 0.0), phonemes=("a", "p")):
    lineage = tuple(lineage) if lineage else ("Root", lang_id)
    return Language(lang_id, lang_id.upper(), None if loc is None else GeoPoint(*loc),
                    lineage, frozenset(phonemes))


def write_catalog_files(tmp_path, records, inventories):
    lp = tmp_path / "languages.json"
    ip = tmp_path / "inventories.json"
    lp.write_text(json.dumps(records), encoding="utf-8")
    ip.write_text(json.dumps(inventories), encoding="utf-8")
    return lp, ip


@pytest.fixture(scope="session")
def fixture50() -> Catalog:
    return bundled_catalog()


@pytest.fixture(scope="session")
def fixture30() -> Catalog:
    return generate_catalog(30, seed=30)


@pytest.fixture(scope="session")
def synth50(fixture50):
    return synthesize_embeddings(fixture50, dim=16, seed=42, noise=0.05)


@pytest.fixture(scope="session")
def model50(fixture50, synth50):
    ml, report = train(fixture50, synth50, TrainConfig(seed=42))
    return ml, report


@pytest.fixture(scope="session")
def model30(fixture30):
    table = synthesize_embeddings(fixture30, dim=8, seed=3, noise=0.05)
    ml, _ = train(fixture30, table, TrainConfig(seed=3, epochs=3000))
    return ml, table


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


# acceptance verdicts, printed once at the end of the run
ACCEPTANCE: dict[int, str] = {}


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for n in sorted(ACCEPTANCE):
            terminalreporter.write_line(ACCEPTANCE[n])
