import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from langspace.catalog import Catalog
from langspace.embedding import (EmbeddingError, EmbeddingTable, LessConfig, PairSampling, Provenance, euclidean,
                                 fit_embeddings, fit_embeddings_with_history, less_gradient, less_loss)
from langspace.metrics import MetricVector, metric_vector, pairwise_metrics

from conftest import make_lang


def test_euclidean_examples():
    assert euclidean((0, 0), (0, 0)) == 0
    assert euclidean((1, 0), (0, 0)) == 1
    assert euclidean((3, 4), (0, 0)) == 5
    assert euclidean([2.5], [-1.0]) == 3.5
    with pytest.raises(EmbeddingError):
        euclidean((1, 2), (1, 2, 3))


def test_less_loss_examples():
    assert less_loss((1, 1), (1, 1), MetricVector(0, 0, 0)) == 0
    assert less_loss((1, 0), (0, 0), MetricVector(1, 1, 1)) == 0
    assert less_loss((0.5, 0), (0, 0), MetricVector(0.8, 0.8, 0.8)) == pytest.approx(0.3)
    assert less_loss((0.3, 0.4), (0, 0), (0.8, 0.8, 0.8)) == pytest.approx(0.3)
    with pytest.raises(EmbeddingError):
        less_loss((1,), (1, 2), MetricVector(0, 0, 0))


vec = arrays(np.float64, 4, elements=st.floats(-2, 2))
unit = st.floats(0, 1)


@settings(max_examples=200)
@given(vec, vec, unit, unit, unit)
def test_less_loss_nonnegative_and_symmetric(u, v, a, b, c):
    m = MetricVector(a, b, c)
    assert less_loss(u, v, m) >= 0
    assert less_loss(u, v, m) == less_loss(v, u, m)


def central_difference(f, x, h=1e-5):
    g = np.empty_like(x)
    for i in range(x.size):
        up, dn = x.copy(), x.copy()
        up[i] += h
        dn[i] -= h
        g[i] = (f(up) - f(dn)) / (2 * h)
    return g


def rel_err(a, b):
    return np.max(np.abs(a - b) / np.maximum(np.maximum(np.abs(a), np.abs(b)), 1e-8))


def test_gradient_matches_finite_differences(rng):
    for _ in range(50):
        e1, e2 = rng.normal(size=(2, 8))
        m = MetricVector(*rng.uniform(0, 1, 3))
        if abs(euclidean(e1, e2) - m.mean) < 1e-3:
            continue
        g1, g2 = less_gradient(e1, e2, m)
        n1 = central_difference(lambda x: less_loss(x, e2, m), e1)
        n2 = central_difference(lambda x: less_loss(e1, x, m), e2)
        assert rel_err(g1, n1) < 1e-4
        assert rel_err(g2, n2) < 1e-4
        np.testing.assert_array_equal(g1, -g2)


def test_gradient_at_coincident_points():
    m = MetricVector(0.2, 0.4, 0.6)
    g1, g2 = less_gradient(np.ones(5), np.ones(5), m)
    assert np.all(np.isfinite(g1)) and np.all(np.isfinite(g2))
    assert np.linalg.norm(g1) <= m.mean


def two_language_catalog():
    # tree 1 - 2/4 = 0.5, map 60 deg of equator = 1/3, inv_asp of {p,t} vs {p,k} = 2/3
    return Catalog.from_languages([
        make_lang("aaa", ("F", "aaa"), (0.0, 0.0), ("p", "t")),
        make_lang("bbb", ("F", "bbb"), (0.0, 60.0), ("p", "k")),
    ])


def test_fit_two_languages_hits_target():
    cat = two_language_catalog()
    assert metric_vector(cat, "aaa", "bbb").mean == pytest.approx(0.5, abs=1e-9)
    table = fit_embeddings(cat, 2, LessConfig(epochs=1000, learning_rate=0.002, seed=1))
    assert euclidean(table["aaa"], table["bbb"]) == pytest.approx(0.5, abs=0.02)
    assert table.provenance is Provenance.FITTED


def test_fit_single_language_is_init():
    cat = Catalog.from_languages([make_lang("aaa")])
    table = fit_embeddings(cat, 3, LessConfig(seed=7))
    expected = np.random.default_rng(7).uniform(-0.1, 0.1, size=(1, 3))[0]
    np.testing.assert_array_equal(table["aaa"], expected)


@pytest.fixture(scope="module")
def fitted50(fixture50):
    return fit_embeddings_with_history(fixture50, 16, LessConfig(epochs=2000, seed=42))


def test_fit_fixture_quality(fixture50, fitted50):
    table, losses = fitted50
    M = pairwise_metrics(fixture50)
    E = table.matrix(fixture50.ids)
    iu = np.triu_indices(len(E), 1)
    d = np.linalg.norm(E[iu[0]] - E[iu[1]], axis=1)
    mad = float(np.mean(np.abs(d - M.mean(axis=2)[iu])))
    assert mad < 0.05
    assert losses[-1] < 0.5 * losses[0]
    assert mad == pytest.approx(losses[-1], abs=1e-12)


def test_fit_is_deterministic(fixture50, fitted50):
    again = fit_embeddings(fixture50, 16, LessConfig(epochs=2000, seed=42))
    assert again.equals(fitted50[0])


def test_fit_sampled_pairs(fixture50):
    cfg = LessConfig(epochs=300, seed=5, pair_sampling="uniform_k_per_language", pairs_per_language=8)
    assert cfg.pair_sampling is PairSampling.UNIFORM_K
    t1, losses = fit_embeddings_with_history(fixture50, 8, cfg)
    t2 = fit_embeddings(fixture50, 8, cfg)
    assert t1.equals(t2)
    assert losses[-1] < 0.5 * losses[0]


def test_fit_aborts_on_non_finite(fixture50):
    with pytest.raises(EmbeddingError, match="non-finite"):
        fit_embeddings(fixture50.subset(fixture50.ids[:5]), 4, LessConfig(epochs=5, learning_rate=1e300))


@pytest.mark.parametrize("kwargs", [{"epochs": 0}, {"learning_rate": 0}, {"epsilon": 0}, {"learning_rate": -1}])
def test_config_validation(kwargs):
    with pytest.raises(ValueError):
        LessConfig(**kwargs)


def test_table_round_trip(tmp_path, rng):
    table = EmbeddingTable(3, {"b": rng.normal(size=3), "a": rng.normal(size=3) * 1e-17}, "synthetic")
    table.save(tmp_path / "t.json")
    again = EmbeddingTable.load(tmp_path / "t.json")
    assert again.equals(table)
    assert again.ids == ("a", "b")


def test_table_validation():
    with pytest.raises(EmbeddingError, match="shape"):
        EmbeddingTable(3, {"a": [1.0, 2.0]})
    with pytest.raises(EmbeddingError, match="finite"):
        EmbeddingTable(2, {"a": [1.0, math.nan]})
    with pytest.raises(EmbeddingError):
        EmbeddingTable.from_dict({"entries": {}})


def test_table_catalog_checks(fixture50):
    table = EmbeddingTable(2, {"zzz": [0.0, 0.0]})
    with pytest.raises(EmbeddingError, match="lacks"):
        table.check_covers(fixture50)
    with pytest.raises(EmbeddingError, match="zzz"):
        table.check_known(fixture50)
