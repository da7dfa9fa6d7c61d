import csv
import itertools

import numpy as np
import pytest

from langspace.embedding import EmbeddingTable
from langspace.evalharness import (MSE_DEFINITION, HarnessError, Policy, ReconstructionReport, default_policies,
                                   export_report, load_report, policy_mse_ordering, reconstruct_all)
from langspace.metalearner import MetaLearner
from langspace.metrics import tree_distance


@pytest.fixture(scope="module")
def cat10(fixture30):
    return fixture30.subset(fixture30.ids[:10])


def test_identical_table_zero_mse(cat10):
    table = EmbeddingTable(4, {i: [1.5, -2.0, 0.25, 3.0] for i in cat10.ids})
    report = reconstruct_all(cat10, table, default_policies(42, MetaLearner.random(0)), range(1, 10))
    for policy in report.mse.values():
        assert all(v == 0.0 for v in policy.values())


def test_tree_k3_brute_force(cat10, rng):
    ids = cat10.ids
    table = EmbeddingTable(5, {i: rng.normal(size=5) for i in ids})
    report = reconstruct_all(cat10, table, [Policy("tree")], [3])
    total = 0.0
    for i in ids:
        ranked = sorted((tree_distance(cat10, i, j), j) for j in ids if j != i)
        nb = [j for _, j in ranked[:3]]
        approx = sum(np.asarray(table[j]) for j in nb) / 3
        total += float(np.sum((approx - table[i]) ** 2)) / 5
        assert report.per_language["tree"][3][i]["neighbors"] == nb
    assert report.mse["tree"][3] == pytest.approx(total / len(ids), rel=1e-12)


def test_random_policy_deterministic(cat10, rng):
    table = EmbeddingTable(3, {i: rng.normal(size=3) for i in cat10.ids})
    a = reconstruct_all(cat10, table, [Policy("random", seed=9)], range(1, 10))
    b = reconstruct_all(cat10, table, [Policy("random", seed=9)], range(1, 10))
    c = reconstruct_all(cat10, table, [Policy("random", seed=10)], range(1, 10))
    assert a.to_dict() == b.to_dict()
    assert a.to_dict() != c.to_dict()


def test_leave_one_out_strict(cat10, rng):
    table = EmbeddingTable(3, {i: rng.normal(size=3) for i in cat10.ids})
    report = reconstruct_all(cat10, table, default_policies(1, MetaLearner.random(2)), range(1, 10))
    for p, ks in report.per_language.items():
        for k, rows in ks.items():
            assert len(rows) == len(cat10)
            for lang, row in rows.items():
                assert lang not in row["neighbors"]
                assert len(set(row["neighbors"])) == k
            assert np.isfinite(report.mse[p][k]) and report.mse[p][k] >= 0


def test_policy_validation(cat10, rng):
    with pytest.raises(HarnessError):
        Policy("random")
    with pytest.raises(HarnessError):
        Policy("learned")
    with pytest.raises(HarnessError):
        Policy("closest")
    table = EmbeddingTable(2, {i: rng.normal(size=2) for i in cat10.ids})
    with pytest.raises(HarnessError):
        reconstruct_all(cat10, table, [Policy("tree")], [10])
    with pytest.raises(HarnessError):
        reconstruct_all(cat10, table, [Policy("tree")], [0])


def make_report(curves):
    return ReconstructionReport({p: dict(c) for p, c in curves.items()}, {p: {} for p in curves}, {})


def test_ordering_ties_by_name():
    r = make_report({"tree": {1: 0.5, 2: 0.4}, "map": {1: 0.5, 2: 0.4}})
    assert [p for p, _ in policy_mse_ordering(r)] == ["map", "tree"]


def test_ordering_dominance():
    r = make_report({"avg": {k: 0.3 for k in range(1, 6)}, "random": {k: 0.3 + 0.01 * k for k in range(1, 6)}})
    out = policy_mse_ordering(r)
    assert [p for p, _ in out] == ["avg", "random"]
    assert out[0][1] == pytest.approx(0.3 * 4)


def test_ordering_errors():
    with pytest.raises(HarnessError):
        policy_mse_ordering(make_report({"avg": {1: 0.1}}))
    with pytest.raises(HarnessError):
        policy_mse_ordering(make_report({"avg": {1: 0.1, 2: 0.2}, "map": {1: 0.1, 3: 0.2}}))


def test_csv_export(tmp_path):
    r = make_report({"tree": {3: 0.3, 1: 0.1, 2: 0.2}, "avg": {2: 0.02, 1: 0.01, 3: 1 / 3}})
    path = export_report(r, tmp_path / "r.csv")
    rows = list(csv.reader(path.open()))
    assert rows[0] == ["policy", "k", "mse"]
    body = rows[1:]
    assert len(body) == 6
    assert [(p, int(k)) for p, k, _ in body] == sorted(itertools.product(["avg", "tree"], [1, 2, 3]))
    assert float(body[2][2]) == 1 / 3


def test_json_round_trip(tmp_path, cat10, rng):
    table = EmbeddingTable(3, {i: rng.normal(size=3) for i in cat10.ids})
    report = reconstruct_all(cat10, table, default_policies(3, MetaLearner.random(4)), range(1, 6))
    assert report.config["mse_definition"] == MSE_DEFINITION
    export_report(report, tmp_path / "r.json", "json")
    again = load_report(tmp_path / "r.json")
    assert again.mse == report.mse
    assert again.to_dict() == report.to_dict()
    a = (tmp_path / "r.json").read_bytes()
    export_report(again, tmp_path / "r2.json", "json")
    assert (tmp_path / "r2.json").read_bytes() == a


def test_export_errors(tmp_path):
    r = make_report({"avg": {1: 0.1}})
    with pytest.raises(HarnessError):
        export_report(r, tmp_path / "r.xml", "xml")
    with pytest.raises(HarnessError):
        export_report(r, tmp_path / "missing" / "r.csv")
