"""Leave-one-out reconstruction benchmark for neighbour-selection policies.

Every supervised embedding is approximated by the mean of its ``k`` nearest
other languages under a policy's distance, for each ``k`` in a range. The
error for one language is ``||approx - e(l)||^2 / dim``; the per-(policy, k)
MSE is its mean over languages, accumulated in sorted-id order.
"""
from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .catalog import Catalog
from .embedding import EmbeddingTable
from .metalearner import MetaLearner
from .metrics import pairwise_metrics
from .zeroshot import mean_embedding

POLICY_NAMES = ("random", "inv_asp", "tree", "map", "avg", "learned")
MSE_DEFINITION = "mean over languages of squared Euclidean reconstruction error divided by embedding dimension"


class HarnessError(ValueError):
    pass


@dataclass(frozen=True)
class Policy:
    name: str
    seed: int | None = None
    model: MetaLearner | None = field(default=None, compare=False)

    def __post_init__(self):
        if self.name not in POLICY_NAMES:
            raise HarnessError(f"unknown policy {self.name!r}; choose from {', '.join(POLICY_NAMES)}")
        if self.name == "random" and self.seed is None:
            raise HarnessError("random policy needs a seed")
        if self.name == "learned" and self.model is None:
            raise HarnessError("learned policy needs a model")


def default_policies(seed: int, model: MetaLearner | None) -> list[Policy]:
    out = [Policy("random", seed=seed), Policy("inv_asp"), Policy("tree"), Policy("map"), Policy("avg")]
    if model is not None:
        out.append(Policy("learned", model=model))
    return out


@dataclass
class ReconstructionReport:
    # mse[policy][k]
    mse: dict[str, dict[int, float]]
    # per_language[policy][k][lang] = {"sq_error": float, "neighbors": [ids]}
    per_language: dict[str, dict[int, dict[str, dict]]]
    config: dict

    @property
    def policies(self) -> list[str]:
        return sorted(self.mse)

    def to_dict(self) -> dict:
        return {
            "config": self.config,
            "mse": {p: {str(k): v for k, v in sorted(ks.items())} for p, ks in sorted(self.mse.items())},
            "per_language": {
                p: {str(k): langs for k, langs in sorted(ks.items())}
                for p, ks in sorted(self.per_language.items())
            },
        }

    @classmethod
    def from_dict(cls, d) -> "ReconstructionReport":
        return cls(
            mse={p: {int(k): float(v) for k, v in ks.items()} for p, ks in d["mse"].items()},
            per_language={p: {int(k): langs for k, langs in ks.items()} for p, ks in d["per_language"].items()},
            config=d["config"],
        )


def policy_distances(policy: Policy, M: np.ndarray) -> np.ndarray | None:
    """Distance matrix a policy ranks by, or None for the random policy."""
    if policy.name == "random":
        return None
    if policy.name == "avg":
        return M.mean(axis=2)
    if policy.name == "learned":
        n = M.shape[0]
        return policy.model.predict_many(M.reshape(-1, 3)).reshape(n, n)
    return M[..., ("tree", "map", "inv_asp").index(policy.name)]


def nearest_others(D: np.ndarray, i: int, k: int) -> np.ndarray:
    """Indices of the ``k`` nearest to ``i`` excluding itself; ties go to the lower index."""
    d = D[i].copy()
    d[i] = np.inf
    return np.lexsort((np.arange(len(d)), d))[:k]


def reconstruct_all(catalog: Catalog, table: EmbeddingTable, policies: Sequence[Policy],
                    k_range: Sequence[int] = range(1, 31)) -> ReconstructionReport:
    ids = list(catalog.ids)
    n = len(ids)
    table.check_covers(catalog)
    ks = sorted(set(int(k) for k in k_range))
    if not ks or ks[0] < 1 or ks[-1] > n - 1:
        raise HarnessError(f"k range must lie within [1, {n - 1}]")
    names = [p.name for p in policies]
    if len(set(names)) != len(names):
        raise HarnessError("duplicate policy")
    M = pairwise_metrics(catalog)
    E = table.matrix(ids)

    mse: dict[str, dict[int, float]] = {}
    per: dict[str, dict[int, dict[str, dict]]] = {}
    for policy in policies:
        D = policy_distances(policy, M)
        mse[policy.name], per[policy.name] = {}, {}
        for k in ks:
            rows = {}
            total = 0.0
            for i, lang in enumerate(ids):
                if D is None:
                    rng = np.random.default_rng([policy.seed, i, k])
                    others = np.array([j for j in range(n) if j != i])
                    nb = others[rng.choice(n - 1, k, replace=False)]
                else:
                    nb = nearest_others(D, i, k)
                nb_ids = [ids[j] for j in nb]
                approx = mean_embedding(table, nb_ids)
                err = float(np.sum((approx - E[i]) ** 2)) / table.dim
                total += err
                rows[lang] = {"sq_error": err, "neighbors": nb_ids}
            mse[policy.name][k] = total / n
            per[policy.name][k] = rows

    config = {
        "k_range": ks,
        "policies": names,
        "seeds": {p.name: p.seed for p in policies if p.seed is not None},
        "n_languages": n,
        "dim": table.dim,
        "mse_definition": MSE_DEFINITION,
    }
    return ReconstructionReport(mse, per, config)


def policy_mse_ordering(report: ReconstructionReport) -> list[tuple[str, float]]:
    """Policies sorted by trapezoid area under their MSE-vs-k curve (ties by name)."""
    if len(report.mse) < 2:
        raise HarnessError("need at least two policies to order")
    ranges = {p: tuple(sorted(ks)) for p, ks in report.mse.items()}
    if len(set(ranges.values())) != 1:
        raise HarnessError("policies were evaluated over different k ranges")
    out = []
    for p, ks in report.mse.items():
        k = np.array(sorted(ks), dtype=np.float64)
        y = np.array([ks[int(x)] for x in k])
        area = float(np.trapezoid(y, k)) if len(k) > 1 else float(y[0])
        out.append((p, area))
    return sorted(out, key=lambda x: (x[1], x[0]))


def export_report(report: ReconstructionReport, path, fmt: str = "csv") -> Path:
    path = Path(path)
    try:
        if fmt == "csv":
            with path.open("w", newline="", encoding="utf-8") as fh:
                w = csv.writer(fh, lineterminator="\n")
                w.writerow(["policy", "k", "mse"])
                for p in sorted(report.mse):
                    for k in sorted(report.mse[p]):
                        w.writerow([p, k, repr(report.mse[p][k])])
        elif fmt == "json":
            path.write_text(json.dumps(report.to_dict(), sort_keys=True) + "\n", encoding="utf-8")
        else:
            raise HarnessError(f"unknown report format {fmt!r}")
    except OSError as exc:
        raise HarnessError(f"cannot write {path}: {exc.strerror}") from exc
    return path


def load_report(path) -> ReconstructionReport:
    return ReconstructionReport.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))
