"""Command-line entry point: ``langspace <group> <command> [options]``.

Exit status is 0 on success, 1 for invalid input or usage, 2 for internal
errors. Diagnostics go to stderr; data goes to files (or stdout).
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import sys
from pathlib import Path

import numpy as np

from . import __version__, kernels
from .catalog import Catalog, CatalogError, load_catalog_file, parse_language_record
from .embedding import EmbeddingError, EmbeddingTable, LessConfig, fit_embeddings_with_history
from .evalharness import (POLICY_NAMES, HarnessError, Policy, export_report, policy_mse_ordering,
                          reconstruct_all)
from .fixtures import bundled_catalog
from .metalearner import MetaLearner, ModelError, TrainConfig, TrainingError, train
from .metrics import MetricError, metric_vector
from .synth import synthesize_embeddings
from .zeroshot import AUTO, NeighborPolicy, SelectionError, select_neighbors

log = logging.getLogger("langspace")

FILE_FORMATS = {"catalog": 1, "embeddings": 1, "model": 1, "report": 1}
BUILTIN_FIXTURE = "builtin:fixture50"
INPUT_ERRORS = (CatalogError, MetricError, EmbeddingError, ModelError, TrainingError,
                SelectionError, HarnessError, KeyError, FileNotFoundError, ValueError)


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


# helpers ---------------------------------------------------------------

def _catalog(args) -> Catalog:
    if args.catalog == BUILTIN_FIXTURE:
        return bundled_catalog()
    return load_catalog_file(args.catalog, args.inventories)


def _out_path(args, value: str) -> Path:
    p = Path(value)
    if args.out_dir and not p.is_absolute():
        Path(args.out_dir).mkdir(parents=True, exist_ok=True)
        p = Path(args.out_dir) / p
    return p


def _seed(args) -> int:
    return args.global_seed if args.seed is None else args.seed


def _parse_k(text: str) -> list[int]:
    try:
        if ".." in text:
            lo, hi = text.split("..")
            ks = list(range(int(lo), int(hi) + 1))
        else:
            ks = [int(x) for x in text.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad k range {text!r}; use e.g. 1..30 or 5,10,25") from None
    if not ks:
        raise argparse.ArgumentTypeError("empty k range")
    return ks


def _threshold(text: str):
    if text == AUTO:
        return AUTO
    try:
        return float(text)
    except ValueError:
        raise argparse.ArgumentTypeError("threshold must be 'auto' or a number") from None


def _read_pairs(catalog: Catalog, source: str) -> list[tuple[str, str]]:
    if source == "all":
        ids = catalog.ids
        return [(a, b) for i, a in enumerate(ids) for b in ids[i + 1:]]
    pairs = []
    for lineno, line in enumerate(Path(source).read_text(encoding="utf-8").splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.replace(",", " ").split()
        if len(parts) != 2:
            raise UsageError(f"{source}:{lineno}: expected two ids per line")
        pairs.append((parts[0], parts[1]))
    return pairs


def _write_text(path: Path, text: str) -> None:
    try:
        path.write_text(text, encoding="utf-8")
    except OSError as exc:
        raise UsageError(f"cannot write {path}: {exc.strerror}") from exc


# commands --------------------------------------------------------------

def cmd_catalog_validate(args) -> int:
    cat = _catalog(args)
    rep = cat.report
    print(f"ok: {len(cat)} languages, {len(cat.phoneme_universe)} phonemes")
    for what, ids in (("missing inventory", rep.missing_inventory),
                      ("missing location", rep.missing_location),
                      ("inventory for unknown id", rep.unknown_inventory_ids)):
        if ids:
            log.warning("%s: %s", what, ", ".join(ids))
    if args.out:
        _write_text(_out_path(args, args.out), cat.canonical_json() + "\n")
    return 0


def cmd_metrics_compute(args) -> int:
    cat = _catalog(args)
    pairs = _read_pairs(cat, args.pairs)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["id_a", "id_b", "tree", "map", "inv_asp", "mean"])
    for a, b in pairs:
        v = metric_vector(cat, a, b)
        w.writerow([a, b, repr(v.tree), repr(v.map), repr(v.inv_asp), repr(v.mean)])
    if args.out == "-":
        sys.stdout.write(buf.getvalue())
    else:
        _write_text(_out_path(args, args.out), buf.getvalue())
    log.info("wrote %d pairs", len(pairs))
    return 0


def cmd_less_fit(args) -> int:
    cat = _catalog(args)
    cfg = LessConfig(epochs=args.epochs, learning_rate=args.learning_rate, seed=_seed(args),
                     pair_sampling=args.pair_sampling, pairs_per_language=args.pairs_per_language,
                     epsilon=args.epsilon, weight=args.weight)
    table, losses = fit_embeddings_with_history(cat, args.dim, cfg)
    table.save(_out_path(args, args.out))
    print(f"fitted {len(table)} embeddings (dim {table.dim}): loss {losses[0]:.6f} -> {losses[-1]:.6f}")
    return 0


def cmd_less_synth(args) -> int:
    cat = _catalog(args)
    table = synthesize_embeddings(cat, args.dim, _seed(args), args.noise)
    table.save(_out_path(args, args.out))
    print(f"synthesized {len(table)} embeddings (dim {table.dim}, noise {args.noise})")
    return 0


def cmd_meta_train(args) -> int:
    cat = _catalog(args)
    table = EmbeddingTable.load(args.embeddings)
    cfg = TrainConfig(epochs=args.epochs, learning_rate=args.learning_rate, seed=_seed(args),
                      validation_fraction=args.validation_fraction, patience=args.patience)
    ml, report = train(cat, table, cfg)
    ml.save(_out_path(args, args.out), training=report.summary())
    print(f"trained meta-learner: validation RMSE {report.best_val_rmse:.6f} "
          f"at epoch {report.best_epoch}/{report.epochs_run}")
    return 0


def _target(cat: Catalog, text: str):
    src = None
    if text.lstrip().startswith("{"):
        src = text
    elif text not in cat and Path(text).is_file():
        src = Path(text).read_text(encoding="utf-8")
    if src is None:
        return text
    try:
        rec = json.loads(src)
    except json.JSONDecodeError as exc:
        raise UsageError(f"target JSON: {exc.msg}") from exc
    return parse_language_record(rec, "target")


def cmd_zeroshot_approximate(args) -> int:
    cat = _catalog(args)
    table = EmbeddingTable.load(args.embeddings)
    ml = MetaLearner.load(args.model)
    if args.supervised:
        supervised = [s for s in Path(args.supervised).read_text(encoding="utf-8").split() if s]
    else:
        supervised = [i for i in table.ids if i in cat]
    policy = NeighborPolicy(k_min=args.k_min, k_max=args.k_max, threshold=args.threshold,
                            weighted=args.weighted)
    sel = select_neighbors(cat, ml, supervised, table, _target(cat, args.target), policy)
    text = json.dumps(sel.to_dict(), sort_keys=True, indent=1) + "\n"
    if args.out == "-":
        sys.stdout.write(text)
    else:
        _write_text(_out_path(args, args.out), text)
    log.info("%s approximated from %s", sel.target, ", ".join(sel.neighbor_ids))
    return 0


def cmd_eval_reconstruct(args) -> int:
    cat = _catalog(args)
    table = EmbeddingTable.load(args.embeddings)
    names = POLICY_NAMES if args.policies == "all" else tuple(p.strip() for p in args.policies.split(","))
    model = MetaLearner.load(args.model) if args.model else None
    if "learned" in names and model is None:
        if args.policies != "all":
            raise UsageError("policy 'learned' needs --model")
        log.warning("no --model given; skipping the learned policy")
        names = tuple(n for n in names if n != "learned")
    seed = _seed(args)
    policies = [Policy(n, seed=seed if n == "random" else None, model=model if n == "learned" else None)
                for n in names]
    report = reconstruct_all(cat, table, policies, args.k)
    out = _out_path(args, args.out)
    fmt = args.format or ("json" if out.suffix == ".json" else "csv")
    export_report(report, out, fmt)
    if args.json_out:
        export_report(report, _out_path(args, args.json_out), "json")
    if len(policies) >= 2:
        for name, area in policy_mse_ordering(report):
            print(f"{name}\t{area:.6f}")
    return 0


# parser ----------------------------------------------------------------

def _add_catalog(p):
    p.add_argument("--catalog", required=True,
                   help=f"combined catalog JSON, a languages file (with --inventories), or {BUILTIN_FIXTURE}")
    p.add_argument("--inventories", help="inventories JSON when --catalog is a languages file")


def build_parser() -> argparse.ArgumentParser:
    fmt = ", ".join(f"{k} v{v}" for k, v in FILE_FORMATS.items())
    parser = _Parser(prog="langspace", description="Language embedding space tools.")
    parser.add_argument("--version", action="version",
                        version=f"langspace {__version__} ({kernels.BACKEND} kernels; formats: {fmt})")
    parser.add_argument("--seed", dest="global_seed", type=int, default=42,
                        help="master seed for stochastic commands (default 42)")
    parser.add_argument("--log-level", default="WARNING",
                        choices=["DEBUG", "INFO", "WARNING", "ERROR"])
    parser.add_argument("--out-dir", help="directory for relative output paths")
    groups = parser.add_subparsers(dest="group", metavar="{catalog,metrics,less,meta,zeroshot,eval}",
                                   parser_class=_Parser)
    groups.required = True

    g = groups.add_parser("catalog", help="catalog utilities").add_subparsers(dest="cmd", parser_class=_Parser)
    g.required = True
    p = g.add_parser("validate", help="load and validate a catalog")
    _add_catalog(p)
    p.add_argument("--out", help="write the canonical catalog JSON here")
    p.set_defaults(func=cmd_catalog_validate)

    g = groups.add_parser("metrics", help="pairwise language distances").add_subparsers(dest="cmd", parser_class=_Parser)
    g.required = True
    p = g.add_parser("compute", help="write tree/map/inv_asp distances as CSV")
    _add_catalog(p)
    p.add_argument("--pairs", required=True, help="file of id pairs (one per line) or 'all'")
    p.add_argument("--out", required=True, help="output CSV ('-' for stdout)")
    p.set_defaults(func=cmd_metrics_compute)

    g = groups.add_parser("less", help="embedding tables").add_subparsers(dest="cmd", parser_class=_Parser)
    g.required = True
    p = g.add_parser("fit", help="fit embeddings to the metric means")
    _add_catalog(p)
    p.add_argument("--dim", type=int, default=16)
    p.add_argument("--epochs", type=int, default=2000)
    p.add_argument("--learning-rate", type=float, default=LessConfig.learning_rate)
    p.add_argument("--pair-sampling", choices=["all_pairs", "uniform_k_per_language"], default="all_pairs")
    p.add_argument("--pairs-per-language", type=int, default=10)
    p.add_argument("--epsilon", type=float, default=1e-8)
    p.add_argument("--weight", type=float, default=1.0)
    p.add_argument("--seed", type=int)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_less_fit)
    p = g.add_parser("synth", help="synthetic ground-truth embeddings")
    _add_catalog(p)
    p.add_argument("--dim", type=int, default=16)
    p.add_argument("--noise", type=float, default=0.05)
    p.add_argument("--seed", type=int)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_less_synth)

    g = groups.add_parser("meta", help="meta-learned distance").add_subparsers(dest="cmd", parser_class=_Parser)
    g.required = True
    p = g.add_parser("train", help="train the distance perceptron")
    _add_catalog(p)
    p.add_argument("--embeddings", required=True)
    p.add_argument("--epochs", type=int, default=TrainConfig.epochs)
    p.add_argument("--learning-rate", type=float, default=TrainConfig.learning_rate)
    p.add_argument("--validation-fraction", type=float, default=TrainConfig.validation_fraction)
    p.add_argument("--patience", type=int, default=TrainConfig.patience)
    p.add_argument("--seed", type=int)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_meta_train)

    g = groups.add_parser("zeroshot", help="unseen-language embeddings").add_subparsers(dest="cmd", parser_class=_Parser)
    g.required = True
    p = g.add_parser("approximate", help="approximate one target's embedding")
    _add_catalog(p)
    p.add_argument("--embeddings", required=True)
    p.add_argument("--model", required=True)
    p.add_argument("--target", required=True, help="language id, inline JSON record, or JSON file")
    p.add_argument("--supervised", help="file of supervised ids (default: every table id)")
    p.add_argument("--k-min", type=int, default=5)
    p.add_argument("--k-max", type=int, default=25)
    p.add_argument("--threshold", type=_threshold, default=AUTO)
    p.add_argument("--weighted", action="store_true", help="inverse-distance weighted mean")
    p.add_argument("--out", default="-")
    p.set_defaults(func=cmd_zeroshot_approximate)

    g = groups.add_parser("eval", help="reconstruction benchmark").add_subparsers(dest="cmd", parser_class=_Parser)
    g.required = True
    p = g.add_parser("reconstruct", help="leave-one-out MSE vs k per policy")
    _add_catalog(p)
    p.add_argument("--embeddings", required=True)
    p.add_argument("--model")
    p.add_argument("--policies", default="all", help="'all' or comma list of " + ",".join(POLICY_NAMES))
    p.add_argument("--k", type=_parse_k, default=list(range(1, 31)), help="k range, e.g. 1..30")
    p.add_argument("--seed", type=int)
    p.add_argument("--format", choices=["csv", "json"])
    p.add_argument("--json-out", help="also write the full JSON report here")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_eval_reconstruct)
    return parser


def run(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=args.log_level, stream=sys.stderr,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (UsageError, *INPUT_ERRORS) as exc:
        msg = exc.args[0] if isinstance(exc, KeyError) and exc.args else exc
        print(f"langspace: error: {msg}", file=sys.stderr)
        return 1
    except Exception as exc:  # noqa: BLE001
        log.debug("internal error", exc_info=True)
        print(f"langspace: internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2


def main() -> None:
    sys.exit(run())
