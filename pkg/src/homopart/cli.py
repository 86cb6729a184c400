"""Command-line interface: one subcommand per pipeline procedure.

Every run prints a single machine-readable JSON summary line to stdout,
writes outputs atomically, and embeds its config snapshot so reruns are
byte-identical. Exit codes: 0 success, 1 usage error, 2 input/validation
error, 3 constraint infeasibility.
"""

from __future__ import annotations

import argparse
import io
import json
import os
import sys
from datetime import date
from pathlib import Path

from . import __version__
from .align import IdentityStore, ScoringScheme, all_pairs_identity
from .audit import audit_partition, difficulty_compare, identity_histograms, synthesize_corpus
from .balance import (
    BalanceSetting,
    BalancedSet,
    hard_balance,
    length_control,
    minimal,
    no_balance,
)
from .corpus import (
    Corpus,
    NEGATIVE,
    POSITIVE,
    apply_metadata,
    cross_class_filter,
    parse_fasta,
    quality_filter,
    read_metadata_sidecar,
    temporal_split,
    write_fasta,
)
from .errors import HomopartError, InfeasibleError, InputError
from .metrics import auprc, auroc, background_auprc, read_scores
from .partition import (
    Partition,
    SplitPair,
    build_cv_sets,
    derive_train_for_test,
    greedy_representative_partition,
)
from .stats import RankTable, friedman, nemenyi

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_INPUT = 2
EXIT_INFEASIBLE = 3


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message: str) -> None:  # type: ignore[override]
        raise _UsageError(message)


def _atomic_write(path: Path, text: str) -> None:
    tmp = path.with_name(path.name + ".tmp")
    with open(tmp, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)
    os.replace(tmp, path)


def _write_json(path: Path, doc: dict) -> None:
    _atomic_write(path, json.dumps(doc, indent=2, sort_keys=True) + "\n")


def _write_fasta(path: Path, corpus: Corpus) -> None:
    buf = io.StringIO()
    write_fasta(corpus, buf)
    _atomic_write(path, buf.getvalue())


def _out_dir(args: argparse.Namespace) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _config_snapshot(args: argparse.Namespace) -> dict:
    # `out` is excluded so identical runs emit identical bytes anywhere
    cfg = {k: v for k, v in vars(args).items()
           if k not in ("func", "out") and v is not None}
    cfg["version"] = __version__
    return cfg


def _scoring_from(args: argparse.Namespace) -> ScoringScheme:
    return ScoringScheme(
        gap_open=getattr(args, "gap_open", 10),
        gap_extend=getattr(args, "gap_extend", 2),
        coverage_min=getattr(args, "cov", 0.25),
    )


def _fmt(x: float) -> str:
    return repr(float(x))


def _load_corpus(path: str, label: str, meta: str | None = None) -> Corpus:
    corpus = parse_fasta(path, label)
    if meta:
        corpus = apply_metadata(corpus, read_metadata_sidecar(meta))
    return corpus


def cmd_synth(args: argparse.Namespace) -> dict:
    corpus = synthesize_corpus(
        families=args.families,
        family_size=args.family_size,
        length_range=(args.min_len, args.max_len),
        mutation_rate=args.mutation_rate,
        negative_fraction=args.negative_fraction,
        seed=args.seed,
    )
    out = _out_dir(args)
    pos = Corpus(corpus.with_label(POSITIVE))
    neg = Corpus(corpus.with_label(NEGATIVE))
    _write_fasta(out / "positives.fasta", pos)
    _write_fasta(out / "negatives.fasta", neg)
    _write_json(out / "run_config.json", _config_snapshot(args))
    return {"command": "synth", "positives": len(pos), "negatives": len(neg)}


def cmd_qc(args: argparse.Namespace) -> dict:
    if not args.pos and not args.neg:
        raise _UsageError("qc needs --pos and/or --neg")
    out = _out_dir(args)
    summary: dict = {"command": "qc"}
    kept_pos = kept_neg = None
    if args.pos:
        kept_pos, dropped = quality_filter(
            _load_corpus(args.pos, POSITIVE), args.min_len, args.max_len
        )
        _atomic_write(out / "qc_pos.tsv",
                      "id\treason\n" + "".join(f"{i}\t{r}\n" for i, r in dropped))
        summary["pos_kept"] = len(kept_pos)
        summary["pos_dropped"] = len(dropped)
    if args.neg:
        kept_neg, dropped = quality_filter(
            _load_corpus(args.neg, NEGATIVE), args.min_len, args.max_len
        )
        if kept_pos is not None and args.cross_class:
            before_ids = set(kept_neg.ids())
            kept_neg = cross_class_filter(kept_pos, kept_neg)
            removed_ids = sorted(before_ids - set(kept_neg.ids()))
            dropped = sorted(dropped + [(i, "cross_class") for i in removed_ids])
            summary["neg_cross_class_removed"] = len(removed_ids)
        _atomic_write(out / "qc_neg.tsv",
                      "id\treason\n" + "".join(f"{i}\t{r}\n" for i, r in dropped))
        summary["neg_kept"] = len(kept_neg)
        summary["neg_dropped"] = len(dropped)
    if kept_pos is not None:
        _write_fasta(out / "pos_kept.fasta", kept_pos)
    if kept_neg is not None:
        _write_fasta(out / "neg_kept.fasta", kept_neg)
    _write_json(out / "run_config.json", _config_snapshot(args))
    return summary


def cmd_pairwise(args: argparse.Namespace) -> dict:
    corpora = [_load_corpus(path, POSITIVE) for path in args.fasta]
    scoring = _scoring_from(args)
    if args.cross:
        if len(corpora) != 2:
            raise _UsageError("--cross requires exactly two --fasta inputs")
        store = all_pairs_identity(corpora[0], scoring, floor=args.floor,
                                   pair_with=corpora[1], workers=args.workers)
    else:
        merged = corpora[0]
        for extra in corpora[1:]:
            merged = merged.merge(extra)
        store = all_pairs_identity(merged, scoring, floor=args.floor,
                                   workers=args.workers)
    out = _out_dir(args)
    buf = io.StringIO()
    buf.write(store.header_line() + "\n")
    for a, b in sorted((a, b) for a, b, _ in store.pairs()):
        buf.write(f"{a}\t{b}\t{store.lookup(a, b):.6f}\n")
    _atomic_write(out / "identities.tsv", buf.getvalue())
    _write_json(out / "run_config.json", _config_snapshot(args))
    return {
        "command": "pairwise",
        "sequences": len(store.universe or ()),
        "stored_pairs": len(store),
        "floor": store.floor,
    }


def cmd_partition(args: argparse.Namespace) -> dict:
    pos = _load_corpus(args.pos, POSITIVE)
    neg = _load_corpus(args.neg, NEGATIVE)
    store = IdentityStore.load(args.store)
    results = build_cv_sets(pos, neg, store, args.k, args.ts, args.tc,
                            args.seed, dataset=args.dataset)
    out = _out_dir(args)
    cfg = _config_snapshot(args)
    written = []
    for (t_s, t_c), part in sorted(results.items()):
        name = f"partition_ts{_fmt(t_s)}_tc{_fmt(t_c)}.json"
        _write_json(out / name, part.to_manifest(config=cfg))
        written.append(name)
    return {"command": "partition", "manifests": len(written), "files": written}


def cmd_verify(args: argparse.Namespace) -> dict:
    part = Partition.load(args.manifest)
    store = IdentityStore.load(args.store)
    report = audit_partition(part, store, bins=args.bins)
    if args.out:
        out = _out_dir(args)
        doc = report.to_json()
        doc["config"] = _config_snapshot(args)
        _write_json(out / "verify_report.json", doc)
    summary = {
        "command": "verify",
        "passed": report.passed,
        "violations": len(report.violations),
        "anchor_failures": len(report.anchor_failures),
    }
    if not report.passed:
        raise _VerificationFailed(summary)
    return summary


class _VerificationFailed(Exception):
    def __init__(self, summary: dict):
        super().__init__("partition failed verification")
        self.summary = summary


def cmd_balance(args: argparse.Namespace) -> dict:
    parts = [Partition.load(m) for m in args.manifest]
    out = _out_dir(args)
    cfg = _config_snapshot(args)
    strategy = args.strategy

    balanced: dict[tuple[int, int], BalancedSet] = {}
    if strategy == "minimal":
        store = IdentityStore.load(args.store) if args.store else None
        if store is None:
            raise _UsageError("--strategy minimal requires --store")
        settings = [
            BalanceSetting(
                name=f"{pi}:{si}",
                split=split,
                t_c=part.thresholds.t_c,
                dataset=part.dataset,
            )
            for pi, part in enumerate(parts)
            for si, split in enumerate(part.splits)
        ]
        result = minimal(settings, store, args.seed, scope=args.scope)
        for key, bset in result.items():
            pi, si = (int(v) for v in key.split(":"))
            balanced[(pi, si)] = bset
    else:
        lengths = None
        if strategy == "length":
            if not (args.pos and args.neg):
                raise _UsageError("--strategy length requires --pos and --neg")
            lengths = _load_corpus(args.pos, POSITIVE).lengths()
            lengths.update(_load_corpus(args.neg, NEGATIVE).lengths())
        for pi, part in enumerate(parts):
            for si, split in enumerate(part.splits):
                seed = args.seed + si
                if strategy == "none":
                    balanced[(pi, si)] = no_balance(split, seed)
                elif strategy == "hard":
                    balanced[(pi, si)] = hard_balance(split, seed)
                else:
                    balanced[(pi, si)] = length_control(split, lengths, seed)

    written = []
    for pi, part in enumerate(parts):
        doc = part.to_manifest(config=cfg)
        for si in range(len(part.splits)):
            bset = balanced[(pi, si)]
            doc["splits"][si]["positives"] = sorted(bset.positives)
            doc["splits"][si]["negatives"] = sorted(bset.negatives)
        doc["strategy"] = {"name": strategy, "seed": args.seed, "scope": args.scope}
        name = f"balanced_{strategy}_{Path(args.manifest[pi]).name}"
        _write_json(out / name, doc)
        written.append(name)
    return {"command": "balance", "strategy": strategy, "manifests": written}


def cmd_split_by_date(args: argparse.Namespace) -> dict:
    corpus = _load_corpus(args.fasta, args.label, meta=args.meta)
    cutoff = date.fromisoformat(args.cutoff)
    before, after = temporal_split(corpus, cutoff)
    out = _out_dir(args)
    _write_fasta(out / "before_or_on.fasta", before)
    _write_fasta(out / "after.fasta", after)
    _write_json(out / "run_config.json", _config_snapshot(args))
    return {
        "command": "split-by-date",
        "cutoff": args.cutoff,
        "before_or_on": len(before),
        "after": len(after),
    }


def cmd_derive_train(args: argparse.Namespace) -> dict:
    part = Partition.load(args.manifest)
    store = IdentityStore.load(args.store)
    if not 0 <= args.test_split < len(part.splits):
        raise InputError(f"test split index {args.test_split} out of range")
    test = part.splits[args.test_split]
    pool_pos: set[str] = set()
    pool_neg: set[str] = set()
    for i, split in enumerate(part.splits):
        if i != args.test_split:
            pool_pos |= split.positives
            pool_neg |= split.negatives
    train = derive_train_for_test(test, SplitPair(pool_pos, pool_neg), store,
                                  args.ts[0], args.train_tc)
    out = _out_dir(args)
    doc = {
        "version": 1,
        "params": {
            "t_s": args.ts[0],
            "train_t_c": args.train_tc,
            "test_split": args.test_split,
            "source_manifest": Path(args.manifest).name,
        },
        "train": {
            "positives": sorted(train.positives),
            "negatives": sorted(train.negatives),
        },
        "config": _config_snapshot(args),
    }
    _write_json(out / "train_set.json", doc)
    return {
        "command": "derive-train",
        "positives": len(train.positives),
        "negatives": len(train.negatives),
    }


def cmd_baseline_partition(args: argparse.Namespace) -> dict:
    pos = _load_corpus(args.pos, POSITIVE)
    neg = _load_corpus(args.neg, NEGATIVE)
    store = IdentityStore.load(args.store)
    part = greedy_representative_partition(pos, neg, store, args.ts[0],
                                           args.k, args.seed)
    out = _out_dir(args)
    _write_json(out / "baseline_partition.json",
                part.to_manifest(config=_config_snapshot(args)))
    return {
        "command": "baseline-partition",
        "splits": [
            {"positives": len(s.positives), "negatives": len(s.negatives)}
            for s in part.splits
        ],
    }


def cmd_hist(args: argparse.Namespace) -> dict:
    set_a = _load_corpus(args.set_a, POSITIVE)
    set_b = _load_corpus(args.set_b, NEGATIVE)
    if args.exact:
        merged = set_a.merge(set_b)
        hist = identity_histograms(set_a.ids(), set_b.ids(), corpus=merged,
                                   scoring=_scoring_from(args), bins=args.bins)
    else:
        if not args.store:
            raise _UsageError("hist needs --store (or --exact to recompute)")
        store = IdentityStore.load(args.store)
        hist = identity_histograms(set_a.ids(), set_b.ids(), store=store,
                                   bins=args.bins)
    out = _out_dir(args)
    _atomic_write(out / "hist.csv", "\n".join(hist.csv_rows()) + "\n")
    _write_json(out / "run_config.json", _config_snapshot(args))
    return {
        "command": "hist",
        "pairs": sum(hist.all_vs_all),
        "profiled": sum(hist.maximum),
    }


def cmd_evaluate(args: argparse.Namespace) -> dict:
    instances = read_scores(args.scores)
    summary = {
        "command": "evaluate",
        "n": len(instances),
        "auroc": auroc(instances),
        "auprc": auprc(instances),
        "background_auprc": background_auprc(instances),
    }
    if args.out:
        out = _out_dir(args)
        doc = dict(summary)
        doc["config"] = _config_snapshot(args)
        _write_json(out / "metrics.json", doc)
    return summary


def cmd_stats(args: argparse.Namespace) -> dict:
    table = RankTable.from_csv(args.table)
    chi2_stat, p = friedman(table)
    result = nemenyi(table, alpha=args.alpha)
    summary = {
        "command": "stats",
        "friedman_chi2": chi2_stat,
        "friedman_p": p,
        "critical_difference": result.critical_difference,
        "average_ranks": result.average_ranks,
        "significant_pairs": [list(p) for p in result.significant_pairs],
    }
    if args.out:
        out = _out_dir(args)
        doc = dict(summary)
        doc["config"] = _config_snapshot(args)
        _write_json(out / "stats.json", doc)
    return summary


def cmd_difficulty(args: argparse.Namespace) -> dict:
    store = IdentityStore.load(args.store)
    train = (
        _load_corpus(args.train_pos, POSITIVE).ids(),
        _load_corpus(args.train_neg, NEGATIVE).ids(),
    )
    test = (
        _load_corpus(args.test_pos, POSITIVE).ids(),
        _load_corpus(args.test_neg, NEGATIVE).ids(),
    )
    verdict, p = difficulty_compare(train, test, store, alpha=args.alpha)
    return {"command": "difficulty", "verdict": verdict, "p": p, "alpha": args.alpha}


def _add_scoring_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--gap-open", type=int, default=10)
    p.add_argument("--gap-extend", type=int, default=2)
    p.add_argument("--cov", type=float, default=0.25,
                   help="minimum alignment coverage of the shorter sequence")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="homopart", description=__doc__)
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="subcommand", required=True)

    p = sub.add_parser("synth", help="generate a seeded synthetic two-class corpus")
    p.add_argument("--families", type=int, required=True)
    p.add_argument("--family-size", type=int, required=True)
    p.add_argument("--min-len", type=int, default=60)
    p.add_argument("--max-len", type=int, default=400)
    p.add_argument("--mutation-rate", type=float, default=0.2)
    p.add_argument("--negative-fraction", type=float, default=0.5)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("qc", help="quality-filter FASTA inputs")
    p.add_argument("--pos")
    p.add_argument("--neg")
    p.add_argument("--min-len", type=int, default=50)
    p.add_argument("--max-len", type=int, default=1000)
    p.add_argument("--cross-class", action=argparse.BooleanOptionalAction, default=True,
                   help="also drop negatives in a substring relation with a positive")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_qc)

    p = sub.add_parser("pairwise", help="build the all-vs-all identity store")
    p.add_argument("--fasta", action="append", required=True)
    p.add_argument("--cross", action="store_true",
                   help="pair across two inputs instead of within the union")
    p.add_argument("--floor", type=float, default=0.25)
    p.add_argument("--workers", type=int, default=None)
    _add_scoring_flags(p)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_pairwise)

    p = sub.add_parser("partition", help="build threshold-constrained CV partitions")
    p.add_argument("--pos", required=True)
    p.add_argument("--neg", required=True)
    p.add_argument("--store", required=True)
    p.add_argument("--k", type=int, default=3)
    p.add_argument("--ts", type=float, action="append", required=True)
    p.add_argument("--tc", type=float, action="append", required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--dataset", default="")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_partition)

    p = sub.add_parser("verify", help="audit a partition manifest against its thresholds")
    p.add_argument("--manifest", required=True)
    p.add_argument("--store", required=True)
    p.add_argument("--bins", type=int, default=50)
    p.add_argument("--out")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("balance", help="apply a training-set strategy to manifests")
    p.add_argument("--manifest", action="append", required=True)
    p.add_argument("--strategy", choices=["none", "hard", "length", "minimal"],
                   required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--pos")
    p.add_argument("--neg")
    p.add_argument("--store")
    p.add_argument("--scope", choices=["global", "per_dataset"], default="global")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_balance)

    p = sub.add_parser("split-by-date", help="temporal holdout at a cutoff date")
    p.add_argument("--fasta", required=True)
    p.add_argument("--label", choices=[POSITIVE, NEGATIVE], default=POSITIVE)
    p.add_argument("--cutoff", required=True, metavar="YYYY-MM-DD")
    p.add_argument("--meta", help="JSON sidecar mapping id -> {created, source}")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_split_by_date)

    p = sub.add_parser("derive-train", help="filter a training pool against a test split")
    p.add_argument("--manifest", required=True)
    p.add_argument("--test-split", type=int, required=True)
    p.add_argument("--store", required=True)
    p.add_argument("--ts", type=float, action="append", required=True)
    p.add_argument("--train-tc", type=float, default=0.0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_derive_train)

    p = sub.add_parser("baseline-partition",
                       help="greedy representative baseline (exhibits violations)")
    p.add_argument("--pos", required=True)
    p.add_argument("--neg", required=True)
    p.add_argument("--store", required=True)
    p.add_argument("--ts", type=float, action="append", required=True)
    p.add_argument("--k", type=int, default=3)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_baseline_partition)

    p = sub.add_parser("hist", help="identity distribution histograms between two sets")
    p.add_argument("--set-a", required=True)
    p.add_argument("--set-b", required=True)
    p.add_argument("--store")
    p.add_argument("--exact", action="store_true",
                   help="recompute identities instead of reading the store")
    p.add_argument("--workers", type=int, default=None)
    _add_scoring_flags(p)
    p.add_argument("--bins", type=int, default=50)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_hist)

    p = sub.add_parser("evaluate", help="AUROC/AUPRC from a scores file")
    p.add_argument("--scores", required=True)
    p.add_argument("--out")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("stats", help="Friedman + Nemenyi on a rank table CSV")
    p.add_argument("--table", required=True)
    p.add_argument("--alpha", type=float, choices=[0.05, 0.01], default=0.05)
    p.add_argument("--out")
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("difficulty", help="compare inter-class difficulty of two sets")
    p.add_argument("--train-pos", required=True)
    p.add_argument("--train-neg", required=True)
    p.add_argument("--test-pos", required=True)
    p.add_argument("--test-neg", required=True)
    p.add_argument("--store", required=True)
    p.add_argument("--alpha", type=float, choices=[0.05, 0.01], default=0.05)
    p.set_defaults(func=cmd_difficulty)

    return parser


def run(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    try:
        summary = args.func(args)
    except _UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except _VerificationFailed as exc:
        print(json.dumps(exc.summary, sort_keys=True))
        print("error: partition failed verification", file=sys.stderr)
        return EXIT_INPUT
    except InfeasibleError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except (InputError, HomopartError, OSError, json.JSONDecodeError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    print(json.dumps(summary, sort_keys=True))
    return EXIT_OK


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
