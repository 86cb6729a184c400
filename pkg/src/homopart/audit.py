"""Independent partition verification, identity histograms, and test corpora."""

from __future__ import annotations

import json
import random
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .align import IdentityStore, ScoringScheme, identity
from .corpus import CANONICAL_ALPHABET, Corpus, NEGATIVE, POSITIVE, SequenceRecord
from .errors import InputError
from .partition import Partition
from .stats import mann_whitney_u

TRAIN_HARDER = "train_harder"
TEST_HARDER = "test_harder"
NO_SIG = "no_sig"


@dataclass
class HistogramSet:
    """Binned identity distributions: every cross pair, and per-sequence maxima."""

    bin_edges: list[float]
    all_vs_all: list[int]
    maximum: list[int]
    label_a: str = ""
    label_b: str = ""

    def csv_rows(self) -> list[str]:
        rows = ["bin_lo,bin_hi,all_vs_all,maximum"]
        for i in range(len(self.all_vs_all)):
            rows.append(
                f"{self.bin_edges[i]!r},{self.bin_edges[i + 1]!r},"
                f"{self.all_vs_all[i]},{self.maximum[i]}"
            )
        return rows

    def save_csv(self, dest: str | Path) -> None:
        with open(dest, "w", encoding="utf-8", newline="\n") as fh:
            fh.write("\n".join(self.csv_rows()) + "\n")


@dataclass(frozen=True)
class Violation:
    id_a: str
    split_a: int
    id_b: str
    split_b: int
    label: str
    identity: float


@dataclass
class ViolationReport:
    """Audit result for one partition: offending pairs, anchor failures, histograms."""

    t_s: float
    t_c: float
    violations: list[Violation]
    anchor_failures: list[str]
    histograms: dict[str, HistogramSet] = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return not self.violations and not self.anchor_failures

    def to_json(self) -> dict:
        return {
            "version": 1,
            "t_s": self.t_s,
            "t_c": self.t_c,
            "passed": self.passed,
            "violations": [
                {
                    "id_a": v.id_a,
                    "split_a": v.split_a,
                    "id_b": v.id_b,
                    "split_b": v.split_b,
                    "class": v.label,
                    "identity": v.identity,
                }
                for v in self.violations
            ],
            "anchor_failures": list(self.anchor_failures),
            "histograms": {
                name: {
                    "bin_edges": h.bin_edges,
                    "all_vs_all": h.all_vs_all,
                    "maximum": h.maximum,
                }
                for name, h in sorted(self.histograms.items())
            },
        }

    def save(self, dest: str | Path) -> None:
        with open(dest, "w", encoding="utf-8", newline="\n") as fh:
            json.dump(self.to_json(), fh, indent=2, sort_keys=True)
            fh.write("\n")


def _bin_edges(bins: int) -> np.ndarray:
    return np.linspace(0.0, 1.0, bins + 1)


def _histogram(values: Sequence[float], bins: int) -> list[int]:
    counts, _ = np.histogram(np.asarray(list(values), dtype=float),
                             bins=_bin_edges(bins))
    return [int(c) for c in counts]


def _cross_split_scan(
    splits: Sequence[set[str]],
    store: IdentityStore,
    t_s: float,
    label: str,
    bins: int,
) -> tuple[list[Violation], HistogramSet]:
    """Exhaustive same-class cross-split audit via the floored store.

    Sound because absent pairs sit below the floor, which is <= every tested
    threshold (enforced by check_threshold).
    """
    split_of = {x: i for i, s in enumerate(splits) for x in s}
    n_total = sum(len(s) for s in splits)
    cross_pairs = (n_total * (n_total - 1)) // 2
    for s in splits:
        cross_pairs -= (len(s) * (len(s) - 1)) // 2

    violations = []
    stored_values = []
    best = {x: 0.0 for x in split_of}
    for a, b, ident in store.pairs():
        ia, ib = split_of.get(a), split_of.get(b)
        if ia is None or ib is None or ia == ib:
            continue
        stored_values.append(ident)
        if ident > best[a]:
            best[a] = ident
        if ident > best[b]:
            best[b] = ident
        if ident > t_s:
            if a > b:
                a, b, ia, ib = b, a, ib, ia
            violations.append(Violation(a, ia, b, ib, label, ident))

    all_counts = _histogram(stored_values, bins)
    all_counts[0] += cross_pairs - len(stored_values)  # sub-floor pairs read as 0
    hist = HistogramSet(_bin_edges(bins).tolist(), all_counts,
                        _histogram(best.values(), bins), label, label)
    violations.sort(key=lambda v: (v.id_a, v.id_b))
    return violations, hist


def audit_partition(partition: Partition, store: IdentityStore,
                    bins: int = 50) -> ViolationReport:
    """Re-verify a partition from scratch: cross-split same-class pairs above
    t_s, negatives lacking a >= t_c in-split positive anchor, and the three
    identity histograms (positive inter-split, negative inter-split,
    inter-class in-split)."""
    t_s = partition.thresholds.t_s
    t_c = partition.thresholds.t_c
    store.check_threshold(t_s)
    if t_c > 0.0:
        store.check_threshold(t_c)
    all_ids = partition.all_positive_ids() | partition.all_negative_ids()
    store.check_ids(all_ids)

    pos_splits = [s.positives for s in partition.splits]
    neg_splits = [s.negatives for s in partition.splits]
    pos_violations, pos_hist = _cross_split_scan(pos_splits, store, t_s, POSITIVE, bins)
    neg_violations, neg_hist = _cross_split_scan(neg_splits, store, t_s, NEGATIVE, bins)

    pos_split_of = {p: i for i, s in enumerate(pos_splits) for p in s}
    anchor_best: dict[str, float] = {}
    cross_class_values: list[float] = []
    neg_split_of = {x: i for i, s in enumerate(neg_splits) for x in s}
    in_split_pairs = sum(len(p) * len(n) for p, n in zip(pos_splits, neg_splits))
    for n in neg_split_of:
        anchor_best[n] = 0.0
    for a, b, ident in store.pairs():
        if a in neg_split_of and b in pos_split_of:
            neg, pos = a, b
        elif b in neg_split_of and a in pos_split_of:
            neg, pos = b, a
        else:
            continue
        if neg_split_of[neg] != pos_split_of[pos]:
            continue
        cross_class_values.append(ident)
        if ident > anchor_best[neg]:
            anchor_best[neg] = ident

    anchor_failures = []
    if t_c > 0.0:
        anchor_failures = sorted(n for n, v in anchor_best.items() if v < t_c)
    cc_counts = _histogram(cross_class_values, bins)
    cc_counts[0] += in_split_pairs - len(cross_class_values)
    cc_hist = HistogramSet(_bin_edges(bins).tolist(), cc_counts,
                           _histogram(anchor_best.values(), bins),
                           NEGATIVE, POSITIVE)

    return ViolationReport(
        t_s=t_s,
        t_c=t_c,
        violations=pos_violations + neg_violations,
        anchor_failures=anchor_failures,
        histograms={
            "positive_inter_split": pos_hist,
            "negative_inter_split": neg_hist,
            "inter_class_in_split": cc_hist,
        },
    )


def identity_histograms(
    set_a: Sequence[str],
    set_b: Sequence[str],
    store: IdentityStore | None = None,
    corpus: Corpus | None = None,
    scoring: ScoringScheme | None = None,
    bins: int = 50,
) -> HistogramSet:
    """All-vs-all and per-id-of-A maximum identity histograms between two sets.

    With a corpus (and optional scoring), identities are recomputed exactly,
    giving the full distribution; with only a store, sub-floor pairs read as 0.
    """
    if not set_a or not set_b:
        raise InputError("both sets must be non-empty")
    values: list[float] = []
    best = {a: 0.0 for a in set_a}
    if corpus is not None:
        scoring = scoring or ScoringScheme()
        seen: set[tuple[str, str]] = set()
        for a in set_a:
            for b in set_b:
                if a == b:
                    continue
                key = (a, b) if a < b else (b, a)
                if key in seen:
                    continue
                seen.add(key)
                ident = identity(corpus[a].residues, corpus[b].residues, scoring)
                values.append(ident)
                if ident > best[a]:
                    best[a] = ident
                if b in best and ident > best[b]:
                    best[b] = ident
    elif store is not None:
        store.check_ids(set_a)
        store.check_ids(set_b)
        a_set, b_set = set(set_a), set(set_b)
        seen = set()
        for a in set_a:
            for other, ident in store.neighbors(a):
                if other not in b_set or other == a:
                    continue
                if ident > best[a]:
                    best[a] = ident
                key = (a, other) if a < other else (other, a)
                if key in seen:
                    continue
                seen.add(key)
                values.append(ident)
        # unordered {a, b} pairs: ordered count minus the doubly-counted ones
        overlap = len(a_set & b_set)
        n_pairs = len(a_set) * len(b_set) - overlap - overlap * (overlap - 1) // 2
        counts = _histogram(values, bins)
        counts[0] += n_pairs - len(values)  # sub-floor pairs read as 0
        return HistogramSet(_bin_edges(bins).tolist(), counts,
                            _histogram(best.values(), bins))
    else:
        raise InputError("need either a store or a corpus")
    return HistogramSet(_bin_edges(bins).tolist(), _histogram(values, bins),
                        _histogram(best.values(), bins))


def difficulty_compare(
    train: tuple[Sequence[str], Sequence[str]],
    test: tuple[Sequence[str], Sequence[str]],
    store: IdentityStore,
    alpha: float = 0.05,
) -> tuple[str, float]:
    """Compare per-negative best in-set anchor identity between two sets.

    Each side is (positive ids, negative ids). Returns (verdict, p) where the
    verdict is which set is harder (higher inter-class similarity) at `alpha`.
    """
    profiles = []
    for pos_ids, neg_ids in (train, test):
        if not pos_ids or not neg_ids:
            raise InputError("both sets need both classes")
        pos_set = set(pos_ids)
        prof = []
        for n in neg_ids:
            prof.append(max(
                (ident for other, ident in store.neighbors(n) if other in pos_set),
                default=0.0,
            ))
        profiles.append(prof)
    _, p = mann_whitney_u(profiles[0], profiles[1], two_sided=True)
    if p >= alpha:
        return NO_SIG, p
    med = float(np.median(profiles[0])) - float(np.median(profiles[1]))
    if med == 0.0:
        med = float(np.mean(profiles[0])) - float(np.mean(profiles[1]))
    if med > 0:
        return TRAIN_HARDER, p
    if med < 0:
        return TEST_HARDER, p
    return NO_SIG, p


def synthesize_corpus(
    families: int,
    family_size: int,
    length_range: tuple[int, int] = (60, 400),
    mutation_rate: float = 0.2,
    negative_fraction: float = 0.5,
    seed: int = 0,
) -> Corpus:
    """Generate a seeded family-structured two-class corpus.

    Member 0 of each family is the founder; each other member diverges by a
    per-residue substitution rate drawn up to `mutation_rate`, plus an
    occasional short indel. Labels are independent per member, so families mix
    classes.
    """
    if families < 1 or family_size < 1:
        raise InputError("families and family_size must be positive")
    if not 0.0 <= mutation_rate <= 1.0:
        raise InputError("mutation_rate must lie in [0, 1]")
    lo, hi = length_range
    if not 1 <= lo <= hi:
        raise InputError("invalid length range")
    rng = random.Random(seed)
    alphabet = CANONICAL_ALPHABET
    records = []
    for fam in range(families):
        founder = "".join(rng.choice(alphabet) for _ in range(rng.randint(lo, hi)))
        for member in range(family_size):
            if member == 0:
                residues = founder
            else:
                rate = rng.uniform(0.0, mutation_rate)
                chars = []
                for ch in founder:
                    if rng.random() < rate:
                        chars.append(rng.choice(alphabet.replace(ch, "")))
                    else:
                        chars.append(ch)
                if mutation_rate > 0.0 and rng.random() < 0.25 and len(chars) > 4:
                    span = rng.randint(1, 3)
                    pos = rng.randrange(len(chars) - span)
                    if rng.random() < 0.5:
                        del chars[pos : pos + span]
                    else:
                        chars[pos:pos] = [rng.choice(alphabet) for _ in range(span)]
                residues = "".join(chars)
            label = NEGATIVE if rng.random() < negative_fraction else POSITIVE
            records.append(SequenceRecord(
                f"f{fam:03d}m{member:02d}", residues, label, source=f"fam{fam:03d}"
            ))
    return Corpus(records, {"synthesized": True, "seed": seed})
