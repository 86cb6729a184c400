"""Threshold-constrained k-way partitioning of two-class sequence sets.

The pipeline: capped single-linkage clustering of positives, removal of
cross-split pairs above the inter-split ceiling, greedy re-addition of removed
sequences, then anchored assignment of negatives (fresh at the highest
inter-class threshold, incremental at each lower one).
"""

from __future__ import annotations

import json
import math
import random
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

from .align import IdentityStore
from .corpus import Corpus, NEGATIVE, POSITIVE
from .errors import InputError


@dataclass(frozen=True)
class Thresholds:
    """Inter-split ceiling (t_s) and inter-class pairing floor (t_c)."""

    t_s: float
    t_c: float

    def __post_init__(self) -> None:
        if not 0.0 < self.t_s <= 1.0:
            raise InputError(f"t_s must lie in (0, 1], got {self.t_s}")
        if not 0.0 <= self.t_c < 1.0:
            raise InputError(f"t_c must lie in [0, 1), got {self.t_c}")


@dataclass
class RemovalRecord:
    """A sequence evicted for cross-split similarity, and whether it returned."""

    id: str
    label: str
    violations: int
    restored: bool = False
    origin_split: int = -1


@dataclass
class SplitPair:
    positives: set[str]
    negatives: set[str]


@dataclass
class Partition:
    """k splits of positive and negative ids plus the settings that built them."""

    k: int
    splits: list[SplitPair]
    thresholds: Thresholds
    seed: int
    dataset: str = ""
    removed: list[RemovalRecord] = field(default_factory=list)
    unassigned_negatives: list[str] = field(default_factory=list)

    def all_positive_ids(self) -> set[str]:
        return set().union(*(s.positives for s in self.splits)) if self.splits else set()

    def all_negative_ids(self) -> set[str]:
        return set().union(*(s.negatives for s in self.splits)) if self.splits else set()

    def to_manifest(self, config: dict | None = None) -> dict:
        doc: dict = {
            "version": 1,
            "params": {
                "k": self.k,
                "t_s": self.thresholds.t_s,
                "t_c": self.thresholds.t_c,
                "seed": self.seed,
                "dataset": self.dataset,
            },
            "splits": [
                {
                    "index": i,
                    "positives": sorted(s.positives),
                    "negatives": sorted(s.negatives),
                }
                for i, s in enumerate(self.splits)
            ],
            "removed": [
                {
                    "id": r.id,
                    "class": r.label,
                    "violations": r.violations,
                    "restored": r.restored,
                }
                for r in sorted(self.removed, key=lambda r: r.id)
            ],
            "unassigned_negatives": sorted(self.unassigned_negatives),
        }
        if config is not None:
            doc["config"] = config
        return doc

    def save(self, dest: str | Path, config: dict | None = None) -> None:
        with open(dest, "w", encoding="utf-8", newline="\n") as fh:
            json.dump(self.to_manifest(config), fh, indent=2, sort_keys=True)
            fh.write("\n")

    @classmethod
    def from_manifest(cls, doc: dict) -> "Partition":
        params = doc["params"]
        splits = [
            SplitPair(set(s["positives"]), set(s["negatives"]))
            for s in sorted(doc["splits"], key=lambda s: s["index"])
        ]
        removed = [
            RemovalRecord(r["id"], r["class"], r["violations"], r["restored"])
            for r in doc.get("removed", [])
        ]
        return cls(
            k=params["k"],
            splits=splits,
            thresholds=Thresholds(params["t_s"], params["t_c"]),
            seed=params["seed"],
            dataset=params.get("dataset", ""),
            removed=removed,
            unassigned_negatives=list(doc.get("unassigned_negatives", [])),
        )

    @classmethod
    def load(cls, path: str | Path) -> "Partition":
        with open(path, "r", encoding="utf-8") as fh:
            return cls.from_manifest(json.load(fh))


@dataclass
class NegativeAssignment:
    """Negative split sets produced at one t_c level; feeds the next lower level."""

    t_c: float
    splits: list[set[str]]
    removed: list[RemovalRecord]
    unassigned: list[str]


def _ids(collection: Corpus | Iterable[str]) -> list[str]:
    if isinstance(collection, Corpus):
        return collection.ids()
    return list(collection)


class _UnionFind:
    def __init__(self, items: Sequence[str]):
        self.parent = {x: x for x in items}
        self.size = {x: 1 for x in items}

    def find(self, x: str) -> str:
        root = x
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[x] != root:
            self.parent[x], x = root, self.parent[x]
        return root

    def union(self, a: str, b: str) -> None:
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return
        if self.size[ra] < self.size[rb]:
            ra, rb = rb, ra
        self.parent[rb] = ra
        self.size[ra] += self.size[rb]


def cluster_positives(positives: Corpus | Iterable[str], store: IdentityStore,
                      k: int) -> list[set[str]]:
    """Single-linkage clustering with per-cluster size cap S = ceil(n/k).

    Stored pairs are scanned in descending identity order (ties by
    lexicographic pair); a merge that would exceed S is skipped. If more than
    k clusters remain, the two smallest are merged repeatedly (sizes above S
    are then permitted). Returns exactly k clusters, largest first.
    """
    ids = sorted(_ids(positives))
    n = len(ids)
    if k < 2:
        raise InputError("k must be at least 2")
    if n < k:
        raise InputError(f"cannot make {k} splits from {n} positives")
    cap = math.ceil(n / k)
    id_set = set(ids)

    pairs = [
        (ident, a, b)
        for a, b, ident in store.pairs()
        if a in id_set and b in id_set
    ]
    pairs.sort(key=lambda t: (-t[0], t[1], t[2]))

    uf = _UnionFind(ids)
    for _, a, b in pairs:
        ra, rb = uf.find(a), uf.find(b)
        if ra != rb and uf.size[ra] + uf.size[rb] <= cap:
            uf.union(a, b)

    groups: dict[str, list[str]] = {}
    for x in ids:
        groups.setdefault(uf.find(x), []).append(x)
    clusters = sorted(groups.values(), key=lambda c: (len(c), min(c)))

    # Fold the smallest clusters together until only k remain.
    while len(clusters) > k:
        merged = sorted(clusters[0] + clusters[1])
        clusters = clusters[2:]
        clusters.append(merged)
        clusters.sort(key=lambda c: (len(c), min(c)))
    while len(clusters) < k:  # only reachable when the cap forces < k groups
        clusters.insert(0, [])

    clusters.sort(key=lambda c: (-len(c), min(c) if c else ""))
    return [set(c) for c in clusters]


def remove_inter_split_violations(
    splits: Sequence[set[str]],
    store: IdentityStore,
    t_s: float,
    label: str,
    rng: random.Random | None = None,
) -> tuple[list[set[str]], list[RemovalRecord]]:
    """Evict one member of every cross-split pair with identity strictly above t_s.

    Per-sequence violation counts are taken once on the initial state; pairs
    are processed in descending total-violation order (ties lexicographic),
    removing the member in the currently larger split (seeded random on size
    ties).
    """
    store.check_threshold(t_s)
    rng = rng or random.Random(0)
    live = [set(s) for s in splits]
    split_of = {x: i for i, s in enumerate(live) for x in s}

    violating: list[tuple[str, str]] = []
    counts: dict[str, int] = {}
    for a, b, ident in store.pairs():
        ia, ib = split_of.get(a), split_of.get(b)
        if ia is None or ib is None or ia == ib or ident <= t_s:
            continue
        violating.append((a, b))
        counts[a] = counts.get(a, 0) + 1
        counts[b] = counts.get(b, 0) + 1

    violating.sort(key=lambda p: (-(counts[p[0]] + counts[p[1]]), p[0], p[1]))
    removed: list[RemovalRecord] = []
    gone: set[str] = set()
    for a, b in violating:
        if a in gone or b in gone:
            continue
        ia, ib = split_of[a], split_of[b]
        if len(live[ia]) > len(live[ib]):
            victim = a
        elif len(live[ib]) > len(live[ia]):
            victim = b
        else:
            victim = rng.choice([a, b])
        gone.add(victim)
        live[split_of[victim]].discard(victim)
        removed.append(RemovalRecord(victim, label, counts[victim],
                                     origin_split=split_of[victim]))
    return live, removed


def readd_removed(
    splits: Sequence[set[str]],
    removed: Sequence[RemovalRecord],
    store: IdentityStore,
    t_s: float,
) -> tuple[list[set[str]], list[RemovalRecord]]:
    """Re-insert evicted sequences, fewest recorded violations first, whenever
    doing so creates no cross-split pair above t_s against the current state."""
    store.check_threshold(t_s)
    live = [set(s) for s in splits]
    split_of = {x: i for i, s in enumerate(live) for x in s}
    records = list(removed)
    for rec in sorted(records, key=lambda r: (r.violations, r.id)):
        if rec.restored:
            continue
        home = rec.origin_split
        conflict = any(
            ident > t_s and split_of.get(other, home) != home
            for other, ident in store.neighbors(rec.id)
        )
        if not conflict:
            live[home].add(rec.id)
            split_of[rec.id] = home
            rec.restored = True
    return live, records


def _anchor_identity(
    negatives: Sequence[str],
    pos_splits: Sequence[set[str]],
    store: IdentityStore,
) -> dict[str, list[float]]:
    """Per negative, the best identity to a positive in each split."""
    pos_split_of = {p: i for i, s in enumerate(pos_splits) for p in s}
    anchors = {n: [0.0] * len(pos_splits) for n in negatives}
    for n in negatives:
        row = anchors[n]
        for other, ident in store.neighbors(n):
            i = pos_split_of.get(other)
            if i is not None and ident > row[i]:
                row[i] = ident
    return anchors


def assign_negatives(
    pos_splits: Sequence[set[str]],
    negatives: Corpus | Iterable[str],
    store: IdentityStore,
    thresholds: Thresholds,
    rng: random.Random | None = None,
    base: NegativeAssignment | None = None,
) -> NegativeAssignment:
    """Distribute negatives to splits holding a >= t_c positive anchor.

    Candidates with a single qualifying split go first, then the rest in
    ascending candidate count; multi-candidate negatives land in the candidate
    split currently holding the fewest negatives. Without a base the result is
    cleaned by violation removal plus re-addition; with a base (a prior
    assignment at a strictly higher t_c) only newly qualifying negatives are
    placed, each checked against t_s before committing.
    """
    t_s, t_c = thresholds.t_s, thresholds.t_c
    store.check_threshold(t_s)
    if t_c > 0.0:
        store.check_threshold(t_c)
    rng = rng or random.Random(0)
    k = len(pos_splits)
    neg_ids = sorted(_ids(negatives))
    anchors = _anchor_identity(neg_ids, pos_splits, store)

    if base is not None:
        if len(base.splits) != k:
            raise InputError("base assignment has a different split count")
        if base.t_c <= t_c:
            raise InputError(
                f"base t_c ({base.t_c}) must be strictly higher than t_c ({t_c})"
            )
        assigned = set().union(*base.splits) if base.splits else set()
        if not assigned <= set(neg_ids):
            raise InputError("base assignment contains ids outside the negative set")

    def candidates(n: str) -> list[int]:
        if t_c == 0.0:
            return list(range(k))
        return [i for i in range(k) if anchors[n][i] >= t_c]

    if base is None:
        neg_splits: list[set[str]] = [set() for _ in range(k)]
        unplaced: list[str] = []
        order = []
        for n in neg_ids:
            cand = candidates(n)
            if not cand:
                unplaced.append(n)
            else:
                order.append((len(cand), n, cand))
        order.sort(key=lambda t: (t[0], t[1]))
        for _, n, cand in order:
            target = min(cand, key=lambda i: (len(neg_splits[i]), i))
            neg_splits[target].add(n)
        cleaned, removed = remove_inter_split_violations(neg_splits, store, t_s,
                                                         NEGATIVE, rng)
        cleaned, removed = readd_removed(cleaned, removed, store, t_s)
        placed = set().union(*cleaned) if cleaned else set()
        removed_ids = {r.id for r in removed if not r.restored}
        unassigned = sorted(set(neg_ids) - placed - removed_ids)
        return NegativeAssignment(t_c, cleaned, removed, unassigned)

    # Incremental mode: keep the base placement, add only negatives that
    # qualify now but did not at the base threshold.
    neg_splits = [set(s) for s in base.splits]
    neg_split_of = {x: i for i, s in enumerate(neg_splits) for x in s}

    def qualifies_at(n: str, level: float) -> bool:
        return level == 0.0 or max(anchors[n]) >= level

    fresh = [
        n for n in neg_ids
        if n not in neg_split_of and qualifies_at(n, t_c) and not qualifies_at(n, base.t_c)
    ]
    order = sorted(((len(candidates(n)), n) for n in fresh), key=lambda t: (t[0], t[1]))
    for _, n in order:
        cand = candidates(n)
        target = min(cand, key=lambda i: (len(neg_splits[i]), i))
        conflict = any(
            ident > t_s and neg_split_of.get(other, target) != target
            for other, ident in store.neighbors(n)
        )
        if conflict:
            continue
        neg_splits[target].add(n)
        neg_split_of[n] = target
    removed = [
        RemovalRecord(r.id, r.label, r.violations, r.restored, r.origin_split)
        for r in base.removed
    ]
    removed_ids = {r.id for r in removed if not r.restored}
    placed = set().union(*neg_splits) if neg_splits else set()
    unassigned = sorted(set(neg_ids) - placed - removed_ids)
    return NegativeAssignment(t_c, neg_splits, removed, unassigned)


def build_cv_sets(
    positives: Corpus | Iterable[str],
    negatives: Corpus | Iterable[str],
    store: IdentityStore,
    k: int,
    t_s_list: Sequence[float],
    t_c_list: Sequence[float],
    seed: int,
    dataset: str = "",
) -> dict[tuple[float, float], Partition]:
    """Build one audited partition per (t_s, t_c) grid point.

    Positives are clustered once; per t_s they are cleaned and re-added; per
    t_c (descending, so 0 comes last) negatives are assigned fresh at the
    highest level and incrementally below it.
    """
    if not t_s_list or not t_c_list:
        raise InputError("t_s_list and t_c_list must be non-empty")
    pos_ids = _ids(positives)
    neg_ids = _ids(negatives)
    store.check_ids(pos_ids)
    store.check_ids(neg_ids)
    clusters = cluster_positives(pos_ids, store, k)

    results: dict[tuple[float, float], Partition] = {}
    for t_s in sorted(set(t_s_list), reverse=True):
        rng_pos = random.Random(f"{seed}|pos|{t_s!r}")
        pos_splits, pos_removed = remove_inter_split_violations(
            clusters, store, t_s, POSITIVE, rng_pos
        )
        pos_splits, pos_removed = readd_removed(pos_splits, pos_removed, store, t_s)
        prev: NegativeAssignment | None = None
        for t_c in sorted(set(t_c_list), reverse=True):
            rng_neg = random.Random(f"{seed}|neg|{t_s!r}|{t_c!r}")
            na = assign_negatives(
                pos_splits, neg_ids, store, Thresholds(t_s, t_c), rng_neg, base=prev
            )
            results[(t_s, t_c)] = Partition(
                k=k,
                splits=[
                    SplitPair(set(pos_splits[i]), set(na.splits[i])) for i in range(k)
                ],
                thresholds=Thresholds(t_s, t_c),
                seed=seed,
                dataset=dataset,
                removed=[
                    RemovalRecord(r.id, r.label, r.violations, r.restored, r.origin_split)
                    for r in pos_removed + na.removed
                ],
                unassigned_negatives=na.unassigned,
            )
            prev = na
    return results


def derive_train_for_test(
    test_split: SplitPair,
    pool: SplitPair,
    store: IdentityStore,
    t_s: float,
    train_t_c: float,
) -> SplitPair:
    """Filter a training pool against a held-out test split.

    Pool sequences sharing > t_s identity with a same-class test sequence are
    dropped; negatives are then kept only with a >= train_t_c anchor to some
    retained training positive (train_t_c = 0 keeps all).
    """
    store.check_threshold(t_s)
    if train_t_c > 0.0:
        store.check_threshold(train_t_c)
    if pool.positives & test_split.positives or pool.negatives & test_split.negatives:
        raise InputError("pool overlaps the test split")

    def clashes(x: str, against: set[str]) -> bool:
        return any(ident > t_s and other in against for other, ident in store.neighbors(x))

    train_pos = {p for p in pool.positives if not clashes(p, test_split.positives)}
    if not train_pos:
        raise InputError("no training positives survive the inter-split filter")
    train_neg = {n for n in pool.negatives if not clashes(n, test_split.negatives)}
    if train_t_c > 0.0:
        train_neg = {
            n for n in train_neg
            if any(ident >= train_t_c and other in train_pos
                   for other, ident in store.neighbors(n))
        }
    return SplitPair(train_pos, train_neg)


def greedy_representative_partition(
    positives: Corpus,
    negatives: Corpus,
    store: IdentityStore,
    threshold: float,
    k: int,
    seed: int,
) -> Partition:
    """Baseline partitioner that only checks identity against cluster founders.

    Longest-first, each sequence joins the first cluster whose founder it
    matches at >= threshold, else founds a new cluster; clusters are dealt,
    largest first, to the currently smallest split. No violation removal is
    performed, so cross-split pairs above the threshold survive by design.
    """
    if not 0.0 < threshold < 1.0:
        raise InputError("threshold must lie in (0, 1)")
    store.check_threshold(threshold)
    rng = random.Random(seed)
    splits = [SplitPair(set(), set()) for _ in range(k)]

    for corpus, attr in ((positives, "positives"), (negatives, "negatives")):
        ordered = sorted(corpus, key=lambda r: (-len(r.residues), r.id))
        clusters: list[tuple[str, list[str]]] = []  # (founder, members)
        for rec in ordered:
            for founder, members in clusters:
                if store.lookup(rec.id, founder) >= threshold:
                    members.append(rec.id)
                    break
            else:
                clusters.append((rec.id, [rec.id]))
        clusters.sort(key=lambda c: (-len(c[1]), c[0]))
        for _, members in clusters:
            sizes = [len(getattr(s, attr)) for s in splits]
            smallest = min(sizes)
            target = rng.choice([i for i, sz in enumerate(sizes) if sz == smallest])
            getattr(splits[target], attr).update(members)

    return Partition(
        k=k,
        splits=splits,
        thresholds=Thresholds(threshold, 0.0),
        seed=seed,
        dataset="",
    )
