"""Walkthrough: the four training-set strategies and validation carving.

Takes one split from a partition and shows what No Balance, Hard Balance,
Length Control, and Minimal do to its class sizes and length distributions.
"""

import statistics

import homopart as hp
from homopart.balance import BalanceSetting, minimal

corpus = hp.synthesize_corpus(families=15, family_size=6, length_range=(60, 350),
                              mutation_rate=0.4, negative_fraction=0.65, seed=9)
kept, _ = hp.quality_filter(corpus)
store = hp.all_pairs_identity(kept, floor=0.25)
positives = [r.id for r in kept.with_label("positive")]
negatives = [r.id for r in kept.with_label("negative")]

part = hp.build_cv_sets(positives, negatives, store, k=3,
                        t_s_list=[0.4], t_c_list=[0.4],
                        seed=2, dataset="demo")[(0.4, 0.4)]
lengths = kept.lengths()


def describe(name, pos, neg):
    neg_lengths = [lengths[n] for n in neg]
    mean_len = statistics.mean(neg_lengths) if neg_lengths else float("nan")
    print(f"  {name:<14} {len(pos):>3} pos / {len(neg):>3} neg "
          f"(mean negative length {mean_len:6.1f})")


for i, split in enumerate(part.splits):
    print(f"split {i}:")
    describe("no balance", *map(sorted, (split.positives, split.negatives)))
    hb = hp.hard_balance(split, seed=1)
    describe("hard balance", hb.positives, hb.negatives)
    lc = hp.length_control(split, lengths, seed=1)
    describe("length control", lc.positives, lc.negatives)
    pos_mean = statistics.mean(lengths[p] for p in split.positives)
    print(f"  {'':14} (positive mean length {pos_mean:6.1f} -- "
          "length control tracks it)")

# Minimal equalizes sizes across a whole collection of settings, sampling
# negatives only from the pool anchored to the retained positives.
settings = [
    BalanceSetting(name=f"split{i}", split=split, t_c=0.4, dataset="demo")
    for i, split in enumerate(part.splits)
]
balanced = minimal(settings, store, seed=3, scope="per_dataset")
print("minimal strategy:")
for name, bset in sorted(balanced.items()):
    print(f"  {name}: {len(bset.positives)} pos / {len(bset.negatives)} neg")

# Validation carving: 10% of the training sequences, capped at 500, with the
# class ratio preserved.
split = part.splits[0]
train, val = hp.validation_split(split.positives, split.negatives, seed=4)
print(f"validation split: {len(val.positives)} pos / {len(val.negatives)} neg "
      f"validation, {len(train.positives)} pos / {len(train.negatives)} neg train")
