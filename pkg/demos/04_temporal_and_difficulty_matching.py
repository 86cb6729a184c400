"""Walkthrough: temporal holdouts and difficulty-matched training sets.

Shows the By-Date style split on creation dates, cleaning a training pool
against an external test set, and deriving training sets whose inter-class
difficulty is tuned independently of the test split.
"""

from datetime import date, timedelta
import random

import homopart as hp

rng = random.Random(3)

# --- temporal holdout ---------------------------------------------------------
corpus = hp.synthesize_corpus(families=16, family_size=6, length_range=(60, 220),
                              mutation_rate=0.65, negative_fraction=0.5, seed=3)
kept, _ = hp.quality_filter(corpus)
dated = hp.Corpus([
    hp.SequenceRecord(
        rec.id, rec.residues, rec.label,
        created=date(2018, 1, 1) + timedelta(days=rng.randrange(0, 2200)),
        source=rec.source,
    )
    for rec in kept
])
cutoff = date(2020, 12, 31)
train_pool, external = hp.temporal_split(dated, cutoff)
print(f"cutoff {cutoff}: {len(train_pool)} training sequences, "
      f"{len(external)} external test sequences")

# Anything identical to / contained in / containing an external sequence is
# also purged from the training side, regardless of class.
cleaned = hp.filter_train_against_external(train_pool, external)
print(f"substring cleanup against the external set: "
      f"{len(train_pool) - len(cleaned)} training sequences removed")

# --- difficulty matching --------------------------------------------------------
store = hp.all_pairs_identity(kept, floor=0.25)
pos = [r.id for r in kept.with_label("positive")]
neg = [r.id for r in kept.with_label("negative")]
part = hp.build_cv_sets(pos, neg, store, k=3, t_s_list=[0.5], t_c_list=[0.5],
                        seed=4, dataset="demo")[(0.5, 0.5)]

test_split = part.splits[0]
pool = hp.SplitPair(
    part.splits[1].positives | part.splits[2].positives,
    part.splits[1].negatives | part.splits[2].negatives,
)
print(f"test split: {len(test_split.positives)} pos / "
      f"{len(test_split.negatives)} neg; "
      f"pool: {len(pool.positives)} pos / {len(pool.negatives)} neg")

# Raising the training t_c keeps only negatives close to a training positive,
# making the training task harder while the test split stays fixed.
for train_tc in (0.0, 0.4, 0.7):
    train = hp.derive_train_for_test(test_split, pool, store, t_s=0.5,
                                     train_t_c=train_tc)
    verdict, p = hp.difficulty_compare(
        (sorted(train.positives), sorted(train.negatives)),
        (sorted(test_split.positives), sorted(test_split.negatives)),
        store,
    )
    print(f"  train t_c={train_tc}: {len(train.positives)} pos / "
          f"{len(train.negatives)} neg, vs test: {verdict} (p={p:.3f})")
