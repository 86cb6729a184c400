"""Walkthrough: scoring metrics, model-comparison statistics, and difficulty.

Simulates two classifiers of different quality on a shared test set, computes
AUROC/AUPRC against the no-skill baseline, then compares several models across
datasets with the Friedman + Nemenyi machinery.
"""

import random

import numpy as np

import homopart as hp

rng = random.Random(0)

# --- metrics on one test set -------------------------------------------------
n_pos, n_neg = 40, 160
labels = ["positive"] * n_pos + ["negative"] * n_neg


def simulate(separation):
    scores = [rng.gauss(separation if lab == "positive" else 0.0, 1.0)
              for lab in labels]
    return [hp.ScoredInstance(lab, s) for lab, s in zip(labels, scores)]


strong, weak = simulate(2.0), simulate(0.5)
print(f"background AUPRC (P/(P+N)): {hp.background_auprc(strong):.3f}")
for name, inst in (("strong model", strong), ("weak model", weak)):
    print(f"  {name}: AUROC {hp.auroc(inst):.3f}  AUPRC {hp.auprc(inst):.3f}")

# --- paired and unpaired tests ----------------------------------------------
strong_scores = [i.score for i in strong if i.label == "positive"]
weak_scores = [i.score for i in weak if i.label == "positive"]
w, p = hp.wilcoxon_signed_rank(list(zip(strong_scores, weak_scores)))
print(f"paired Wilcoxon on positive scores: W={w:.1f} p={p:.2e}")
u, p = hp.mann_whitney_u(strong_scores, weak_scores)
print(f"Mann-Whitney U: U={u:.1f} p={p:.2e}")
d, p = hp.ks_two_sample(strong_scores, weak_scores)
print(f"KS test: D={d:.3f} p={p:.2e}")
print(f"Bonferroni over the three p-values: "
      f"{[f'{q:.2e}' for q in hp.bonferroni([0.01, 0.02, 0.5])]}")

# --- multi-model comparison ---------------------------------------------------
gen = np.random.default_rng(1)
models = ("plm", "onehot", "blosum", "baseline")
datasets = tuple(f"set{i}" for i in range(12))
quality = np.array([0.85, 0.75, 0.72, 0.55])
values = np.clip(quality + gen.normal(0, 0.04, (len(datasets), len(models))), 0, 1)
table = hp.RankTable(models, datasets, values)

chi2, p = hp.friedman(table)
print(f"Friedman: chi2={chi2:.2f} p={p:.2e}")
result = hp.nemenyi(table, alpha=0.05)
print(f"Nemenyi critical difference: {result.critical_difference:.3f}")
for model, rank in sorted(result.average_ranks.items(), key=lambda kv: kv[1]):
    print(f"  {model:<9} average rank {rank:.2f}")
print(f"significantly different pairs: {list(result.significant_pairs)}")

r, p = hp.pearson(quality.tolist(), values.mean(axis=0).tolist())
print(f"sanity: observed means track model quality, Pearson r={r:.3f}")

# --- set difficulty -----------------------------------------------------------
corpus = hp.synthesize_corpus(families=12, family_size=6, length_range=(60, 200),
                              mutation_rate=0.45, negative_fraction=0.5, seed=5)
kept, _ = hp.quality_filter(corpus)
store = hp.all_pairs_identity(kept, floor=0.0)
pos = [r.id for r in kept.with_label("positive")]
neg = [r.id for r in kept.with_label("negative")]
# make the "test" side artificially easy: weakly anchored negatives only
profile = {n: max((store.lookup(n, q) for q in pos), default=0.0) for n in neg}
ranked = sorted(neg, key=lambda n: profile[n])
easy, hard = ranked[: len(ranked) // 2], ranked[len(ranked) // 2:]
verdict, p = hp.difficulty_compare((pos, hard), (pos, easy), store)
print(f"difficulty comparison (hard vs easy negatives): {verdict}, p={p:.2e}")
