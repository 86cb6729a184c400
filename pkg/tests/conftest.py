"""Shared fixtures: toy stores for unit tests, full corpora for acceptance."""

from __future__ import annotations

import time
from dataclasses import dataclass

import pytest

import homopart as hp

ACCEPT_SEEDS = (101, 202, 303, 404, 505)
ACCEPT_T_S = (0.3, 0.4, 0.5, 1.0)
ACCEPT_T_C = (0.0, 0.4, 0.5, 0.6, 0.7)
ACCEPT_FLOOR = 0.25


def toy_store(entries: dict[tuple[str, str], float], floor: float = 0.25,
              universe=None) -> hp.IdentityStore:
    """Identity store built directly from a pair -> identity mapping."""
    return hp.IdentityStore(floor, hp.ScoringScheme(), entries, universe=universe)


@dataclass
class AcceptanceBundle:
    """Everything the acceptance criteria share, built once per session."""

    corpora: list[hp.Corpus]
    stores: list[hp.IdentityStore]
    grids: list[dict[tuple[float, float], hp.Partition]]
    audits: list[dict[tuple[float, float], hp.ViolationReport]]
    build_seconds: float


def _build_bundle(seeds=ACCEPT_SEEDS) -> AcceptanceBundle:
    t0 = time.monotonic()
    corpora, stores, grids, audits = [], [], [], []
    for seed in seeds:
        raw = hp.synthesize_corpus(
            families=60, family_size=8, length_range=(60, 400),
            mutation_rate=0.55, negative_fraction=0.5, seed=seed,
        )
        kept, _ = hp.quality_filter(raw)
        store = hp.all_pairs_identity(kept, floor=ACCEPT_FLOOR)
        pos = [r.id for r in kept.with_label("positive")]
        neg = [r.id for r in kept.with_label("negative")]
        grid = hp.build_cv_sets(pos, neg, store, k=3, t_s_list=ACCEPT_T_S,
                                t_c_list=ACCEPT_T_C, seed=seed, dataset=f"synth{seed}")
        corpora.append(kept)
        stores.append(store)
        grids.append(grid)
        audits.append({key: hp.audit_partition(part, store)
                       for key, part in grid.items()})
    return AcceptanceBundle(corpora, stores, grids, audits,
                            time.monotonic() - t0)


@pytest.fixture(scope="session")
def acceptance_bundle() -> AcceptanceBundle:
    return _build_bundle()


@pytest.fixture(scope="session")
def small_corpus() -> hp.Corpus:
    """Three-family labeled corpus small enough for exhaustive oracles."""
    raw = hp.synthesize_corpus(families=8, family_size=5, length_range=(60, 150),
                               mutation_rate=0.45, negative_fraction=0.5, seed=7)
    kept, _ = hp.quality_filter(raw)
    return kept


@pytest.fixture(scope="session")
def small_store(small_corpus) -> hp.IdentityStore:
    return hp.all_pairs_identity(small_corpus, floor=0.25)
