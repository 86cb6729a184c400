"""Training-set construction strategies and validation carving."""

from __future__ import annotations

import math
import random
from bisect import bisect_left
from dataclasses import dataclass
from typing import Mapping, Sequence

from .align import IdentityStore
from .corpus import Corpus
from .errors import InfeasibleError, InputError
from .partition import SplitPair

NO_BALANCE = "no_balance"
HARD_BALANCE = "hard_balance"
LENGTH_CONTROL = "length_control"
MINIMAL = "minimal"
STRATEGIES = (NO_BALANCE, HARD_BALANCE, LENGTH_CONTROL, MINIMAL)


@dataclass
class BalancedSet:
    """One split's training ids after a balancing strategy."""

    positives: set[str]
    negatives: set[str]
    strategy: str
    seed: int
    provenance: str = ""


def no_balance(split: SplitPair, seed: int, provenance: str = "") -> BalancedSet:
    """The untouched split."""
    return BalancedSet(set(split.positives), set(split.negatives), NO_BALANCE, seed,
                       provenance)


def hard_balance(split: SplitPair, seed: int, provenance: str = "") -> BalancedSet:
    """Subsample negatives uniformly to the positive count (no-op when already
    at or below it)."""
    pos, neg = split.positives, split.negatives
    if len(neg) > len(pos):
        rng = random.Random(seed)
        neg = set(rng.sample(sorted(neg), len(pos)))
    return BalancedSet(set(pos), set(neg), HARD_BALANCE, seed, provenance)


def length_control(
    split: SplitPair,
    lengths: Corpus | Mapping[str, int],
    seed: int,
    provenance: str = "",
) -> BalancedSet:
    """Match negatives to positives one-to-one by nearest sequence length.

    Positives are visited in seeded-random order; each takes the unused
    negative with the smallest absolute length difference (seeded random among
    ties). No-op when negatives do not outnumber positives.
    """
    if isinstance(lengths, Corpus):
        lengths = lengths.lengths()
    pos, neg = split.positives, split.negatives
    if len(neg) <= len(pos):
        return BalancedSet(set(pos), set(neg), LENGTH_CONTROL, seed, provenance)

    rng = random.Random(seed)
    visit = sorted(pos)
    rng.shuffle(visit)
    unused = sorted((lengths[n], n) for n in neg)
    chosen: set[str] = set()
    for p in visit:
        target = lengths[p]
        i = bisect_left(unused, (target, ""))
        best = None
        if i < len(unused):
            best = unused[i][0] - target
        if i > 0 and (best is None or target - unused[i - 1][0] < best):
            best = target - unused[i - 1][0]
        ties = []
        for length in {target - best, target + best}:
            lo = bisect_left(unused, (length, ""))
            hi = bisect_left(unused, (length + 1, ""))
            ties.extend(unused[lo:hi])
        pick = ties[0] if len(ties) == 1 else rng.choice(sorted(ties))
        unused.remove(pick)
        chosen.add(pick[1])
    return BalancedSet(set(pos), chosen, LENGTH_CONTROL, seed, provenance)


@dataclass(frozen=True)
class BalanceSetting:
    """One split entering the Minimal strategy, with its own anchor threshold."""

    name: str
    split: SplitPair
    t_c: float
    dataset: str = ""


def minimal(
    settings: Sequence[BalanceSetting],
    store: IdentityStore,
    seed: int,
    scope: str = "global",
) -> dict[str, BalancedSet]:
    """Equalize all settings to the scoped minimum positive/negative counts.

    Positives are subsampled uniformly; negatives are sampled uniformly from
    the pool anchored at >= t_c to the retained positives. A pool smaller than
    the negative target is a hard error naming the setting.
    """
    if scope not in ("global", "per_dataset"):
        raise InputError("scope must be 'global' or 'per_dataset'")
    if not settings:
        raise InputError("no settings given")
    groups: dict[str, list[BalanceSetting]] = {}
    for s in settings:
        groups.setdefault(s.dataset if scope == "per_dataset" else "", []).append(s)

    out: dict[str, BalancedSet] = {}
    for group in groups.values():
        target_pos = min(len(s.split.positives) for s in group)
        target_neg = min(len(s.split.negatives) for s in group)
        for s in group:
            rng = random.Random(f"{seed}|minimal|{s.name}")
            pos = set(rng.sample(sorted(s.split.positives), target_pos))
            if s.t_c > 0.0:
                store.check_threshold(s.t_c)
                pool = [
                    n for n in sorted(s.split.negatives)
                    if any(ident >= s.t_c and other in pos
                           for other, ident in store.neighbors(n))
                ]
            else:
                pool = sorted(s.split.negatives)
            if len(pool) < target_neg:
                raise InfeasibleError(
                    f"setting {s.name!r}: only {len(pool)} negatives anchored at "
                    f">= {s.t_c} to the sampled positives, need {target_neg}"
                )
            neg = set(rng.sample(pool, target_neg))
            out[s.name] = BalancedSet(pos, neg, MINIMAL, seed, s.name)
    return out


def validation_split(
    positives: set[str],
    negatives: set[str],
    fraction: float = 0.10,
    cap: int = 500,
    seed: int = 0,
) -> tuple[SplitPair, SplitPair]:
    """Carve a class-proportional validation set of min(ceil(fraction*n), cap)
    sequences; returns (train, validation)."""
    pos, neg = sorted(positives), sorted(negatives)
    n_pos, n_neg = len(pos), len(neg)
    if n_pos == 0 or n_neg == 0:
        raise InputError("validation split requires both classes")
    total = min(math.ceil(fraction * (n_pos + n_neg)), cap)
    quota_pos = total * n_pos / (n_pos + n_neg)
    take_pos = math.floor(quota_pos)
    take_neg = math.floor(total * n_neg / (n_pos + n_neg))
    if take_pos + take_neg < total:  # largest-remainder tie: bigger class wins
        frac_pos = quota_pos - take_pos
        if frac_pos > 0.5 or (frac_pos == 0.5 and n_pos >= n_neg):
            take_pos += 1
        else:
            take_neg += 1
    if take_pos == 0:
        take_pos, take_neg = 1, total - 1
    if take_neg == 0:
        take_neg, take_pos = 1, total - 1
    if take_pos < 1 or take_neg < 1 or take_pos > n_pos or take_neg > n_neg:
        raise InfeasibleError(
            f"cannot give both classes a validation instance "
            f"(pos {n_pos}/{take_pos}, neg {n_neg}/{take_neg})"
        )
    rng = random.Random(seed)
    val_pos = set(rng.sample(pos, take_pos))
    val_neg = set(rng.sample(neg, take_neg))
    train = SplitPair(set(pos) - val_pos, set(neg) - val_neg)
    return train, SplitPair(val_pos, val_neg)
