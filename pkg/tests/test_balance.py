"""Training-set strategies: hard balance, length control, minimal, validation."""

from __future__ import annotations

import random

import pytest

import homopart as hp
from homopart.balance import BalanceSetting

from conftest import toy_store
from oracles import nearest_length_matching


def split_of(n_pos: int, n_neg: int) -> hp.SplitPair:
    return hp.SplitPair({f"p{i}" for i in range(n_pos)},
                        {f"n{i}" for i in range(n_neg)})


class TestHardBalance:
    def test_downsample_to_positive_count(self):
        out = hp.hard_balance(split_of(50, 200), seed=1)
        assert len(out.positives) == 50 and len(out.negatives) == 50

    def test_no_subsampling_when_fewer_negatives(self):
        split = split_of(50, 30)
        out = hp.hard_balance(split, seed=1)
        assert out.negatives == split.negatives
        assert out.positives == split.positives

    def test_seed_determinism(self):
        a = hp.hard_balance(split_of(20, 80), seed=7)
        b = hp.hard_balance(split_of(20, 80), seed=7)
        c = hp.hard_balance(split_of(20, 80), seed=8)
        assert a.negatives == b.negatives
        assert a.negatives != c.negatives  # overwhelmingly likely

    def test_subset_property(self):
        split = split_of(10, 40)
        out = hp.hard_balance(split, seed=2)
        assert out.negatives <= split.negatives


class TestLengthControl:
    def lengths(self, split, rng, lo=60, hi=200):
        return {i: rng.randint(lo, hi)
                for i in split.positives | split.negatives}

    def test_exact_matches_selected(self):
        split = split_of(5, 15)
        lengths = {f"p{i}": 100 + i for i in range(5)}
        lengths.update({f"n{i}": 100 + i for i in range(5)})      # exact twins
        lengths.update({f"n{i}": 500 + i for i in range(5, 15)})  # decoys
        out = hp.length_control(split, lengths, seed=3)
        assert sorted(lengths[n] for n in out.negatives) == \
            sorted(lengths[p] for p in out.positives)

    def test_noop_equals_hard_balance(self):
        split = split_of(50, 30)
        lc = hp.length_control(split, {i: 100 for i in split.positives | split.negatives},
                               seed=4)
        hb = hp.hard_balance(split, seed=4)
        assert lc.positives == hb.positives and lc.negatives == hb.negatives

    def test_bijective_matching_size(self):
        rng = random.Random(5)
        split = split_of(30, 90)
        out = hp.length_control(split, self.lengths(split, rng), seed=5)
        assert len(out.negatives) == 30

    def test_simulation_oracle_replays_choices(self):
        rng_lengths = random.Random(6)
        split = split_of(12, 40)
        lengths = self.lengths(split, rng_lengths)
        seed = 99
        out = hp.length_control(split, lengths, seed=seed)

        # independent replay: same visit order, same tie consumption discipline
        rng = random.Random(seed)
        visit = sorted(split.positives)
        rng.shuffle(visit)
        chosen = nearest_length_matching(
            {p: lengths[p] for p in split.positives},
            {n: lengths[n] for n in split.negatives},
            visit,
            lambda ties: ties[0] if len(ties) == 1 else rng.choice(ties),
        )
        assert set(chosen) == out.negatives

    def test_greedy_minimum_at_each_turn(self):
        rng_lengths = random.Random(7)
        split = split_of(10, 35)
        lengths = self.lengths(split, rng_lengths)
        seed = 13
        out = hp.length_control(split, lengths, seed=seed)
        rng = random.Random(seed)
        visit = sorted(split.positives)
        rng.shuffle(visit)
        unused = dict.fromkeys(split.negatives, True)
        picked = []
        for p in visit:
            pool = [n for n in unused if unused[n]]
            best = min(abs(lengths[n] - lengths[p]) for n in pool)
            ties = sorted(n for n in pool
                          if abs(lengths[n] - lengths[p]) == best)
            sel = [n for n in ties if n in out.negatives and n not in picked]
            assert sel, f"no greedy-minimal negative available for {p}"
            take = sel[0] if len(sel) == 1 else min(sel)
            # any tied pick is legal; mark one consumed and move on
            unused[take] = False
            picked.append(take)


class TestMinimal:
    def store(self):
        entries = {}
        for i in range(12):
            entries[(f"n{i}", f"p{i % 4}")] = 0.8
        return toy_store(entries)

    def settings(self, counts, t_c=0.5):
        out = []
        for name, (np_, nn) in counts.items():
            split = hp.SplitPair({f"p{i}" for i in range(np_)},
                                 {f"n{i}" for i in range(nn)})
            out.append(BalanceSetting(name=name, split=split, t_c=t_c,
                                      dataset=name.split(":")[0]))
        return out

    def test_per_dataset_minima(self):
        settings = self.settings({"d:0": (10, 12), "d:1": (8, 12), "d:2": (9, 9)},
                                 t_c=0.0)
        out = hp.minimal(settings, toy_store({}), seed=1, scope="per_dataset")
        assert all(len(b.positives) == 8 for b in out.values())
        assert all(len(b.negatives) == 9 for b in out.values())

    def test_global_scope_single_minimum(self):
        settings = self.settings({"a:0": (10, 12), "b:0": (4, 6)}, t_c=0.0)
        out = hp.minimal(settings, toy_store({}), seed=1, scope="global")
        assert {(len(b.positives), len(b.negatives)) for b in out.values()} == {(4, 6)}

    def test_sampled_negatives_anchored(self):
        store = self.store()
        settings = self.settings({"d:0": (4, 10), "d:1": (4, 12)}, t_c=0.5)
        out = hp.minimal(settings, store, seed=2, scope="per_dataset")
        for bset in out.values():
            for n in bset.negatives:
                assert any(store.lookup(n, p) >= 0.5 for p in bset.positives)

    def test_pool_exhaustion_names_setting(self):
        # only 5 negatives anchor, but 9 are required
        entries = {(f"n{i}", "p0"): 0.8 for i in range(5)}
        settings = self.settings({"d:a": (1, 9), "d:b": (1, 9)}, t_c=0.5)
        with pytest.raises(hp.InfeasibleError, match="d:a"):
            hp.minimal(settings, toy_store(entries), seed=3, scope="per_dataset")

    def test_subset_property(self):
        settings = self.settings({"d:0": (4, 10)}, t_c=0.0)
        out = hp.minimal(settings, toy_store({}), seed=4, scope="global")
        bset = out["d:0"]
        assert bset.positives <= settings[0].split.positives
        assert bset.negatives <= settings[0].split.negatives


class TestValidationSplit:
    def ids(self, n_pos, n_neg):
        return ({f"p{i}" for i in range(n_pos)}, {f"n{i}" for i in range(n_neg)})

    def test_ten_percent(self):
        pos, neg = self.ids(300, 700)
        train, val = hp.validation_split(pos, neg, seed=1)
        assert len(val.positives) + len(val.negatives) == 100
        assert (len(val.positives), len(val.negatives)) == (30, 70)

    def test_cap_at_500(self):
        pos, neg = self.ids(6000, 14000)
        train, val = hp.validation_split(pos, neg, seed=1)
        assert len(val.positives) + len(val.negatives) == 500
        assert (len(val.positives), len(val.negatives)) == (150, 350)

    def test_disjoint_exhaustive(self):
        pos, neg = self.ids(40, 90)
        train, val = hp.validation_split(pos, neg, seed=2)
        assert train.positives | val.positives == pos
        assert train.negatives | val.negatives == neg
        assert train.positives.isdisjoint(val.positives)
        assert train.negatives.isdisjoint(val.negatives)

    def test_minority_class_kept(self):
        # 2 positives among 100: raw apportionment would give 0 validation
        # positives; the rounding rule bumps it to 1
        pos, neg = self.ids(2, 98)
        train, val = hp.validation_split(pos, neg, seed=3)
        assert len(val.positives) == 1

    def test_unavoidable_zero_rejected(self):
        pos, neg = self.ids(1, 5)  # total validation budget is 1
        with pytest.raises(hp.InfeasibleError):
            hp.validation_split(pos, neg, seed=4)

    def test_single_class_rejected(self):
        with pytest.raises(hp.InputError):
            hp.validation_split(set(), {"n0", "n1"}, seed=5)

    def test_determinism(self):
        pos, neg = self.ids(30, 70)
        a = hp.validation_split(pos, neg, seed=6)
        b = hp.validation_split(pos, neg, seed=6)
        assert a[1].positives == b[1].positives
        assert a[1].negatives == b[1].negatives
