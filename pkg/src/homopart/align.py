"""Smith-Waterman local-alignment identity and sparse all-vs-all stores."""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping

import numpy as np

from . import _kernel
from .corpus import CANONICAL_ALPHABET, Corpus
from .errors import InputError
from .matrices import load_matrix

_CODE_TABLE = np.full(128, -1, dtype=np.int8)
for _i, _aa in enumerate(CANONICAL_ALPHABET):
    _CODE_TABLE[ord(_aa)] = _i

DEFAULT_FLOOR = 0.25


def encode(residues: str) -> np.ndarray:
    """Map a canonical-alphabet sequence to int8 codes; reject anything else."""
    raw = np.frombuffer(residues.encode("ascii", errors="replace"), dtype=np.uint8)
    if raw.size == 0:
        raise InputError("cannot align an empty sequence")
    codes = _CODE_TABLE[np.minimum(raw, 127)]
    if (codes < 0).any():
        bad = sorted(set(residues) - set(CANONICAL_ALPHABET))
        raise InputError(f"sequence contains non-canonical residues: {bad}")
    return codes


@dataclass(frozen=True)
class ScoringScheme:
    """Alignment parameters: substitution matrix, affine gap costs, coverage floor.

    A gap of length L costs gap_open + L * gap_extend. An alignment whose
    column count is below coverage_min times the shorter sequence's length has
    its identity zeroed.
    """

    substitution: np.ndarray = field(repr=False, default=None)  # type: ignore[assignment]
    matrix_name: str = "BLOSUM62"
    gap_open: int = 10
    gap_extend: int = 2
    coverage_min: float = 0.25

    def __post_init__(self) -> None:
        if self.substitution is None:
            object.__setattr__(self, "substitution", load_matrix(self.matrix_name))
        sub = np.asarray(self.substitution, dtype=np.int32)
        if sub.shape != (20, 20) or not np.array_equal(sub, sub.T):
            raise InputError("substitution matrix must be a symmetric 20x20 array")
        object.__setattr__(self, "substitution", sub)
        if not (self.gap_open >= self.gap_extend >= 1):
            raise InputError("require gap_open >= gap_extend >= 1")
        if not 0.0 <= self.coverage_min <= 1.0:
            raise InputError("coverage_min must lie in [0, 1]")


@dataclass(frozen=True)
class LocalAlignment:
    """Optimal local alignment statistics for one sequence pair."""

    score: int
    matches: int
    aligned_columns: int
    span_a: tuple[int, int]
    span_b: tuple[int, int]


def sw_align(a: str, b: str, scoring: ScoringScheme | None = None) -> LocalAlignment:
    """Optimal-score local alignment of two sequences under affine gap costs."""
    scoring = scoring or ScoringScheme()
    ca, cb = encode(a), encode(b)
    tb = np.empty((ca.size + 1, cb.size + 1), dtype=np.uint8)
    s, m, c, a0, a1, b0, b1 = _kernel.align_pair(
        ca, cb, scoring.substitution, scoring.gap_open, scoring.gap_extend, tb
    )
    return LocalAlignment(int(s), int(m), int(c), (int(a0), int(a1)), (int(b0), int(b1)))


def identity_from_stats(matches: int, columns: int, len_a: int, len_b: int,
                        coverage_min: float) -> float:
    """matches / columns, zeroed when columns < coverage_min * min(len_a, len_b)."""
    if columns == 0 or columns < coverage_min * min(len_a, len_b):
        return 0.0
    return matches / columns


def identity(a: str, b: str, scoring: ScoringScheme | None = None) -> float:
    """Local-alignment identity of two sequences with the coverage rule applied.

    Arguments are canonicalized (lexicographically smaller sequence first)
    before aligning: with ties among optimal alignments the traceback is
    orientation-sensitive, and identity must be exactly symmetric.
    """
    scoring = scoring or ScoringScheme()
    if b < a:
        a, b = b, a
    aln = sw_align(a, b, scoring)
    return identity_from_stats(aln.matches, aln.aligned_columns, len(a), len(b),
                               scoring.coverage_min)


class IdentityStore:
    """Sparse symmetric map of pairwise identities at or above a floor.

    Absent pairs read as 0.0, which is sound for any threshold test at or
    above the floor. Self pairs are never stored; identity(x, x) is 1 by
    definition.
    """

    def __init__(
        self,
        floor: float,
        scheme: ScoringScheme,
        entries: Mapping[tuple[str, str], float],
        universe: Iterable[str] | None = None,
    ):
        self.floor = float(floor)
        self.scheme = scheme
        self._entries: dict[tuple[str, str], float] = {}
        for (a, b), ident in entries.items():
            if a == b:
                raise InputError(f"self pair {a!r} must not be stored")
            key = (a, b) if a < b else (b, a)
            self._entries[key] = float(ident)
        self.universe: frozenset[str] | None = (
            frozenset(universe) if universe is not None else None
        )
        self._neighbors: dict[str, list[tuple[str, float]]] | None = None

    def __len__(self) -> int:
        return len(self._entries)

    def lookup(self, a: str, b: str) -> float:
        if a == b:
            return 1.0
        key = (a, b) if a < b else (b, a)
        return self._entries.get(key, 0.0)

    def pairs(self) -> Iterable[tuple[str, str, float]]:
        for (a, b), ident in self._entries.items():
            yield a, b, ident

    def neighbors(self, seq_id: str) -> list[tuple[str, float]]:
        """All stored partners of one id (identity >= floor)."""
        if self._neighbors is None:
            adj: dict[str, list[tuple[str, float]]] = {}
            for (a, b), ident in self._entries.items():
                adj.setdefault(a, []).append((b, ident))
                adj.setdefault(b, []).append((a, ident))
            self._neighbors = adj
        return self._neighbors.get(seq_id, [])

    def check_threshold(self, threshold: float) -> None:
        """Reject threshold tests the floored store cannot answer exactly."""
        if 0.0 < threshold < self.floor:
            raise InputError(
                f"threshold {threshold} is below the store floor {self.floor}; "
                "rebuild the store with a lower floor"
            )

    def check_ids(self, ids: Iterable[str]) -> None:
        if self.universe is None:
            return
        missing = [i for i in ids if i not in self.universe]
        if missing:
            raise InputError(f"ids missing from identity store universe: {missing[:5]}")

    def save(self, dest: str | Path) -> None:
        with open(dest, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(self.header_line() + "\n")
            for a, b in sorted(self._entries):
                fh.write(f"{a}\t{b}\t{self._entries[(a, b)]:.6f}\n")

    def header_line(self) -> str:
        s = self.scheme
        return (
            f"#homopart-ids v1 floor={self.floor} matrix={s.matrix_name} "
            f"gap_open={s.gap_open} gap_extend={s.gap_extend} cov={s.coverage_min}"
        )

    @classmethod
    def load(cls, path: str | Path) -> "IdentityStore":
        with open(path, "r", encoding="utf-8") as fh:
            header = fh.readline().rstrip("\n")
            if not header.startswith("#homopart-ids v1 "):
                raise InputError(f"{path}: not a homopart identity store")
            fields = dict(tok.split("=", 1) for tok in header.split()[2:])
            scheme = ScoringScheme(
                matrix_name=fields["matrix"],
                gap_open=int(fields["gap_open"]),
                gap_extend=int(fields["gap_extend"]),
                coverage_min=float(fields["cov"]),
            )
            entries: dict[tuple[str, str], float] = {}
            for lineno, line in enumerate(fh, start=2):
                parts = line.rstrip("\n").split("\t")
                if len(parts) != 3:
                    raise InputError(f"{path}:{lineno}: malformed store row")
                entries[(parts[0], parts[1])] = float(parts[2])
        return cls(float(fields["floor"]), scheme, entries)


def set_workers(workers: int | None) -> None:
    """Set the alignment thread count (clamped to what the runtime allows)."""
    if workers is None:
        return
    import numba

    limit = numba.config.NUMBA_NUM_THREADS
    numba.set_num_threads(max(1, min(int(workers), limit)))


def _pack(corpus: Corpus) -> tuple[list[str], np.ndarray, np.ndarray, np.ndarray]:
    ids = [rec.id for rec in corpus]
    seqs = [encode(rec.residues) for rec in corpus]
    lengths = np.array([s.size for s in seqs], dtype=np.int64)
    offsets = np.zeros(len(seqs), dtype=np.int64)
    if len(seqs) > 1:
        np.cumsum(lengths[:-1], out=offsets[1:])
    codes = np.concatenate(seqs) if seqs else np.zeros(0, dtype=np.int8)
    return ids, codes, offsets, lengths


def all_pairs_identity(
    seqs: Corpus,
    scoring: ScoringScheme | None = None,
    floor: float = DEFAULT_FLOOR,
    pair_with: Corpus | None = None,
    workers: int | None = None,
) -> IdentityStore:
    """Compute identities for every unordered pair and keep those >= floor.

    With `pair_with`, pairs run across the two corpora instead (ids must not
    collide). The result is independent of worker count.
    """
    scoring = scoring or ScoringScheme()
    set_workers(workers)
    if pair_with is None:
        ids, codes, offsets, lengths = _pack(seqs)
        n = len(ids)
        idx_a, idx_b = np.triu_indices(n, 1)
        universe = ids
    else:
        joint = seqs.merge(pair_with)  # raises on id collision
        ids, codes, offsets, lengths = _pack(joint)
        na, nb = len(seqs), len(pair_with)
        idx_a = np.repeat(np.arange(na), nb)
        idx_b = np.tile(np.arange(na, na + nb), na)
        universe = ids
    idx_a = np.ascontiguousarray(idx_a, dtype=np.int64)
    idx_b = np.ascontiguousarray(idx_b, dtype=np.int64)
    scores = np.zeros(idx_a.size, dtype=np.int32)
    matches = np.zeros(idx_a.size, dtype=np.int32)
    columns = np.zeros(idx_a.size, dtype=np.int32)
    if idx_a.size:
        _kernel.batch_stats(codes, offsets, lengths, idx_a, idx_b,
                            scoring.substitution, scoring.gap_open,
                            scoring.gap_extend, scores, matches, columns)
    entries: dict[tuple[str, str], float] = {}
    cov = scoring.coverage_min
    for p in range(idx_a.size):
        x, y = int(idx_a[p]), int(idx_b[p])
        ident = identity_from_stats(int(matches[p]), int(columns[p]),
                                    int(lengths[x]), int(lengths[y]), cov)
        if ident >= floor:
            a, b = ids[x], ids[y]
            entries[(a, b) if a < b else (b, a)] = ident
    return IdentityStore(floor, scoring, entries, universe=universe)


def max_identity_profile(set_a: list[str], set_b: list[str],
                         store: IdentityStore) -> list[float]:
    """Per id of A: maximum stored identity to any id of B (self excluded)."""
    store.check_ids(set_a)
    store.check_ids(set_b)
    b_set = set(set_b)
    out = []
    for a in set_a:
        best = 0.0
        for other, ident in store.neighbors(a):
            if other in b_set and other != a and ident > best:
                best = ident
        out.append(best)
    return out
