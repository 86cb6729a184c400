"""Labeled sequence corpora: FASTA I/O, quality control, and temporal splits."""

from __future__ import annotations

import json
import io
from dataclasses import dataclass, replace
from datetime import date
from pathlib import Path
from typing import Iterable, Iterator, TextIO

from .errors import InputError

CANONICAL_ALPHABET = "ACDEFGHIKLMNPQRSTVWY"
_CANONICAL_SET = frozenset(CANONICAL_ALPHABET)

POSITIVE = "positive"
NEGATIVE = "negative"
LABELS = (POSITIVE, NEGATIVE)

REASON_TOO_SHORT = "too_short"
REASON_TOO_LONG = "too_long"
REASON_NONCANONICAL = "noncanonical"
REASON_DUPLICATE = "duplicate"
REASON_SUBSTRING = "substring"


@dataclass(frozen=True)
class SequenceRecord:
    """One labeled protein sequence."""

    id: str
    residues: str
    label: str
    created: date | None = None
    source: str | None = None

    def __post_init__(self) -> None:
        if not self.id:
            raise InputError("sequence record requires a non-empty id")
        if not self.residues:
            raise InputError(f"sequence {self.id!r} has an empty body")
        if self.label not in LABELS:
            raise InputError(f"sequence {self.id!r}: label must be one of {LABELS}")

    def __len__(self) -> int:
        return len(self.residues)


class Corpus:
    """Ordered, id-unique collection of sequence records."""

    def __init__(self, records: Iterable[SequenceRecord], metadata: dict | None = None):
        self._records: list[SequenceRecord] = list(records)
        self.metadata: dict = dict(metadata or {})
        self._by_id: dict[str, SequenceRecord] = {}
        for rec in self._records:
            if rec.id in self._by_id:
                raise InputError(f"duplicate sequence id {rec.id!r}")
            self._by_id[rec.id] = rec

    def __len__(self) -> int:
        return len(self._records)

    def __iter__(self) -> Iterator[SequenceRecord]:
        return iter(self._records)

    def __contains__(self, seq_id: str) -> bool:
        return seq_id in self._by_id

    def __getitem__(self, seq_id: str) -> SequenceRecord:
        try:
            return self._by_id[seq_id]
        except KeyError:
            raise InputError(f"unknown sequence id {seq_id!r}") from None

    def ids(self) -> list[str]:
        return [rec.id for rec in self._records]

    def with_label(self, label: str) -> list[SequenceRecord]:
        return [rec for rec in self._records if rec.label == label]

    def lengths(self) -> dict[str, int]:
        return {rec.id: len(rec.residues) for rec in self._records}

    def subset(self, ids: Iterable[str]) -> "Corpus":
        wanted = set(ids)
        return Corpus([r for r in self._records if r.id in wanted], self.metadata)

    def merge(self, other: "Corpus") -> "Corpus":
        return Corpus(list(self) + list(other), self.metadata)


def _parse_header_fields(tokens: list[str]) -> tuple[date | None, str | None]:
    created = None
    source = None
    for tok in tokens:
        if tok.startswith("created="):
            created = date.fromisoformat(tok[len("created="):])
        elif tok.startswith("source="):
            source = tok[len("source="):]
    return created, source


def parse_fasta(source: str | Path | TextIO, label: str) -> Corpus:
    """Parse FASTA text into a corpus; every record receives `label`.

    The first whitespace-delimited header token is the id; optional
    `created=YYYY-MM-DD` and `source=...` tokens are recognized. Residues are
    uppercased and line breaks stripped. Duplicate ids, empty bodies and
    malformed headers are hard errors.
    """
    if isinstance(source, (str, Path)):
        handle: TextIO = open(source, "r", encoding="utf-8", newline=None)
        close = True
    else:
        handle = source
        close = False
    try:
        records: list[SequenceRecord] = []
        seen: set[str] = set()
        cur_id: str | None = None
        cur_meta: tuple[date | None, str | None] = (None, None)
        cur_body: list[str] = []

        def flush() -> None:
            if cur_id is None:
                return
            residues = "".join(cur_body).upper()
            if not residues:
                raise InputError(f"sequence {cur_id!r} has an empty body")
            records.append(
                SequenceRecord(cur_id, residues, label, created=cur_meta[0], source=cur_meta[1])
            )

        for lineno, raw in enumerate(handle, start=1):
            line = raw.rstrip("\r\n")
            if line.startswith(">"):
                flush()
                tokens = line[1:].split()
                if not tokens:
                    raise InputError(f"line {lineno}: FASTA header has no id")
                cur_id = tokens[0]
                if cur_id in seen:
                    raise InputError(f"duplicate sequence id {cur_id!r}")
                seen.add(cur_id)
                cur_meta = _parse_header_fields(tokens[1:])
                cur_body = []
            elif line.strip():
                if cur_id is None:
                    raise InputError(f"line {lineno}: sequence data before any FASTA header")
                cur_body.append(line.strip())
        flush()
        return Corpus(records)
    finally:
        if close:
            handle.close()


def parse_fasta_text(text: str, label: str) -> Corpus:
    return parse_fasta(io.StringIO(text), label)


def write_fasta(corpus: Corpus, dest: str | Path | TextIO, width: int = 60) -> None:
    """Write a corpus as FASTA (LF line endings, wrapped bodies)."""
    if isinstance(dest, (str, Path)):
        handle: TextIO = open(dest, "w", encoding="utf-8", newline="\n")
        close = True
    else:
        handle = dest
        close = False
    try:
        for rec in corpus:
            header = ">" + rec.id
            if rec.created is not None:
                header += f" created={rec.created.isoformat()}"
            if rec.source is not None:
                header += f" source={rec.source}"
            handle.write(header + "\n")
            for i in range(0, len(rec.residues), width):
                handle.write(rec.residues[i : i + width] + "\n")
    finally:
        if close:
            handle.close()


def quality_filter(
    corpus: Corpus, min_len: int = 50, max_len: int = 1000
) -> tuple[Corpus, list[tuple[str, str]]]:
    """Drop out-of-range, non-canonical, and within-class duplicate/substring records.

    When two surviving same-class records are in a duplicate/substring
    relation, the shorter is dropped; on equal length the
    lexicographically-later id is dropped. Returns (kept, dropped) where
    dropped is a list of (id, reason_code).
    """
    dropped: list[tuple[str, str]] = []
    survivors: list[SequenceRecord] = []
    for rec in corpus:
        n = len(rec.residues)
        if n < min_len:
            dropped.append((rec.id, REASON_TOO_SHORT))
        elif n > max_len:
            dropped.append((rec.id, REASON_TOO_LONG))
        elif not _CANONICAL_SET.issuperset(rec.residues):
            dropped.append((rec.id, REASON_NONCANONICAL))
        else:
            survivors.append(rec)

    # Longest-first (ties: lexicographically-earlier id first) guarantees every
    # record is compared against all of its potential superstrings.
    kept_by_class: dict[str, list[SequenceRecord]] = {}
    keep_ids: set[str] = set()
    for rec in sorted(survivors, key=lambda r: (-len(r.residues), r.id)):
        peers = kept_by_class.setdefault(rec.label, [])
        verdict = None
        for other in peers:
            if rec.residues == other.residues:
                verdict = REASON_DUPLICATE
                break
            if rec.residues in other.residues:
                verdict = REASON_SUBSTRING
                break
        if verdict is None:
            peers.append(rec)
            keep_ids.add(rec.id)
        else:
            dropped.append((rec.id, verdict))

    dropped.sort()
    kept = Corpus(
        [r for r in corpus if r.id in keep_ids],
        {**corpus.metadata, "qc_dropped": list(dropped)},
    )
    return kept, dropped


def cross_class_filter(positives: Corpus, negatives: Corpus) -> Corpus:
    """Remove negatives identical to, substrings of, or superstrings of any positive."""
    pos_residues = [rec.residues for rec in positives]
    kept = []
    for rec in negatives:
        if not any(rec.residues in p or p in rec.residues for p in pos_residues):
            kept.append(rec)
    return Corpus(kept, negatives.metadata)


def temporal_split(corpus: Corpus, cutoff: date) -> tuple[Corpus, Corpus]:
    """Split on creation date: records dated on or before `cutoff` vs after."""
    before, after = [], []
    for rec in corpus:
        if rec.created is None:
            raise InputError(f"sequence {rec.id!r} has no creation date")
        (before if rec.created <= cutoff else after).append(rec)
    return Corpus(before, corpus.metadata), Corpus(after, corpus.metadata)


def filter_train_against_external(train: Corpus, external: Corpus) -> Corpus:
    """Remove train sequences identical to, substrings of, or superstrings of
    any external sequence, regardless of class."""
    ext_residues = [rec.residues for rec in external]
    kept = []
    for rec in train:
        if not any(rec.residues in e or e in rec.residues for e in ext_residues):
            kept.append(rec)
    return Corpus(kept, train.metadata)


def write_qc_log(dropped: list[tuple[str, str]], dest: str | Path) -> None:
    with open(dest, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("id\treason\n")
        for seq_id, reason in dropped:
            fh.write(f"{seq_id}\t{reason}\n")


def read_metadata_sidecar(path: str | Path) -> dict[str, dict]:
    """Read the id -> {created, source} sidecar JSON."""
    with open(path, "r", encoding="utf-8") as fh:
        raw = json.load(fh)
    if not isinstance(raw, dict):
        raise InputError("metadata sidecar must be a JSON object keyed by id")
    return raw


def apply_metadata(corpus: Corpus, meta: dict[str, dict]) -> Corpus:
    """Return a corpus with created/source fields overridden from a sidecar map."""
    out = []
    for rec in corpus:
        entry = meta.get(rec.id)
        if entry:
            created = rec.created
            if entry.get("created"):
                created = date.fromisoformat(entry["created"])
            out.append(replace(rec, created=created, source=entry.get("source", rec.source)))
        else:
            out.append(rec)
    return Corpus(out, corpus.metadata)
