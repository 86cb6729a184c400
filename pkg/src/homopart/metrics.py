"""AUROC, AUPRC (continuous interpolation), and the no-skill PR baseline."""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np
from scipy.stats import rankdata

from .corpus import LABELS, NEGATIVE, POSITIVE
from .errors import InputError


@dataclass(frozen=True)
class ScoredInstance:
    """A labeled classifier output; higher scores mean more positive-like."""

    label: str
    score: float
    id: str | None = None

    def __post_init__(self) -> None:
        if self.label not in LABELS:
            raise InputError(f"label must be one of {LABELS}")
        if not math.isfinite(self.score):
            raise InputError(f"score must be finite, got {self.score}")


def _split_scores(instances: Sequence[ScoredInstance]) -> tuple[np.ndarray, np.ndarray]:
    pos = np.array([i.score for i in instances if i.label == POSITIVE], dtype=float)
    neg = np.array([i.score for i in instances if i.label == NEGATIVE], dtype=float)
    return pos, neg


def auroc(instances: Sequence[ScoredInstance]) -> float:
    """Probability a random positive outscores a random negative (ties count half)."""
    pos, neg = _split_scores(instances)
    if pos.size == 0 or neg.size == 0:
        raise InputError("auroc requires at least one instance of each class")
    ranks = rankdata(np.concatenate([pos, neg]))
    rank_sum = float(ranks[: pos.size].sum())
    u = rank_sum - pos.size * (pos.size + 1) / 2.0
    return u / (pos.size * neg.size)


def auprc(instances: Sequence[ScoredInstance]) -> float:
    """Area under the precision-recall curve with continuous interpolation
    between achievable points; tied scores form a single threshold step."""
    pos, neg = _split_scores(instances)
    if pos.size == 0 or neg.size == 0:
        raise InputError("auprc requires at least one instance of each class")
    scores = np.concatenate([pos, neg])
    labels = np.concatenate([np.ones(pos.size, dtype=bool), np.zeros(neg.size, dtype=bool)])
    order = np.argsort(-scores, kind="stable")
    scores, labels = scores[order], labels[order]
    boundaries = np.nonzero(np.diff(scores))[0]
    steps = np.concatenate([boundaries, [scores.size - 1]])
    tp = np.cumsum(labels)[steps].astype(float)
    fp = (steps + 1) - tp
    total_pos = float(pos.size)

    area = 0.0
    tp_prev, fp_prev = 0.0, 0.0
    for tp_cur, fp_cur in zip(tp, fp):
        if tp_cur > tp_prev:
            slope = (fp_cur - fp_prev) / (tp_cur - tp_prev)
            intercept = fp_prev - slope * tp_prev
            m = 1.0 + slope
            if intercept == 0.0:
                area += (tp_cur - tp_prev) / m
            else:
                # integral of x / (m x + intercept) over [tp_prev, tp_cur]
                area += (tp_cur - tp_prev) / m - (intercept / m**2) * math.log(
                    (m * tp_cur + intercept) / (m * tp_prev + intercept)
                )
        tp_prev, fp_prev = tp_cur, fp_cur
    return area / total_pos


def background_auprc(instances: Sequence[ScoredInstance]) -> float:
    """No-skill AUPRC baseline: positives / total."""
    if not instances:
        raise InputError("background_auprc requires a non-empty input")
    n_pos = sum(1 for i in instances if i.label == POSITIVE)
    return n_pos / len(instances)


def read_scores(path: str | Path) -> list[ScoredInstance]:
    """Read the `id<TAB>label<TAB>score` scores file (label 0/1, header required)."""
    out = []
    with open(path, "r", encoding="utf-8") as fh:
        header = fh.readline().rstrip("\n").split("\t")
        if header != ["id", "label", "score"]:
            raise InputError(f"{path}: expected header 'id\\tlabel\\tscore'")
        for lineno, line in enumerate(fh, start=2):
            parts = line.rstrip("\n").split("\t")
            if len(parts) != 3:
                raise InputError(f"{path}:{lineno}: expected 3 tab-separated fields")
            ident, label_txt, score_txt = parts
            if label_txt not in ("0", "1"):
                raise InputError(f"{path}:{lineno}: label must be 0 or 1")
            out.append(
                ScoredInstance(
                    POSITIVE if label_txt == "1" else NEGATIVE,
                    float(score_txt),
                    id=ident,
                )
            )
    return out


def write_scores(instances: Iterable[ScoredInstance], dest: str | Path) -> None:
    with open(dest, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("id\tlabel\tscore\n")
        for inst in instances:
            label = "1" if inst.label == POSITIVE else "0"
            fh.write(f"{inst.id or ''}\t{label}\t{inst.score!r}\n")
