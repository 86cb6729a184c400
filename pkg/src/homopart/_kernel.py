"""Numba kernels for affine-gap Smith-Waterman with deterministic traceback.

A length-L gap costs gap_open + L * gap_extend. Traceback starts at the
highest-scoring cell, preferring the latest cell in row-major order on score
ties, and resolves per-cell ties with priority diagonal > up > left; inside a
gap run, closing the gap (returning to the match state) wins ties against
extending it. Per cell one byte is recorded: bits 0-1 the match-state move
(0 stop, 1 diagonal, 2 up, 3 left), bit 2 / bit 3 whether the vertical /
horizontal gap opened at this cell.
"""

from __future__ import annotations

import numpy as np
import numba
from numba import njit, prange

# Prefer layers that are always usable; probing TBB warns on older runtimes.
numba.config.THREADING_LAYER_PRIORITY = ["omp", "workqueue", "tbb"]

NEG_INF = -(1 << 28)  # sentinel; stays clear of int32 overflow under repeated extends


@njit(cache=True, nogil=True)
def align_pair(a, b, sub, gap_open, gap_extend, tb):  # pragma: no cover - jitted
    """Return (score, matches, columns, a_start, a_end, b_start, b_end)."""
    la = a.size
    lb = b.size
    goe = gap_open + gap_extend
    hprev = np.zeros(lb + 1, dtype=np.int32)
    hcur = np.zeros(lb + 1, dtype=np.int32)
    fcol = np.full(lb + 1, NEG_INF, dtype=np.int32)
    best = 0
    bi = 0
    bj = 0
    for i in range(1, la + 1):
        srow = sub[a[i - 1]]
        e = NEG_INF
        hcur[0] = 0
        hdiag = np.int32(0)
        for j in range(1, lb + 1):
            e_open = hcur[j - 1] - goe
            e_ext = e - gap_extend
            if e_open >= e_ext:
                e = e_open
                ebit = np.uint8(8)
            else:
                e = e_ext
                ebit = np.uint8(0)
            hup = hprev[j]
            f_open = hup - goe
            f_ext = fcol[j] - gap_extend
            if f_open >= f_ext:
                f = f_open
                fbit = np.uint8(4)
            else:
                f = f_ext
                fbit = np.uint8(0)
            fcol[j] = f
            h = hdiag + srow[b[j - 1]]
            hdiag = hup
            d = np.uint8(1)
            if f > h:
                h = f
                d = np.uint8(2)
            if e > h:
                h = e
                d = np.uint8(3)
            if h <= 0:
                h = 0
                d = np.uint8(0)
            hcur[j] = h
            tb[i, j] = d | fbit | ebit
            if h >= best:
                best = h
                bi = i
                bj = j
        tmp = hprev
        hprev = hcur
        hcur = tmp
    if best == 0:
        return 0, 0, 0, 0, 0, 0, 0
    i = bi
    j = bj
    matches = 0
    columns = 0
    state = 0  # 0 = match state, 1 = vertical gap, 2 = horizontal gap
    while True:
        if state == 0 and (i == 0 or j == 0):  # H is 0 on the borders
            break
        t = tb[i, j]
        if state == 0:
            d = t & 3
            if d == 0:
                break
            if d == 1:
                columns += 1
                if a[i - 1] == b[j - 1]:
                    matches += 1
                i -= 1
                j -= 1
            elif d == 2:
                state = 1
            else:
                state = 2
        elif state == 1:
            columns += 1
            if t & 4:
                state = 0
            i -= 1
        else:
            columns += 1
            if t & 8:
                state = 0
            j -= 1
    return best, matches, columns, i, bi, j, bj


@njit(cache=True, nogil=True)
def lex_less(a, b):  # pragma: no cover - jitted
    n = min(a.size, b.size)
    for i in range(n):
        if a[i] != b[i]:
            return a[i] < b[i]
    return a.size < b.size


@njit(parallel=True, nogil=True, cache=True)
def batch_stats(codes, offsets, lengths, idx_a, idx_b, sub, gap_open, gap_extend,
                scores, matches, columns):  # pragma: no cover - jitted
    """Alignment stats for many pairs; results land at fixed indices so the
    output is independent of scheduling. Pairs are canonicalized (smaller
    sequence first) so the tie-broken stats are symmetric."""
    maxlen = 0
    for i in range(lengths.size):
        if lengths[i] > maxlen:
            maxlen = lengths[i]
    for p in prange(idx_a.size):
        tb = np.empty((maxlen + 1, maxlen + 1), dtype=np.uint8)
        x = idx_a[p]
        y = idx_b[p]
        a = codes[offsets[x] : offsets[x] + lengths[x]]
        b = codes[offsets[y] : offsets[y] + lengths[y]]
        if lex_less(b, a):
            a, b = b, a
        s, m, c, _, _, _, _ = align_pair(a, b, sub, gap_open, gap_extend, tb)
        scores[p] = s
        matches[p] = m
        columns[p] = c
