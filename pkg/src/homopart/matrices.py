"""Bundled substitution matrices."""

from __future__ import annotations

from importlib import resources

import numpy as np

from .corpus import CANONICAL_ALPHABET
from .errors import InputError


def load_matrix(name: str = "BLOSUM62") -> np.ndarray:
    """Load a bundled substitution matrix as a 20x20 int32 array.

    Rows/columns are ordered by `CANONICAL_ALPHABET` (alphabetical one-letter
    codes), independent of the ordering used in the matrix file.
    """
    fname = name.lower() + ".txt"
    try:
        text = resources.files("homopart.data").joinpath(fname).read_text()
    except FileNotFoundError:
        raise InputError(f"no bundled substitution matrix named {name!r}") from None
    return _parse_matrix_text(text)


def _parse_matrix_text(text: str) -> np.ndarray:
    lines = [ln for ln in text.splitlines() if ln.strip() and not ln.lstrip().startswith("#")]
    header = lines[0].split()
    col_index = {aa: i for i, aa in enumerate(header)}
    raw = {}
    for ln in lines[1:]:
        parts = ln.split()
        raw[parts[0]] = [int(v) for v in parts[1:]]
    mat = np.zeros((20, 20), dtype=np.int32)
    for i, a in enumerate(CANONICAL_ALPHABET):
        for j, b in enumerate(CANONICAL_ALPHABET):
            mat[i, j] = raw[a][col_index[b]]
    if not np.array_equal(mat, mat.T):
        raise InputError("substitution matrix is not symmetric")
    return mat
