"""Reading observation sequences from disk."""

import os
from pathlib import Path

import numpy as np

from .exceptions import ConfigError, InputError

FORMATS = ("csv-vectors", "adjacency-stack", "adjacency-dir")


def _parse_row(line, where):
    try:
        return [float(x) for x in line.replace(",", " ").split()]
    except ValueError as exc:
        raise InputError(f"{where}: non-numeric entry") from exc


def read_csv_vectors(path, min_n=4):
    """One observation per non-blank line, comma separated numeric columns."""
    rows = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            if not line.strip():
                continue
            rows.append(_parse_row(line, f"{path}:{lineno}"))
    widths = {len(r) for r in rows}
    if len(widths) > 1:
        raise InputError(f"{path}: ragged rows (widths {sorted(widths)})")
    _check_length(len(rows), min_n)
    return np.asarray(rows, dtype=float)


def _check_adjacency(block, where):
    A = np.asarray(block, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise InputError(f"{where}: adjacency matrix is not square")
    if not np.all((A == 0) | (A == 1)):
        raise InputError(f"{where}: adjacency entries must be 0 or 1")
    return A.astype(np.int64)


def _read_blocks(text, where):
    blocks, cur = [], []
    for lineno, line in enumerate(text.splitlines(), 1):
        if line.strip():
            cur.append(_parse_row(line, f"{where}:{lineno}"))
        elif cur:
            blocks.append(cur)
            cur = []
    if cur:
        blocks.append(cur)
    out = []
    for i, b in enumerate(blocks):
        if len({len(r) for r in b}) > 1:
            raise InputError(f"{where}: ragged rows in block {i + 1}")
        out.append(_check_adjacency(b, f"{where} block {i + 1}"))
    return out


def read_adjacency_stack(path, min_n=4):
    """Blank-line separated square 0/1 blocks, one per time point."""
    mats = _read_blocks(Path(path).read_text(encoding="utf-8"), str(path))
    return _stack(mats, min_n)


def read_adjacency_dir(path, min_n=4):
    """One adjacency file per time point, taken in lexicographic file-name order."""
    names = sorted(f for f in os.listdir(path) if not f.startswith(".") and os.path.isfile(os.path.join(path, f)))
    mats = []
    for name in names:
        blocks = _read_blocks(Path(path, name).read_text(encoding="utf-8"), name)
        if len(blocks) != 1:
            raise InputError(f"{name}: expected exactly one adjacency matrix, found {len(blocks)}")
        mats.append(blocks[0])
    return _stack(mats, min_n)


def _stack(mats, min_n):
    _check_length(len(mats), min_n)
    if len({m.shape for m in mats}) > 1:
        raise InputError("adjacency matrices differ in size")
    return np.stack(mats)


def _check_length(n, min_n):
    if n < min_n:
        raise InputError(f"need at least {min_n} observations, got {n}")


def ingest(path, fmt="csv-vectors", min_n=4):
    """Read a sequence of observations.

    Parameters
    ----------
    path : str or Path
    fmt : {"csv-vectors", "adjacency-stack", "adjacency-dir"}
    min_n : int
        Minimum number of observations.

    Returns
    -------
    ndarray
        ``(n, d)`` for vectors, ``(n, v, v)`` for adjacency input.
    """
    readers = {
        "csv-vectors": read_csv_vectors,
        "adjacency-stack": read_adjacency_stack,
        "adjacency-dir": read_adjacency_dir,
    }
    if fmt not in readers:
        raise ConfigError(f"format must be one of {', '.join(FORMATS)}; got {fmt!r}")
    try:
        return readers[fmt](path, min_n=min_n)
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror or exc}") from exc
