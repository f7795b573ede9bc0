"""CSV emission with hash-carrying comment headers.

All files are comma separated with ``#``-prefixed comment lines carrying the
tool version and the configuration hash; floats are printed with 17
significant digits so runs reproduce bit-identically on one platform.
"""

from __future__ import annotations

import os
from typing import Sequence

import numpy as np


def _fmt(x) -> str:
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return f"{float(x):.17g}"


def write_csv(
    path: str,
    columns: Sequence[tuple[str, np.ndarray]],
    comments: Sequence[str] = (),
) -> None:
    """Write named columns as CSV; ``comments`` become ``#`` header lines."""
    names = [name for name, _ in columns]
    arrays = [np.asarray(col) for _, col in columns]
    n = len(arrays[0]) if arrays else 0
    for name, arr in zip(names, arrays):
        if len(arr) != n:
            raise ValueError(f"column {name!r} has length {len(arr)}, expected {n}")
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for line in comments:
            fh.write(f"# {line}\n")
        fh.write(",".join(names) + "\n")
        for i in range(n):
            fh.write(",".join(_fmt(arr[i]) for arr in arrays) + "\n")


def standard_comments(version: str, cfg_hash: str, extra: Sequence[str] = ()) -> list[str]:
    return [f"lagopt v{version}", f"config {cfg_hash}", *extra]
