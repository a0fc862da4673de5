"""Row-major flattening of multi-dimensional assignments.

Every table in this package (type distributions, payoffs, factor tables,
serialized games) is flattened the same way: the first position in a scope
is the most significant digit.
"""

from __future__ import annotations

from functools import lru_cache
from math import prod
from typing import Sequence

import numpy as np


def strides(scope_sizes: Sequence[int]) -> tuple[int, ...]:
    """Row-major strides for a sequence of domain sizes."""
    out = []
    acc = 1
    for size in reversed(scope_sizes):
        out.append(acc)
        acc *= size
    return tuple(reversed(out))


def local_index(scope_sizes: Sequence[int], assignment: Sequence[int]) -> int:
    """Flatten ``assignment`` over ``scope_sizes`` into a row-major index.

    Raises ValueError on length mismatch or out-of-range digits.
    """
    if len(scope_sizes) != len(assignment):
        raise ValueError(
            f"assignment length {len(assignment)} != scope length {len(scope_sizes)}"
        )
    idx = 0
    for size, digit in zip(scope_sizes, assignment):
        if not 0 <= digit < size:
            raise ValueError(f"digit {digit} out of range for domain size {size}")
        idx = idx * size + digit
    return idx


def local_unindex(scope_sizes: Sequence[int], index: int) -> tuple[int, ...]:
    """Inverse of :func:`local_index`."""
    total = prod(scope_sizes)
    if not 0 <= index < total:
        raise ValueError(f"index {index} out of range for sizes {tuple(scope_sizes)}")
    digits = []
    for size in reversed(scope_sizes):
        index, digit = divmod(index, size)
        digits.append(digit)
    return tuple(reversed(digits))


@lru_cache(maxsize=4096)
def digit_table(scope_sizes: tuple[int, ...]) -> np.ndarray:
    """All assignments over ``scope_sizes`` as an (N, k) int array, row-major.

    Row i equals ``local_unindex(scope_sizes, i)``.  Cached; callers must not
    mutate the result.
    """
    if not scope_sizes:
        return np.zeros((1, 0), dtype=np.int64)
    grids = np.indices(scope_sizes).reshape(len(scope_sizes), -1).T
    return np.ascontiguousarray(grids, dtype=np.int64)
