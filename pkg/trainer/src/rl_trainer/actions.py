"""Canonical action indexing of the bridge protocol.

The environment indexes its ``(5/2)N(N-1)`` actions canonically: CZ on
unordered pairs in lexicographic order, then CX on ordered (control,
target) pairs row-major, then CY likewise.  Guidance requests
(``policy_request``) and self-play visit distributions refer to actions
by these indices, so the trainer needs the same numbering.
"""

from __future__ import annotations

import numpy as np

CZ, CX, CY = "CZ", "CX", "CY"
ACTION_KINDS = (CZ, CX, CY)


def total_action_count(n: int) -> int:
    return (5 * n * (n - 1)) // 2


def action_triples(n: int) -> list[tuple[str, int, int]]:
    """All actions as (kind, a, b) triples in canonical order."""
    acts = [(CZ, i, j) for i in range(n) for j in range(i + 1, n)]
    for kind in (CX, CY):
        acts.extend((kind, i, j) for i in range(n) for j in range(n) if i != j)
    return acts


def action_index(n: int, kind: str, a: int, b: int) -> int:
    """Canonical index of one action triple."""
    if kind not in ACTION_KINDS:
        raise ValueError(f"unknown action kind {kind!r}")
    if a == b or not (0 <= a < n and 0 <= b < n):
        raise ValueError(f"bad action endpoints ({a}, {b}) for n={n}")
    n_cz = n * (n - 1) // 2
    n_ord = n * (n - 1)
    if kind == CZ:
        i, j = (a, b) if a < b else (b, a)
        # rank of the upper-triangle pair (i, j)
        return i * n - i * (i + 1) // 2 + (j - i - 1)
    base = n_cz + (0 if kind == CX else n_ord)
    return base + a * (n - 1) + (b if b < a else b - 1)


def index_to_triple(n: int, idx: int) -> tuple[str, int, int]:
    """Inverse of action_index."""
    if idx < 0 or idx >= total_action_count(n):
        raise IndexError(f"action index {idx} out of range")
    n_cz = n * (n - 1) // 2
    n_ord = n * (n - 1)
    if idx < n_cz:
        i, remaining, row = 0, idx, n - 1
        while remaining >= row:
            remaining -= row
            row -= 1
            i += 1
        return (CZ, i, i + 1 + remaining)
    idx -= n_cz
    kind = CX if idx < n_ord else CY
    idx %= n_ord
    a, r = divmod(idx, n - 1)
    b = r if r < a else r + 1
    return (kind, a, b)


def triples_to_indices(n: int, triples) -> np.ndarray:
    return np.array([action_index(n, k, a, b) for k, a, b in triples], dtype=np.int64)
