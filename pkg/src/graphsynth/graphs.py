"""Simple undirected graphs and the edge-complementation semantics of
two-qubit Clifford gates acting on graph states.

A graph on n labeled nodes is stored as a symmetric boolean adjacency
matrix with zero diagonal.  Graphs are immutable values: every operation
returns a new instance, so they can be shared freely across workers.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

CZ = "CZ"
CX = "CX"
CY = "CY"

ACTION_KINDS = (CZ, CX, CY)


@dataclass(frozen=True, order=True)
class Action:
    """One decimation move: CZ on an unordered pair, or CX/CY control->target.

    CZ pairs are canonicalized so that a < b.
    """

    kind: str
    a: int
    b: int

    def __post_init__(self):
        if self.kind not in ACTION_KINDS:
            raise ValueError(f"unknown action kind {self.kind!r}")
        if self.a == self.b:
            raise ValueError("action endpoints must differ")
        if self.kind == CZ and self.a > self.b:
            a, b = self.b, self.a
            object.__setattr__(self, "a", a)
            object.__setattr__(self, "b", b)

    def qubits(self) -> tuple[int, int]:
        return (self.a, self.b)


class Graph:
    """Immutable simple undirected graph backed by a boolean bit-matrix."""

    __slots__ = ("n", "adj")

    def __init__(self, adj: np.ndarray):
        adj = np.asarray(adj, dtype=bool)
        if adj.ndim != 2 or adj.shape[0] != adj.shape[1]:
            raise ValueError("adjacency matrix must be square")
        if adj.diagonal().any():
            raise ValueError("adjacency diagonal must be zero")
        if not np.array_equal(adj, adj.T):
            raise ValueError("adjacency matrix must be symmetric")
        adj = adj.copy()
        adj.setflags(write=False)
        object.__setattr__(self, "n", adj.shape[0])
        object.__setattr__(self, "adj", adj)

    def __setattr__(self, *_):
        raise AttributeError("Graph is immutable")

    def __reduce__(self):
        return (Graph, (np.asarray(self.adj),))

    @staticmethod
    def empty(n: int) -> "Graph":
        return Graph(np.zeros((n, n), dtype=bool))

    @staticmethod
    def from_edges(n: int, edges) -> "Graph":
        adj = np.zeros((n, n), dtype=bool)
        for i, j in edges:
            if i == j:
                raise ValueError("self-loops not allowed")
            adj[i, j] = adj[j, i] = True
        return Graph(adj)

    @staticmethod
    def cycle(n: int) -> "Graph":
        return Graph.from_edges(n, [(i, (i + 1) % n) for i in range(n)])

    @staticmethod
    def star(n: int, center: int = 0) -> "Graph":
        return Graph.from_edges(n, [(center, j) for j in range(n) if j != center])

    @staticmethod
    def complete(n: int) -> "Graph":
        adj = ~np.eye(n, dtype=bool)
        return Graph(adj)

    # -- basic queries ------------------------------------------------

    def _check_node(self, i: int):
        if not 0 <= i < self.n:
            raise IndexError(f"node {i} out of range for n={self.n}")

    def neighborhood(self, i: int) -> set[int]:
        self._check_node(i)
        return set(np.flatnonzero(self.adj[i]).tolist())

    def degree(self, i: int) -> int:
        self._check_node(i)
        return int(self.adj[i].sum())

    def degrees(self) -> np.ndarray:
        return self.adj.sum(axis=1)

    def edge_count(self) -> int:
        return int(self.adj.sum()) // 2

    def edges(self) -> list[tuple[int, int]]:
        ii, jj = np.nonzero(np.triu(self.adj))
        return list(zip(ii.tolist(), jj.tolist()))

    def max_degree(self) -> int:
        if self.n == 0:
            return 0
        return int(self.adj.sum(axis=1).max())

    def key(self) -> bytes:
        """Stable hashable fingerprint of the adjacency matrix."""
        return np.packbits(self.adj).tobytes()

    def __eq__(self, other):
        return isinstance(other, Graph) and np.array_equal(self.adj, other.adj)

    def __hash__(self):
        return hash(self.key())

    def __repr__(self):
        return f"Graph(n={self.n}, edges={self.edges()})"

    # -- transformations ----------------------------------------------

    def local_complement(self, i: int) -> "Graph":
        """Toggle every edge between two neighbors of node i."""
        self._check_node(i)
        nb = self.adj[i]
        adj = self.adj.copy()
        block = np.outer(nb, nb)
        np.fill_diagonal(block, False)
        adj ^= block
        return Graph(adj)

    def pivot(self, i: int, j: int) -> "Graph":
        """LC_i LC_j LC_i for an edge {i,j}; preserves bipartiteness."""
        if not self.adj[i, j]:
            raise ValueError("pivot requires connected nodes")
        return self.local_complement(i).local_complement(j).local_complement(i)

    def apply_action(self, action: Action) -> "Graph":
        """Apply the graph-level effect of a CZ/CX/CY gate."""
        i, j = action.a, action.b
        self._check_node(i)
        self._check_node(j)
        adj = self.adj.copy()
        if action.kind == CZ:
            adj[i, j] ^= True
            adj[j, i] ^= True
        else:
            toggles = self.adj[j].copy()
            if action.kind == CY:
                toggles[j] = True
            toggles[i] = False
            adj[i] ^= toggles
            adj[:, i] ^= toggles
        return Graph(adj)

    def edge_delta(self, action: Action) -> int:
        """Edges removed minus edges added by an action (popcount only)."""
        i, j = action.a, action.b
        self._check_node(i)
        self._check_node(j)
        eij = bool(self.adj[i, j])
        if action.kind == CZ:
            return 1 if eij else -1
        shared = int(np.count_nonzero(self.adj[i] & self.adj[j]))
        deg_j = int(self.adj[j].sum())
        delta = 2 * shared - deg_j + (1 if eij else 0)
        if action.kind == CY:
            delta += 1 if eij else -1
        return delta

    # -- structure ----------------------------------------------------

    def bipartition(self) -> tuple[list[int], list[int]] | None:
        """Two-color the nodes, or None if the graph has an odd cycle.

        Isolated nodes and tie-break choices go to the first part
        deterministically (BFS from the lowest unvisited node).
        """
        color = np.full(self.n, -1, dtype=int)
        for start in range(self.n):
            if color[start] != -1:
                continue
            color[start] = 0
            queue = [start]
            while queue:
                v = queue.pop()
                for w in np.flatnonzero(self.adj[v]):
                    if color[w] == -1:
                        color[w] = color[v] ^ 1
                        queue.append(int(w))
                    elif color[w] == color[v]:
                        return None
        part_a = np.flatnonzero(color == 0).tolist()
        part_b = np.flatnonzero(color == 1).tolist()
        return part_a, part_b

    def is_bipartite(self) -> bool:
        return self.bipartition() is not None


# -- canonical action enumeration -------------------------------------
#
# Fixed ordering shared by the search engines and the bridge protocol:
# CZ pairs (i<j) lexicographic, then CX ordered pairs (i, j != i) in
# row-major order, then CY ordered pairs likewise.


def total_action_count(n: int) -> int:
    return (5 * n * (n - 1)) // 2


def all_actions(n: int) -> list[Action]:
    acts = [Action(CZ, i, j) for i in range(n) for j in range(i + 1, n)]
    for kind in (CX, CY):
        acts.extend(
            Action(kind, i, j) for i in range(n) for j in range(n) if i != j
        )
    return acts


def action_from_index(n: int, idx: int) -> Action:
    n_cz = n * (n - 1) // 2
    n_ord = n * (n - 1)
    if idx < 0 or idx >= total_action_count(n):
        raise IndexError(f"action index {idx} out of range")
    if idx < n_cz:
        # unrank upper-triangle pair
        i = 0
        remaining = idx
        row = n - 1
        while remaining >= row:
            remaining -= row
            row -= 1
            i += 1
        return Action(CZ, i, i + 1 + remaining)
    idx -= n_cz
    kind = CX if idx < n_ord else CY
    idx %= n_ord
    i, r = divmod(idx, n - 1)
    j = r if r < i else r + 1
    return Action(kind, i, j)


def action_to_index(n: int, action: Action) -> int:
    n_cz = n * (n - 1) // 2
    n_ord = n * (n - 1)
    i, j = action.a, action.b
    if action.kind == CZ:
        return (2 * n - i - 1) * i // 2 + (j - i - 1)
    base = n_cz + (n_ord if action.kind == CY else 0)
    return base + i * (n - 1) + (j if j < i else j - 1)


def batch_action_deltas(adjs: np.ndarray) -> np.ndarray:
    """Edge deltas for every action on a batch of graphs.

    adjs: (B, n, n) boolean batch.  Returns float32 (B, A_tot) aligned
    with the canonical action ordering.
    """
    adjs = np.asarray(adjs)
    b, n, _ = adjs.shape
    a = adjs.astype(np.float32)
    shared = a @ a  # shared[b, i, j] = |n(i) & n(j)|
    deg = a.sum(axis=2)  # (B, n)
    cx = 2.0 * shared - deg[:, None, :] + a
    cy = cx + (2.0 * a - 1.0)
    cz_full = 2.0 * a - 1.0

    iu, ju = np.triu_indices(n, k=1)
    off = ~np.eye(n, dtype=bool)
    out = np.empty((b, total_action_count(n)), dtype=np.float32)
    n_cz = n * (n - 1) // 2
    n_ord = n * (n - 1)
    out[:, :n_cz] = cz_full[:, iu, ju]
    out[:, n_cz : n_cz + n_ord] = cx[:, off]
    out[:, n_cz + n_ord :] = cy[:, off]
    return out


def action_qubit_masks(n: int) -> np.ndarray:
    """(A_tot, n) boolean: which qubits each canonical action touches."""
    masks = np.zeros((total_action_count(n), n), dtype=bool)
    for idx, act in enumerate(all_actions(n)):
        masks[idx, act.a] = True
        masks[idx, act.b] = True
    return masks


@lru_cache(maxsize=None)
def action_tables(n: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """(kind, a, b) arrays over the canonical ordering; kind 0=CZ 1=CX 2=CY."""
    acts = all_actions(n)
    kinds = np.array([ACTION_KINDS.index(a.kind) for a in acts], dtype=np.int64)
    a_arr = np.array([a.a for a in acts], dtype=np.int64)
    b_arr = np.array([a.b for a in acts], dtype=np.int64)
    return kinds, a_arr, b_arr


def batch_apply_action_indices(adjs: np.ndarray, indices: np.ndarray) -> np.ndarray:
    """Apply one canonical action per graph in a batch, returning new graphs."""
    adjs = np.array(adjs, dtype=bool)  # copy
    b, n, _ = adjs.shape
    idx = np.asarray(indices, dtype=np.int64)
    kinds, a_all, b_all = action_tables(n)
    ka, ia, ja = kinds[idx], a_all[idx], b_all[idx]
    rows = np.arange(b)

    cz = ka == 0
    r = rows[cz]
    adjs[r, ia[cz], ja[cz]] ^= True
    adjs[r, ja[cz], ia[cz]] ^= True

    r = rows[~cz]
    if r.size:
        i, j = ia[~cz], ja[~cz]
        tog = adjs[r, j].copy()
        cy = ka[~cz] == 2
        tog[cy, j[cy]] = True
        tog[np.arange(r.size), i] = False
        adjs[r, i, :] ^= tog
        adjs[r, :, i] ^= tog
    return adjs
