"""Feature engineering on bridge observations.

Observations are the upper-triangle adjacency bits of the environment
graph (row-major).  Everything here is derived from those bits plus the
documented action semantics, which are observable through the protocol
(``step`` reports the net ``edge_delta`` of every action taken); the
correspondence is asserted against a live bridge in the tests.
"""

from __future__ import annotations

import base64

import numpy as np

from .actions import total_action_count


def decode_observation(obs: dict) -> np.ndarray:
    """Bridge observation payload -> uint8 bit vector."""
    raw = np.frombuffer(base64.b64decode(obs["bits"]), dtype=np.uint8)
    return np.unpackbits(raw)[: obs["bit_length"]]


def bits_length(n: int) -> int:
    return n * (n - 1) // 2


def qubit_count(bit_length: int) -> int:
    """Invert n(n-1)/2; raises if bit_length is not of that form."""
    n = int(round((1 + np.sqrt(1 + 8 * bit_length)) / 2))
    if n * (n - 1) // 2 != bit_length:
        raise ValueError(f"observation length {bit_length} is not n(n-1)/2")
    return n


def adjacency(n: int, bits: np.ndarray) -> np.ndarray:
    """Upper-triangle bits -> symmetric boolean adjacency matrix."""
    adj = np.zeros((n, n), dtype=bool)
    iu, ju = np.triu_indices(n, k=1)
    adj[iu, ju] = bits.astype(bool)
    adj[ju, iu] = adj[iu, ju]
    return adj


def action_deltas(adj: np.ndarray) -> np.ndarray:
    """Net edges removed by every canonical action (negative = added).

    CZ toggles its edge; CX (a->b) toggles {a,k} for k in N(b)\\{a}; CY
    additionally toggles {a,b}.
    """
    n = adj.shape[0]
    a = adj.astype(np.float32)
    shared = a @ a
    deg = a.sum(axis=1)
    cx = 2.0 * shared - deg[None, :] + a
    cy = cx + (2.0 * a - 1.0)
    cz = 2.0 * a - 1.0

    iu, ju = np.triu_indices(n, k=1)
    off = ~np.eye(n, dtype=bool)
    out = np.empty(total_action_count(n), dtype=np.float32)
    n_cz = n * (n - 1) // 2
    n_ord = n * (n - 1)
    out[:n_cz] = cz[iu, ju]
    out[n_cz : n_cz + n_ord] = cx[off]
    out[n_cz + n_ord :] = cy[off]
    return out


def action_mask(adj: np.ndarray) -> np.ndarray:
    """The bridge's masked action set: net delta >= 1."""
    return action_deltas(adj) >= 1


def batch_adjacency(n: int, bits: np.ndarray) -> np.ndarray:
    """(B, L) upper-triangle bit rows -> (B, n, n) boolean batch."""
    b = bits.shape[0]
    adjs = np.zeros((b, n, n), dtype=bool)
    iu, ju = np.triu_indices(n, k=1)
    adjs[:, iu, ju] = bits.astype(bool)
    adjs[:, ju, iu] = adjs[:, iu, ju]
    return adjs


def batch_action_deltas(adjs: np.ndarray) -> np.ndarray:
    """action_deltas over a (B, n, n) batch; returns (B, A)."""
    b, n, _ = adjs.shape
    a = adjs.astype(np.float32)
    shared = a @ a
    deg = a.sum(axis=2)
    cx = 2.0 * shared - deg[:, None, :] + a
    cy = cx + (2.0 * a - 1.0)
    cz = 2.0 * a - 1.0

    iu, ju = np.triu_indices(n, k=1)
    off = ~np.eye(n, dtype=bool)
    out = np.empty((b, total_action_count(n)), dtype=np.float32)
    n_cz = n * (n - 1) // 2
    n_ord = n * (n - 1)
    out[:, :n_cz] = cz[:, iu, ju]
    out[:, n_cz : n_cz + n_ord] = cx[:, off]
    out[:, n_cz + n_ord :] = cy[:, off]
    return out


def heuristic_value(adj: np.ndarray) -> float:
    """The environment's default guidance value: total removable-edge
    mass (lower is better, 0 at terminal)."""
    return float(np.maximum(action_deltas(adj), 0.0).sum())


def heuristic_policy(adj: np.ndarray, action_indices: np.ndarray) -> np.ndarray:
    """The environment's default guidance policy: weight max(delta, 0)
    with a uniform fallback."""
    w = np.maximum(action_deltas(adj)[action_indices], 0.0).astype(np.float64)
    total = w.sum()
    if total <= 0:
        return np.full(len(action_indices), 1.0 / len(action_indices))
    return w / total


def update_layer_occupancy(occ: np.ndarray, a: int, b: int) -> None:
    """Track which qubits already carry a gate in the current circuit
    layer under greedy layering: a gate touching an occupied qubit
    starts a new layer."""
    if occ[a] or occ[b]:
        occ[:] = 0
    occ[a] = 1
    occ[b] = 1


def layer_occupancy(n: int, actions) -> np.ndarray:
    """Greedy-layering occupancy after an action sequence."""
    occ = np.zeros(n, dtype=np.uint8)
    for _, a, b in actions:
        update_layer_occupancy(occ, a, b)
    return occ


def observation_vector(n: int, bits: np.ndarray, with_deltas: bool = False) -> np.ndarray:
    """Network input: adjacency bits, optionally with per-action edge
    deltas appended (scaled to a bounded range)."""
    x = bits.astype(np.float32)
    if with_deltas:
        deltas = action_deltas(adjacency(n, bits))
        x = np.concatenate([x, deltas / n])
    return x
