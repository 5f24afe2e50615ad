"""Conversion between stabilizer tableaux and graph-plus-frame form, and
the circuit verification oracle built on it.

Every stabilizer state equals C|G> for a graph G and per-qubit Cliffords
C; the converter finds them by Gaussian elimination with exact sign
tracking, and is deterministic (greedy lowest-index Hadamard pivoting).
"""

from __future__ import annotations

import numpy as np

from .circuit import Circuit
from .graphs import Graph
from .local_clifford import LocalCliffordFrame, SingleClifford, _INVERSE_NAME
from .tableau import PauliString, StabilizerTableau, TableauError, _gf2_rank

EXACT = "exact"
UP_TO_LOCAL_CLIFFORD = "up-to-local-clifford"
FAIL = "fail"


def to_graph(t: StabilizerTableau) -> tuple[Graph, LocalCliffordFrame]:
    """Decompose a stabilizer state as |psi> = C|G>.

    Applies single-qubit gates U (Hadamards for X-rank, S for the Z
    diagonal, Z for signs) to reach the canonical graph-state tableau;
    the returned frame is C = U^dagger.
    """
    work = t.copy()
    n = work.n
    applied: list[list[str]] = [[] for _ in range(n)]

    def x_rank():
        return _gf2_rank(work.xs.astype(np.uint8))

    rank = x_rank()
    while rank < n:
        progressed = False
        for q in range(n):
            work.apply_gate_inplace("H", q)
            new_rank = x_rank()
            if new_rank > rank:
                applied[q].append("H")
                rank = new_rank
                progressed = True
                break
            work.apply_gate_inplace("H", q)  # revert (H is an involution)
        if not progressed:
            raise TableauError("cannot make X block full rank")  # invariant

    # Row-reduce the X block to the identity (phases tracked exactly).
    for col in range(n):
        pivot = None
        for r in range(col, n):
            if work.xs[r, col]:
                pivot = r
                break
        assert pivot is not None, "X block lost full rank"
        if pivot != col:
            for arr in (work.xs, work.zs, work.phases):
                arr[[col, pivot]] = arr[[pivot, col]]
        for r in range(n):
            if r != col and work.xs[r, col]:
                work._row_mul(r, col)

    if not np.array_equal(work.zs, work.zs.T):
        raise TableauError("Z block is not symmetric")  # invariant

    for q in range(n):
        if work.zs[q, q]:
            work.apply_gate_inplace("S", q)
            applied[q].append("S")
    for q in range(n):
        if work.phases[q]:
            work.apply_gate_inplace("Z", q)
            applied[q].append("Z")

    adj = work.zs.copy()
    np.fill_diagonal(adj, False)
    graph = Graph(adj)
    frame = LocalCliffordFrame(
        [
            SingleClifford.from_gates([_INVERSE_NAME[g] for g in reversed(seq)])
            for seq in applied
        ]
    )
    return graph, frame


def dress_graph_tableau(graph: Graph, frame: LocalCliffordFrame) -> StabilizerTableau:
    """Tableau of C|G>: the canonical graph tableau conjugated by the frame."""
    t = StabilizerTableau.graph_state(graph)
    for gate, q in frame.gate_list():
        t.apply_gate_inplace(gate, q)
    return t


def verify_circuit(circuit: Circuit, target: StabilizerTableau):
    """Check a preparation circuit against a target state.

    Returns (verdict, detail): 'exact' when stabilizer groups match with
    signs, 'up-to-local-clifford' when both states canonicalize to the
    same graph, else 'fail' with the first distinguishing generator.
    """
    if circuit.n != target.n:
        raise ValueError(
            f"circuit acts on {circuit.n} qubits, target has {target.n}"
        )
    result = circuit.simulate()
    if result.same_group(target):
        return EXACT, None
    g_result, _ = to_graph(result)
    g_target, _ = to_graph(target)
    if g_result == g_target:
        return UP_TO_LOCAL_CLIFFORD, None
    witness = target.first_difference(result)
    return FAIL, witness
