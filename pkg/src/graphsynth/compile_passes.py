"""Compile passes: action-log reversal into a verified preparation
circuit, peephole rewriting, commutation-aware re-layering, and the
Hadamard push that turns bipartite-graph circuits into CX-only form.
"""

from __future__ import annotations

from functools import lru_cache

import numpy as np

from .circuit import Circuit, Gate
from .conversion import EXACT, to_graph, verify_circuit
from .graphs import CY, CZ, Graph
from .local_clifford import SingleClifford
from .tableau import SINGLE_QUBIT_GATES, StabilizerTableau


class CompileError(RuntimeError):
    pass


# -- reconstruction ----------------------------------------------------


def reconstruct(initial: Graph, log, target: StabilizerTableau) -> Circuit:
    """Turn a decimation action log into a circuit preparing the target.

    The skeleton is H on every qubit followed by the logged gates in
    reverse order (each is its own inverse up to single-qubit dressing);
    the residual per-qubit corrections are solved from the skeleton's
    stabilizer signs, and the target's local-Clifford frame is appended.
    """
    n = initial.n
    g = initial
    for action in log:
        g = g.apply_action(action)
    if g.edge_count() != 0:
        raise ValueError("action log does not decimate the graph to edgeless")

    gates = [Gate("H", (q,)) for q in range(n)]
    gates += [Gate(a.kind, (a.a, a.b)) for a in reversed(log)]
    skeleton = Circuit(n, gates).simulate()

    graph_tab = StabilizerTableau.graph_state(initial)
    for q, row in enumerate(graph_tab.rows()):
        sign = skeleton.contains(row)
        if sign is None:
            raise CompileError(
                f"skeleton does not stabilize the graph state (generator {q})"
            )
        if sign == -1:
            gates.append(Gate("Z", (q,)))

    target_graph, frame = to_graph(target)
    if target_graph != initial:
        raise ValueError("target state's graph differs from the initial graph")
    gates += [Gate(name, (q,)) for name, q in frame.gate_list()]

    circuit = Circuit(n, gates)
    verdict, witness = verify_circuit(circuit, target)
    if verdict != EXACT:
        raise CompileError(f"reconstructed circuit failed verification: {witness}")
    return circuit


# -- commutation oracle ------------------------------------------------

_I2 = np.eye(2)
_M1 = {
    "I": _I2,
    "H": np.array([[1, 1], [1, -1]]) / np.sqrt(2),
    "S": np.diag([1, 1j]),
    "SDG": np.diag([1, -1j]),
    "X": np.array([[0, 1], [1, 0]]),
    "Y": np.array([[0, -1j], [1j, 0]]),
    "Z": np.diag([1, -1]),
}
_M1["SX"] = 0.5 * np.array([[1 + 1j, 1 - 1j], [1 - 1j, 1 + 1j]])
_M1["SXDG"] = _M1["SX"].conj().T

_CZ2 = np.diag([1.0, 1, 1, -1]).astype(complex)
_CX2 = np.array(
    [[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex
)
_CY2 = _CZ2 @ _CX2  # controlled-(ZX)


def _dense_on(name: str, positions: tuple[int, ...], k: int) -> np.ndarray:
    """Matrix of a gate embedded on k qubits (bit 0 = qubit 0)."""
    dim = 1 << k
    out = np.zeros((dim, dim), dtype=complex)
    if len(positions) == 1:
        m, (p,) = _M1[name], positions
        for col in range(dim):
            base = col & ~(1 << p)
            b = (col >> p) & 1
            for b2 in range(2):
                out[base | (b2 << p), col] = m[b2, b]
        return out
    m = {"CZ": _CZ2, "CX": _CX2, "CY": _CY2}[name]
    pc, pt = positions
    for col in range(dim):
        bc, bt = (col >> pc) & 1, (col >> pt) & 1
        base = col & ~(1 << pc) & ~(1 << pt)
        for row2 in range(4):
            amp = m[row2, 2 * bc + bt]
            if amp:
                out[base | ((row2 >> 1) << pc) | ((row2 & 1) << pt), col] = amp
    return out


@lru_cache(maxsize=None)
def _commutes_pattern(name_a, pos_a, name_b, pos_b, k) -> bool:
    ma = _dense_on(name_a, pos_a, k)
    mb = _dense_on(name_b, pos_b, k)
    return np.allclose(ma @ mb, mb @ ma)


def commutes(a: Gate, b: Gate) -> bool:
    """Exact commutation of two gates (dense check on the joint support)."""
    support = sorted(set(a.qubits) | set(b.qubits))
    if len(support) == len(a.qubits) + len(b.qubits):
        return True
    pos = {q: i for i, q in enumerate(support)}
    return _commutes_pattern(
        a.name,
        tuple(pos[q] for q in a.qubits),
        b.name,
        tuple(pos[q] for q in b.qubits),
        len(support),
    )


# -- peephole ----------------------------------------------------------

# Fusions of two-qubit gates on identical (control, target) operands, in
# circuit order; CZ is symmetric and matched in either orientation.
# Each entry maps to replacement gate names; "Zc" is a Z on the control.
_TQ_FUSION = {
    ("CZ", "CZ"): (),
    ("CX", "CX"): (),
    ("CY", "CY"): ("Zc",),
    ("CX", "CZ"): ("CY",),
    ("CZ", "CX"): ("CY", "Zc"),
    ("CY", "CZ"): ("CX",),
    ("CZ", "CY"): ("CX", "Zc"),
    ("CX", "CY"): ("CZ",),
    ("CY", "CX"): ("CZ", "Zc"),
}


def _rewrite_pair(a: Gate, b: Gate) -> list[Gate] | None:
    """Replacement for gate a followed by gate b, or None."""
    if len(a.qubits) == 1 and len(b.qubits) == 1:
        if a.qubits != b.qubits:
            return None
        word = SingleClifford.from_gates([a.name, b.name]).gates()
        if len(word) < 2:
            return [Gate(g, a.qubits) for g in word]
        return None
    if len(a.qubits) != 2 or len(b.qubits) != 2:
        return None
    if set(a.qubits) != set(b.qubits):
        return None
    # orient each gate: CZ adopts the other gate's orientation
    ctrl, tgt = (a if a.name != "CZ" else b).qubits
    if a.name != "CZ" and b.name != "CZ" and a.qubits != b.qubits:
        return None  # opposite-orientation CX/CY pairs have no 2-gate rewrite
    repl = _TQ_FUSION.get((a.name, b.name))
    if repl is None:
        return None
    out = []
    for name in repl:
        if name == "Zc":
            out.append(Gate("Z", (ctrl,)))
        else:
            out.append(Gate(name, (ctrl, tgt)))
    return out


def peephole(c: Circuit) -> Circuit:
    """Fixed-point rewriting: cancellation, CZ/CX/CY fusion, single-qubit
    merges, with commutation-aware adjacency.  Never increases the
    two-qubit gate count."""
    gates = list(c.gates)
    changed = True
    while changed:
        changed = False
        i = 0
        while i < len(gates) and not changed:
            g = gates[i]
            for j in range(i + 1, len(gates)):
                h = gates[j]
                if not set(g.qubits) & set(h.qubits):
                    continue
                repl = _rewrite_pair(g, h)
                if repl is not None:
                    del gates[j]
                    del gates[i]
                    gates[j - 1 : j - 1] = repl
                    changed = True
                    break
                if not commutes(g, h):
                    break
            i += 1
    return Circuit(c.n, gates)


# -- re-layering -------------------------------------------------------


def relayer(c: Circuit) -> Circuit:
    """Place each gate in the earliest layer it can commute back to.

    Scanning layers backwards: a layer with disjoint support is a
    candidate; a layer whose sharing gates all commute may be scanned
    past; anything else stops the scan.  Depth never increases.
    """
    layers: list[list[Gate]] = []
    assignment: list[int] = []
    for g in c.gates:
        best = None
        for li in range(len(layers) - 1, -1, -1):
            sharing = [h for h in layers[li] if set(g.qubits) & set(h.qubits)]
            if not sharing:
                best = li
                continue
            if all(commutes(g, h) for h in sharing):
                continue
            break
        if best is None:
            layers.append([])
            best = len(layers) - 1
        layers[best].append(g)
        assignment.append(best)
    order = sorted(range(len(c.gates)), key=lambda i: assignment[i])
    return Circuit(
        c.n, [c.gates[i] for i in order], [assignment[i] for i in order]
    )


# -- CSS / CX-only form ------------------------------------------------


def css_cx_form(c: Circuit, bipartition) -> Circuit:
    """Conjugate by Hadamards on part A, mapping a bipartite-graph
    circuit (CZ across parts, CX within parts) to CX-only form.

    The output is tableau-equivalent to the input: it is H_A c H_A with
    an H layer on A at both ends, then peephole-cleaned.
    """
    part_a, part_b = bipartition
    in_a = set(part_a)
    if in_a & set(part_b):
        raise ValueError("bipartition parts overlap")

    def part(q):
        return 0 if q in in_a else 1

    gates = [Gate("H", (q,)) for q in sorted(in_a)]
    for g in c.gates:
        if g.name == "CY":
            raise CompileError("CY gate in input; not a bipartite-graph circuit")
        if g.name == "CZ":
            pa, pb = g.qubits
            if part(pa) == part(pb):
                raise CompileError(f"CZ within one part: {g}")
            ctrl, tgt = (pb, pa) if pa in in_a else (pa, pb)
            gates.append(Gate("CX", (ctrl, tgt)))
        elif g.name == "CX":
            ctrl, tgt = g.qubits
            if part(ctrl) != part(tgt):
                raise CompileError(f"CX across parts: {g}")
            if ctrl in in_a:
                gates.append(Gate("CX", (tgt, ctrl)))
            else:
                gates.append(g)
        elif g.name in SINGLE_QUBIT_GATES:
            (q,) = g.qubits
            if q in in_a:
                word = SingleClifford.from_gates(["H", g.name, "H"]).gates()
                gates.extend(Gate(w, (q,)) for w in word)
            else:
                gates.append(g)
        else:
            raise CompileError(f"unsupported gate {g}")
    gates += [Gate("H", (q,)) for q in sorted(in_a)]
    return peephole(Circuit(c.n, gates))
