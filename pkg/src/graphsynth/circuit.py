"""Clifford circuits as ordered gate lists with layer assignments.

Layers are disjoint-support groups of gates; the two-qubit depth is the
number of layers holding at least one two-qubit gate.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .tableau import SINGLE_QUBIT_GATES, TWO_QUBIT_GATES, StabilizerTableau


@dataclass(frozen=True)
class Gate:
    name: str
    qubits: tuple[int, ...]

    def __post_init__(self):
        if self.name in TWO_QUBIT_GATES:
            if len(self.qubits) != 2 or self.qubits[0] == self.qubits[1]:
                raise ValueError(f"{self.name} needs two distinct qubits")
        elif self.name in SINGLE_QUBIT_GATES:
            if len(self.qubits) != 1:
                raise ValueError(f"{self.name} needs one qubit")
        else:
            raise ValueError(f"unknown gate {self.name!r}")

    @property
    def is_two_qubit(self) -> bool:
        return self.name in TWO_QUBIT_GATES

    def __str__(self):
        return f"{self.name} {','.join(map(str, self.qubits))}"


class Circuit:
    """Ordered gate list on n qubits, with a derived layer assignment."""

    def __init__(self, n: int, gates=None, layers=None):
        self.n = n
        self.gates: list[Gate] = list(gates or [])
        for g in self.gates:
            for q in g.qubits:
                if not 0 <= q < n:
                    raise ValueError(f"gate {g} operand out of range for n={n}")
        if layers is None:
            layers = greedy_layers(self.gates)
        if len(layers) != len(self.gates):
            raise ValueError("one layer index per gate required")
        self.layers = list(layers)

    def append(self, name: str, *qubits: int):
        self.gates.append(Gate(name, tuple(qubits)))
        self.layers = greedy_layers(self.gates)

    @property
    def tq_gate_count(self) -> int:
        return sum(1 for g in self.gates if g.is_two_qubit)

    @property
    def tq_depth(self) -> int:
        tq_layers = {l for g, l in zip(self.gates, self.layers) if g.is_two_qubit}
        return len(tq_layers)

    @property
    def depth(self) -> int:
        return max(self.layers, default=-1) + 1

    def simulate(self) -> StabilizerTableau:
        """Run the circuit on |0>^n and return the resulting tableau."""
        t = StabilizerTableau.zero_state(self.n)
        for g in self.gates:
            t.apply_gate_inplace(g.name, *g.qubits)
        return t

    def copy(self) -> "Circuit":
        return Circuit(self.n, list(self.gates), list(self.layers))

    def __len__(self):
        return len(self.gates)

    def __eq__(self, other):
        return (
            isinstance(other, Circuit)
            and self.n == other.n
            and self.gates == other.gates
        )

    def __repr__(self):
        return f"Circuit(n={self.n}, gates={len(self.gates)}, tqg={self.tq_gate_count})"

    # -- serialization ------------------------------------------------

    def to_text(self) -> str:
        lines = [f"# qubits {self.n}"]
        current = None
        for g, layer in zip(self.gates, self.layers):
            if layer != current:
                lines.append(f"# layer {layer}")
                current = layer
            lines.append(str(g))
        return "\n".join(lines) + "\n"

    @staticmethod
    def from_text(text: str) -> "Circuit":
        n = None
        gates = []
        for lineno, raw in enumerate(text.splitlines(), start=1):
            line = raw.strip()
            if not line:
                continue
            if line.startswith("#"):
                parts = line[1:].split()
                if parts[:1] == ["qubits"]:
                    n = int(parts[1])
                continue
            try:
                name, operands = line.split(None, 1)
                qubits = tuple(int(tok) for tok in operands.split(","))
            except ValueError:
                raise ValueError(f"line {lineno}: cannot parse gate {line!r}")
            gates.append(Gate(name, qubits))
        if n is None:
            n = 1 + max((q for g in gates for q in g.qubits), default=-1)
        return Circuit(n, gates)


def greedy_layers(gates) -> list[int]:
    """Earliest-layer assignment without commutation analysis."""
    frontier: dict[int, int] = {}
    layers = []
    for g in gates:
        layer = max((frontier.get(q, -1) for q in g.qubits), default=-1) + 1
        layers.append(layer)
        for q in g.qubits:
            frontier[q] = layer
    return layers
