"""Exact stabilizer-tableau simulation with sign tracking.

Generators are stored as boolean X/Z bit matrices plus a sign bit per
row.  All Clifford conjugations are exact, including the phase
convention CY = |0><0| (x) I + |1><1| (x) ZX (real, no factor of i), so
CY = CZ . CX as a matrix product.
"""

from __future__ import annotations

import numpy as np

from .graphs import Graph


class TableauError(ValueError):
    pass


_PAULI_FROM_BITS = {(0, 0): "I", (1, 0): "X", (0, 1): "Z", (1, 1): "Y"}
_BITS_FROM_PAULI = {v: k for k, v in _PAULI_FROM_BITS.items()}

SINGLE_QUBIT_GATES = ("H", "S", "SDG", "SX", "SXDG", "X", "Y", "Z", "I")
TWO_QUBIT_GATES = ("CZ", "CX", "CY")


class PauliString:
    """A signed Pauli operator on N qubits."""

    __slots__ = ("x", "z", "sign")

    def __init__(self, x, z, sign: int = 1):
        self.x = np.asarray(x, dtype=bool)
        self.z = np.asarray(z, dtype=bool)
        if self.x.shape != self.z.shape or self.x.ndim != 1:
            raise TableauError("x/z bit vectors must be 1-d and equal length")
        if sign not in (1, -1):
            raise TableauError("sign must be +1 or -1")
        self.sign = sign

    @property
    def n(self) -> int:
        return self.x.shape[0]

    @staticmethod
    def from_text(text: str) -> "PauliString":
        s = text.strip()
        sign = 1
        if s.startswith(("+", "-")):
            if s[0] == "-":
                sign = -1
            s = s[1:]
        if not s:
            raise TableauError(f"empty Pauli string in {text!r}")
        xs, zs = [], []
        for ch in s:
            if ch not in _BITS_FROM_PAULI:
                raise TableauError(f"illegal character {ch!r} in {text!r}")
            xb, zb = _BITS_FROM_PAULI[ch]
            xs.append(xb)
            zs.append(zb)
        return PauliString(np.array(xs, bool), np.array(zs, bool), sign)

    def to_text(self) -> str:
        body = "".join(
            _PAULI_FROM_BITS[(int(xb), int(zb))] for xb, zb in zip(self.x, self.z)
        )
        return ("+" if self.sign == 1 else "-") + body

    def commutes_with(self, other: "PauliString") -> bool:
        sym = np.count_nonzero(self.x & other.z) + np.count_nonzero(self.z & other.x)
        return sym % 2 == 0

    def weight(self) -> int:
        return int(np.count_nonzero(self.x | self.z))

    def __repr__(self):
        return f"PauliString({self.to_text()!r})"


def _gf2_rank(mat: np.ndarray) -> int:
    m = np.array(mat, dtype=np.uint8) % 2
    rank = 0
    rows, cols = m.shape
    for col in range(cols):
        pivot = None
        for r in range(rank, rows):
            if m[r, col]:
                pivot = r
                break
        if pivot is None:
            continue
        m[[rank, pivot]] = m[[pivot, rank]]
        for r in range(rows):
            if r != rank and m[r, col]:
                m[r] ^= m[rank]
        rank += 1
        if rank == rows:
            break
    return rank


class StabilizerTableau:
    """N commuting independent signed Pauli generators."""

    __slots__ = ("n", "xs", "zs", "phases")

    def __init__(self, xs, zs, phases, validate: bool = True):
        self.xs = np.array(xs, dtype=bool)
        self.zs = np.array(zs, dtype=bool)
        self.phases = np.array(phases, dtype=np.uint8) % 2  # (-1)**phase
        self.n = self.xs.shape[1] if self.xs.ndim == 2 else 0
        if self.xs.shape != (self.n, self.n) or self.zs.shape != self.xs.shape:
            raise TableauError("tableau must hold N generators on N qubits")
        if self.phases.shape != (self.n,):
            raise TableauError("one sign bit per generator required")
        if validate:
            self.validate()

    # -- construction -------------------------------------------------

    @staticmethod
    def from_rows(rows: list[PauliString]) -> "StabilizerTableau":
        if not rows:
            raise TableauError("no generators given")
        n = rows[0].n
        for idx, r in enumerate(rows):
            if r.n != n:
                raise TableauError(f"row {idx} has length {r.n}, expected {n}")
        xs = np.stack([r.x for r in rows])
        zs = np.stack([r.z for r in rows])
        phases = np.array([0 if r.sign == 1 else 1 for r in rows], dtype=np.uint8)
        return StabilizerTableau(xs, zs, phases)

    @staticmethod
    def zero_state(n: int) -> "StabilizerTableau":
        """|0>^n, stabilized by +Z_i."""
        return StabilizerTableau(
            np.zeros((n, n), bool), np.eye(n, dtype=bool), np.zeros(n, np.uint8)
        )

    @staticmethod
    def graph_state(graph: Graph) -> "StabilizerTableau":
        """Canonical generators X_i prod_{j in n(i)} Z_j, all +."""
        n = graph.n
        return StabilizerTableau(
            np.eye(n, dtype=bool),
            graph.adj.copy(),
            np.zeros(n, np.uint8),
        )

    def validate(self):
        n = self.n
        x = self.xs.astype(np.uint8)
        z = self.zs.astype(np.uint8)
        sym = (x @ z.T + z @ x.T) % 2
        bad = np.argwhere(sym)
        if bad.size:
            i, j = bad[0]
            raise TableauError(f"generators {i} and {j} do not commute")
        if _gf2_rank(np.concatenate([x, z], axis=1)) != n:
            raise TableauError("generators are dependent over GF(2)")

    def copy(self) -> "StabilizerTableau":
        return StabilizerTableau(
            self.xs.copy(), self.zs.copy(), self.phases.copy(), validate=False
        )

    def rows(self) -> list[PauliString]:
        return [
            PauliString(self.xs[i], self.zs[i], 1 if self.phases[i] == 0 else -1)
            for i in range(self.n)
        ]

    def to_text(self) -> str:
        return "\n".join(r.to_text() for r in self.rows())

    def __eq__(self, other):
        return (
            isinstance(other, StabilizerTableau)
            and np.array_equal(self.xs, other.xs)
            and np.array_equal(self.zs, other.zs)
            and np.array_equal(self.phases, other.phases)
        )

    # -- Clifford conjugation -----------------------------------------

    def _apply_1q(self, gate: str, q: int):
        x = self.xs[:, q]
        z = self.zs[:, q]
        if gate == "H":
            self.phases ^= x & z
            self.xs[:, q], self.zs[:, q] = z.copy(), x.copy()
        elif gate == "S":
            self.phases ^= x & z
            self.zs[:, q] = z ^ x
        elif gate == "SDG":
            self.phases ^= x & ~z
            self.zs[:, q] = z ^ x
        elif gate == "SX":
            self.phases ^= z & ~x
            self.xs[:, q] = x ^ z
        elif gate == "SXDG":
            self.phases ^= x & z
            self.xs[:, q] = x ^ z
        elif gate == "X":
            self.phases ^= z
        elif gate == "Y":
            self.phases ^= x ^ z
        elif gate == "Z":
            self.phases ^= x
        elif gate == "I":
            pass
        else:
            raise TableauError(f"unknown gate {gate!r}")

    def _apply_2q(self, gate: str, c: int, t: int):
        if c == t:
            raise TableauError("two-qubit gate needs distinct qubits")
        if gate == "CX":
            self.phases ^= (
                self.xs[:, c] & self.zs[:, t] & ~(self.xs[:, t] ^ self.zs[:, c])
            )
            self.xs[:, t] ^= self.xs[:, c]
            self.zs[:, c] ^= self.zs[:, t]
        elif gate == "CZ":
            self.phases ^= (
                self.xs[:, c] & self.xs[:, t] & (self.zs[:, c] ^ self.zs[:, t])
            )
            self.zs[:, t] ^= self.xs[:, c]
            self.zs[:, c] ^= self.xs[:, t]
        elif gate == "CY":
            # CY = CZ . CX, so conjugate by CX first, then CZ.
            self._apply_2q("CX", c, t)
            self._apply_2q("CZ", c, t)
        else:
            raise TableauError(f"unknown gate {gate!r}")

    def apply_gate(self, gate: str, *qubits: int) -> "StabilizerTableau":
        """Return the tableau conjugated by a named Clifford gate."""
        out = self.copy()
        out.apply_gate_inplace(gate, *qubits)
        return out

    def apply_gate_inplace(self, gate: str, *qubits: int):
        for q in qubits:
            if not 0 <= q < self.n:
                raise TableauError(f"qubit {q} out of range")
        if gate in TWO_QUBIT_GATES:
            if len(qubits) != 2:
                raise TableauError(f"{gate} needs two qubits")
            self._apply_2q(gate, *qubits)
        elif gate in SINGLE_QUBIT_GATES:
            if len(qubits) != 1:
                raise TableauError(f"{gate} needs one qubit")
            self._apply_1q(gate, qubits[0])
        else:
            raise TableauError(f"unknown gate {gate!r}")

    # -- row algebra ---------------------------------------------------

    def _row_mul(self, i: int, j: int):
        """Left-multiply generator i by generator j (both stay Hermitian)."""
        x, z, ph = _pauli_product(
            self.xs[j], self.zs[j], int(self.phases[j]),
            self.xs[i], self.zs[i], int(self.phases[i]),
        )
        self.xs[i], self.zs[i], self.phases[i] = x, z, ph

    def canonical(self) -> "StabilizerTableau":
        """Gauss-Jordan canonical form of the stabilizer group (with signs)."""
        t = self.copy()
        n = t.n
        rank = 0
        for col in range(2 * n):
            block, q = (t.xs, col) if col < n else (t.zs, col - n)
            pivot = None
            for r in range(rank, n):
                if block[r, q]:
                    pivot = r
                    break
            if pivot is None:
                continue
            if pivot != rank:
                for arr in (t.xs, t.zs, t.phases):
                    arr[[rank, pivot]] = arr[[pivot, rank]]
            for r in range(n):
                if r != rank and block[r, q]:
                    t._row_mul(r, rank)
            rank += 1
            if rank == n:
                break
        return t

    def contains(self, p: PauliString) -> int | None:
        """Membership of +-p in the stabilizer group.

        Returns +1 if p is in the group, -1 if -p is, None otherwise.
        """
        work = self.canonical()
        x = p.x.copy()
        z = p.z.copy()
        phase = 0 if p.sign == 1 else 1
        # Canonical rows are in reduced echelon form over [X|Z], so each
        # row's leading bit identifies its pivot; fold matching rows into
        # the candidate until nothing remains.
        for r in range(work.n):
            piv = self._pivot_column(work, r)
            if piv is None:
                continue
            block, q = piv
            vec = x if block == "x" else z
            if vec[q]:
                try:
                    x, z, phase = _pauli_product(
                        work.xs[r], work.zs[r], int(work.phases[r]), x, z, phase
                    )
                except TableauError:
                    return None  # anticommutes with the group
        if x.any() or z.any():
            return None
        return 1 if phase == 0 else -1

    @staticmethod
    def _pivot_column(t: "StabilizerTableau", r: int):
        xcols = np.flatnonzero(t.xs[r])
        if xcols.size:
            return ("x", int(xcols[0]))
        zcols = np.flatnonzero(t.zs[r])
        if zcols.size:
            return ("z", int(zcols[0]))
        return None

    def same_group(self, other: "StabilizerTableau") -> bool:
        a, b = self.canonical(), other.canonical()
        return (
            np.array_equal(a.xs, b.xs)
            and np.array_equal(a.zs, b.zs)
            and np.array_equal(a.phases, b.phases)
        )

    def first_difference(self, other: "StabilizerTableau") -> PauliString | None:
        """A generator of self whose signed membership differs in other."""
        for row in self.rows():
            if other.contains(row) != 1:
                return row
        return None


def _pauli_product(x1, z1, ph1, x2, z2, ph2):
    """(x1,z1,ph1) * (x2,z2,ph2) for Hermitian commuting Pauli rows."""
    g = np.zeros(x1.shape[0], dtype=np.int8)
    m = x1 & z1
    g[m] = (z2.astype(np.int8) - x2.astype(np.int8))[m]
    m = x1 & ~z1
    g[m] = (z2.astype(np.int8) * (2 * x2.astype(np.int8) - 1))[m]
    m = ~x1 & z1
    g[m] = (x2.astype(np.int8) * (1 - 2 * z2.astype(np.int8)))[m]
    total = 2 * ph1 + 2 * ph2 + int(g.sum())
    if total % 4 not in (0, 2):
        raise TableauError("pauli product is not Hermitian")
    return x1 ^ x2, z1 ^ z2, (total % 4) // 2


def parse_stabilizers(lines) -> StabilizerTableau:
    """Parse one signed Pauli string per line into a validated tableau.

    Blank lines and '#' comments are skipped.
    """
    if isinstance(lines, str):
        lines = lines.splitlines()
    rows = []
    length = None
    for lineno, raw in enumerate(lines, start=1):
        text = raw.split("#", 1)[0].strip()
        if not text:
            continue
        try:
            row = PauliString.from_text(text)
        except TableauError as exc:
            raise TableauError(f"line {lineno}: {exc}") from None
        if length is None:
            length = row.n
        elif row.n != length:
            raise TableauError(
                f"line {lineno}: length {row.n} does not match first row ({length})"
            )
        rows.append(row)
    if not rows:
        raise TableauError("no Pauli strings found")
    try:
        return StabilizerTableau.from_rows(rows)
    except TableauError as exc:
        raise TableauError(str(exc)) from None
