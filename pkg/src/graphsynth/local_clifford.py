"""The 24-element single-qubit Clifford group.

Elements are stored by their conjugation action on X and Z (a signed
symplectic 2x2 over GF(2)), which is exactly what is needed to dress
graph states with per-qubit decorators.
"""

from __future__ import annotations

import numpy as np


# Conjugation images (x bit, z bit, sign) of X and Z for each named gate.
_GATE_IMAGES = {
    "I": (((1, 0), 1), ((0, 1), 1)),
    "H": (((0, 1), 1), ((1, 0), 1)),
    "S": (((1, 1), 1), ((0, 1), 1)),
    "SDG": (((1, 1), -1), ((0, 1), 1)),
    "SX": (((1, 0), 1), ((1, 1), -1)),
    "SXDG": (((1, 0), 1), ((1, 1), 1)),
    "X": (((1, 0), 1), ((0, 1), -1)),
    "Y": (((1, 0), -1), ((0, 1), -1)),
    "Z": (((1, 0), -1), ((0, 1), 1)),
}

_INVERSE_NAME = {
    "I": "I", "H": "H", "S": "SDG", "SDG": "S", "SX": "SXDG", "SXDG": "SX",
    "X": "X", "Y": "Y", "Z": "Z",
}


def _image_of_y(image_x, image_z):
    """Signed image of Y given the images of X and Z.

    Y = iXZ, and the images of X and Z anticommute, so P1 P2 = i^g P3
    with g odd; the leftover i factors combine to a real sign.
    """
    (x1, z1), s1 = image_x
    (x2, z2), s2 = image_z
    # i exponent of P1 P2 in the Hermitian single-qubit convention.
    table = {
        ((1, 1), (1, 0)): -1, ((1, 1), (0, 1)): 1,
        ((1, 0), (0, 1)): -1, ((1, 0), (1, 1)): 1,
        ((0, 1), (1, 0)): 1, ((0, 1), (1, 1)): -1,
    }
    g = table[((x1, z1), (x2, z2))]
    sign = s1 * s2 * (-1 if g == 1 else 1)  # i^(1+g)
    return ((x1 ^ x2, z1 ^ z2), sign)


class SingleClifford:
    """A single-qubit Clifford, identified by its images of X and Z."""

    __slots__ = ("image_x", "image_z")

    def __init__(self, image_x, image_z):
        self.image_x = image_x  # ((x, z), sign)
        self.image_z = image_z

    @staticmethod
    def identity() -> "SingleClifford":
        return SingleClifford(*_GATE_IMAGES["I"])

    @staticmethod
    def from_gate(name: str) -> "SingleClifford":
        if name not in _GATE_IMAGES:
            raise ValueError(f"unknown single-qubit gate {name!r}")
        return SingleClifford(*_GATE_IMAGES[name])

    @staticmethod
    def from_gates(names) -> "SingleClifford":
        """Product of named gates, applied left to right in circuit order."""
        out = SingleClifford.identity()
        for name in names:
            out = SingleClifford.from_gate(name) @ out
        return out

    def key(self):
        return (self.image_x[0], self.image_x[1], self.image_z[0], self.image_z[1])

    def __eq__(self, other):
        return isinstance(other, SingleClifford) and self.key() == other.key()

    def __hash__(self):
        return hash(self.key())

    def __matmul__(self, other: "SingleClifford") -> "SingleClifford":
        """self o other: apply other first, then self."""
        def push(image):
            (x, z), sign = image
            px, pz, psign = self.conjugate(x, z, sign)
            return ((px, pz), psign)

        return SingleClifford(push(other.image_x), push(other.image_z))

    def conjugate(self, x: int, z: int, sign: int):
        """Image of a signed Pauli (x, z, sign) under this Clifford."""
        if x and z:
            (px, pz), psign = _image_of_y(self.image_x, self.image_z)
            return px, pz, sign * psign
        if x:
            return self.image_x[0][0], self.image_x[0][1], sign * self.image_x[1]
        if z:
            return self.image_z[0][0], self.image_z[0][1], sign * self.image_z[1]
        return 0, 0, sign

    def inverse(self) -> "SingleClifford":
        return SingleClifford.from_gates(
            [_INVERSE_NAME[g] for g in reversed(self.gates())]
        )

    def gates(self) -> list[str]:
        """A shortest word over {H, S, SDG, X, Z} realizing this element."""
        return list(_DECOMPOSITION[self.key()])

    def __repr__(self):
        return f"SingleClifford({'.'.join(self.gates()) or 'I'})"


def _build_decomposition():
    table = {SingleClifford.identity().key(): ()}
    frontier = [(SingleClifford.identity(), ())]
    gens = ("H", "S", "SDG", "X", "Z")
    while frontier:
        nxt = []
        for elem, word in frontier:
            for g in gens:
                cand = SingleClifford.from_gate(g) @ elem
                if cand.key() not in table:
                    new_word = word + (g,)
                    table[cand.key()] = new_word
                    nxt.append((cand, new_word))
        frontier = nxt
    assert len(table) == 24, f"expected 24 single-qubit Cliffords, got {len(table)}"
    return table


_DECOMPOSITION = _build_decomposition()


class LocalCliffordFrame:
    """Per-qubit single-qubit Clifford decorators C with |psi> = C|G>."""

    def __init__(self, cliffords: list[SingleClifford]):
        self.cliffords = list(cliffords)

    @staticmethod
    def identity(n: int) -> "LocalCliffordFrame":
        return LocalCliffordFrame([SingleClifford.identity() for _ in range(n)])

    @property
    def n(self) -> int:
        return len(self.cliffords)

    def is_identity(self) -> bool:
        ident = SingleClifford.identity()
        return all(c == ident for c in self.cliffords)

    def gate_list(self) -> list[tuple[str, int]]:
        """Flattened (gate, qubit) list in circuit order."""
        out = []
        for q, c in enumerate(self.cliffords):
            out.extend((g, q) for g in c.gates())
        return out

    def compose(self, other: "LocalCliffordFrame") -> "LocalCliffordFrame":
        """self o other, applied per qubit (other first)."""
        if other.n != self.n:
            raise ValueError("frame sizes differ")
        return LocalCliffordFrame(
            [a @ b for a, b in zip(self.cliffords, other.cliffords)]
        )

    def __repr__(self):
        return f"LocalCliffordFrame({self.cliffords!r})"
