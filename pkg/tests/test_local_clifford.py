import numpy as np
import pytest

from graphsynth.local_clifford import LocalCliffordFrame, SingleClifford
from graphsynth.tableau import StabilizerTableau

ALL_GATES = ("I", "H", "S", "SDG", "SX", "SXDG", "X", "Y", "Z")


def _all_elements():
    seen = {SingleClifford.identity()}
    frontier = list(seen)
    while frontier:
        nxt = []
        for e in frontier:
            for g in ("H", "S"):
                c = SingleClifford.from_gate(g) @ e
                if c not in seen:
                    seen.add(c)
                    nxt.append(c)
        frontier = nxt
    return seen


def test_group_has_24_elements():
    assert len(_all_elements()) == 24


def test_basic_relations():
    ident = SingleClifford.identity()
    assert SingleClifford.from_gates(["H", "H"]) == ident
    assert SingleClifford.from_gates(["S", "SDG"]) == ident
    assert SingleClifford.from_gates(["SX", "SXDG"]) == ident
    assert SingleClifford.from_gates(["S", "S"]) == SingleClifford.from_gate("Z")
    assert SingleClifford.from_gates(["SX", "SX"]) == SingleClifford.from_gate("X")


def test_inverse():
    for e in _all_elements():
        assert e @ e.inverse() == SingleClifford.identity()
        assert e.inverse() @ e == SingleClifford.identity()


def test_gates_word_reproduces_element():
    for e in _all_elements():
        assert SingleClifford.from_gates(e.gates()) == e


def test_conjugation_matches_tableau():
    # the symbolic conjugation action must agree with the simulator
    for name in ALL_GATES:
        c = SingleClifford.from_gate(name)
        for pauli, x, z in (("X", 1, 0), ("Z", 0, 1), ("Y", 1, 1)):
            px, pz, sign = c.conjugate(x, z, 1)
            t = StabilizerTableau(
                np.array([[bool(x)]]), np.array([[bool(z)]]), np.array([0])
            ).apply_gate(name, 0)
            assert (int(t.xs[0, 0]), int(t.zs[0, 0])) == (px, pz)
            assert (1 if t.phases[0] == 0 else -1) == sign


def test_from_gates_is_circuit_order():
    # X then H conjugates Z -> -Z -> -X
    c = SingleClifford.from_gates(["X", "H"])
    assert c.conjugate(0, 1, 1) == (1, 0, -1)


def test_frame_compose_and_gate_list():
    a = LocalCliffordFrame([SingleClifford.from_gate("H"), SingleClifford.identity()])
    b = LocalCliffordFrame([SingleClifford.from_gate("H"), SingleClifford.from_gate("S")])
    ab = a.compose(b)  # b first
    assert ab.cliffords[0] == SingleClifford.identity()
    assert ab.cliffords[1] == SingleClifford.from_gate("S")
    assert LocalCliffordFrame.identity(3).is_identity()
    assert LocalCliffordFrame.identity(3).gate_list() == []
    with pytest.raises(ValueError):
        a.compose(LocalCliffordFrame.identity(3))
