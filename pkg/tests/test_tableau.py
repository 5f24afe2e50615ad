import numpy as np
import pytest

from graphsynth.graphs import Graph
from graphsynth.tableau import (
    PauliString,
    StabilizerTableau,
    TableauError,
    parse_stabilizers,
)


def test_pauli_text_roundtrip():
    for text in ("+XIZ", "-YYX", "+IIII", "-Z"):
        assert PauliString.from_text(text).to_text() == text
    assert PauliString.from_text("XZ").to_text() == "+XZ"


def test_pauli_text_rejects_garbage():
    with pytest.raises(TableauError):
        PauliString.from_text("XQZ")
    with pytest.raises(TableauError):
        PauliString.from_text("+")


def test_commutes_with():
    x = PauliString.from_text("XI")
    z = PauliString.from_text("ZI")
    assert not x.commutes_with(z)
    assert x.commutes_with(PauliString.from_text("IZ"))
    assert PauliString.from_text("XX").commutes_with(PauliString.from_text("ZZ"))


def test_zero_state_stabilized_by_z():
    t = StabilizerTableau.zero_state(3)
    assert t.contains(PauliString.from_text("+ZII")) == 1
    assert t.contains(PauliString.from_text("-ZII")) == -1
    assert t.contains(PauliString.from_text("+XII")) is None


def test_graph_state_generators():
    g = Graph.from_edges(3, [(0, 1), (1, 2)])
    t = StabilizerTableau.graph_state(g)
    rows = [r.to_text() for r in t.rows()]
    assert rows == ["+XZI", "+ZXZ", "+IZX"]


def test_h_swaps_x_and_z():
    t = StabilizerTableau.zero_state(1).apply_gate("H", 0)
    assert t.contains(PauliString.from_text("+X")) == 1


def test_s_sends_x_to_y():
    # S X S^dag = Y; on |+> the stabilizer becomes +Y
    t = StabilizerTableau.zero_state(1).apply_gate("H", 0).apply_gate("S", 0)
    assert t.contains(PauliString.from_text("+Y")) == 1
    t = t.apply_gate("SDG", 0)
    assert t.contains(PauliString.from_text("+X")) == 1


def test_x_flips_z_sign():
    t = StabilizerTableau.zero_state(1).apply_gate("X", 0)
    assert t.contains(PauliString.from_text("-Z")) == 1


def test_cz_builds_graph_state():
    t = StabilizerTableau.zero_state(2)
    t.apply_gate_inplace("H", 0)
    t.apply_gate_inplace("H", 1)
    t.apply_gate_inplace("CZ", 0, 1)
    assert t.same_group(StabilizerTableau.graph_state(Graph.from_edges(2, [(0, 1)])))


def test_cy_equals_cz_after_cx():
    rng = np.random.default_rng(3)
    for _ in range(20):
        n = 4
        adj = rng.random((n, n)) < 0.5
        adj = np.triu(adj, 1)
        t0 = StabilizerTableau.graph_state(Graph(adj | adj.T))
        a = t0.apply_gate("CY", 0, 1)
        b = t0.apply_gate("CX", 0, 1).apply_gate("CZ", 0, 1)
        assert a.same_group(b)


def test_apply_gate_validation():
    t = StabilizerTableau.zero_state(2)
    with pytest.raises(TableauError):
        t.apply_gate("CZ", 0, 0)
    with pytest.raises(TableauError):
        t.apply_gate("CZ", 0)
    with pytest.raises(TableauError):
        t.apply_gate("H", 0, 1)
    with pytest.raises(TableauError):
        t.apply_gate("FOO", 0)
    with pytest.raises(TableauError):
        t.apply_gate("H", 2)


def test_same_group_ignores_generator_choice():
    a = parse_stabilizers("+XX\n+ZZ")
    b = parse_stabilizers("+ZZ\n-YY")  # XX * ZZ = -YY
    assert a.same_group(b)
    assert a.first_difference(b) is None


def test_first_difference_reports_witness():
    a = parse_stabilizers("+ZI\n+IZ")
    b = parse_stabilizers("-ZI\n+IZ")
    w = a.first_difference(b)
    assert w is not None and w.to_text() == "+ZI"


def test_validate_rejects_anticommuting_and_dependent():
    with pytest.raises(TableauError):
        parse_stabilizers("+XI\n+ZI")
    with pytest.raises(TableauError):
        parse_stabilizers("+XX\n+XX")


def test_parse_stabilizers_comments_and_errors():
    t = parse_stabilizers("# two qubits\n+XX\n\n+ZZ # bell\n")
    assert t.n == 2
    with pytest.raises(TableauError):
        parse_stabilizers("+XX\n+ZZZ")
    with pytest.raises(TableauError):
        parse_stabilizers("# nothing\n")
