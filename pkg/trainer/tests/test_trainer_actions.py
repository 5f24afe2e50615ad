import numpy as np
import pytest

from rl_trainer.actions import (
    action_index,
    action_triples,
    index_to_triple,
    total_action_count,
    triples_to_indices,
)


def test_count_law():
    for n in range(2, 30):
        assert total_action_count(n) == 5 * n * (n - 1) // 2
        assert len(action_triples(n)) == total_action_count(n)


def test_index_round_trip():
    for n in (2, 3, 5, 9):
        for idx, triple in enumerate(action_triples(n)):
            assert action_index(n, *triple) == idx
            assert index_to_triple(n, idx) == triple


def test_cz_is_unordered():
    assert action_index(6, "CZ", 4, 1) == action_index(6, "CZ", 1, 4)


def test_canonical_blocks():
    n = 4
    kinds = [index_to_triple(n, i)[0] for i in range(total_action_count(n))]
    n_cz, n_ord = n * (n - 1) // 2, n * (n - 1)
    assert kinds == ["CZ"] * n_cz + ["CX"] * n_ord + ["CY"] * n_ord


def test_errors():
    with pytest.raises(ValueError):
        action_index(4, "SWAP", 0, 1)
    with pytest.raises(ValueError):
        action_index(4, "CX", 2, 2)
    with pytest.raises(ValueError):
        action_index(4, "CZ", 0, 4)
    with pytest.raises(IndexError):
        index_to_triple(4, total_action_count(4))


def test_triples_to_indices():
    triples = [("CZ", 0, 1), ("CX", 2, 0), ("CY", 1, 2)]
    idx = triples_to_indices(3, triples)
    assert [index_to_triple(3, int(i)) for i in idx] == triples
    assert idx.dtype == np.int64
