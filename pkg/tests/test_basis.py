import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from markovbasis.basis import (
    CompletionCaps,
    MarkovBasis,
    Move,
    binomial_completion,
    distance_reducing_check,
    independence_basis,
    toric_markov_basis,
    verify_connects,
)
from markovbasis.enumeration import enumerate_fiber_cells
from markovbasis.errors import CompletionOverflow, DimensionError, EnumerationCapError
from markovbasis.intlin import in_kernel, lattice_kernel_basis, normalize_sign
from markovbasis.model import independence_design, p1_design


def classes(moves):
    return {normalize_sign(m.vector if isinstance(m, Move) else m) for m in moves}


def test_move_parts():
    m = Move((2, -1, 0, -1))
    assert m.positive_part == (2, 0, 0, 0)
    assert m.negative_part == (0, 1, 0, 1)
    assert m.degree == 2
    assert (-m).vector == (-2, 1, 0, 1)
    with pytest.raises(DimensionError):
        Move((0, 0))


@given(st.lists(st.integers(-5, 5), min_size=1, max_size=8).filter(any))
def test_move_roundtrip(v):
    m = Move(tuple(v))
    assert tuple(p - q for p, q in zip(m.positive_part, m.negative_part)) == m.vector
    assert all(p == 0 or q == 0 for p, q in zip(m.positive_part, m.negative_part))
    assert min(m.positive_part) >= 0 and min(m.negative_part) >= 0


def test_markov_basis_dedup_and_kernel():
    A = independence_design(2, 2).design
    B = MarkovBasis((Move((1, -1, -1, 1)), Move((-1, 1, 1, -1))), A)
    assert len(B) == 1 and B.moves[0].vector == (1, -1, -1, 1)
    with pytest.raises(DimensionError):
        MarkovBasis((Move((1, -1, 0, 0)),), A)


def test_toric_2x2():
    B = toric_markov_basis(independence_design(2, 2).design)
    assert B.vectors() == [(1, -1, -1, 1)]
    assert verify_connects(independence_design(2, 2).design, B, (2, 0, 0, 2))


def test_toric_3x3_minors():
    B = toric_markov_basis(independence_design(3, 3).design)
    assert classes(B) == classes(independence_basis(3, 3))
    assert len(B) == 9


def test_toric_trivial_cases():
    assert toric_markov_basis([[1, 1]]).vectors() == [(1, -1)]
    assert toric_markov_basis([[2, 2]]).vectors() == [(1, -1)]
    assert len(toric_markov_basis([[1, 0], [0, 1]])) == 0


def test_independence_basis_counts():
    assert len(independence_basis(2, 2)) == 1
    assert len(independence_basis(3, 3)) == 9
    assert len(independence_basis(3, 4)) == 18
    with pytest.raises(DimensionError):
        independence_basis(1, 2)


def test_independence_basis_example_move(example_move):
    assert tuple(example_move) in independence_basis(3, 3).vectors()


def test_completion_examples():
    A = independence_design(2, 2).design
    out = binomial_completion([Move((1, -1, -1, 1))], A)
    assert classes(out) == {(1, -1, -1, 1)}
    assert binomial_completion([]) == []


def test_completion_lattice_3x3():
    A = independence_design(3, 3).design
    K = lattice_kernel_basis(A)
    assert len(K) == 4
    B = toric_markov_basis(A, minimize=False)
    assert classes(independence_basis(3, 3)) <= classes(B)


def test_completion_idempotent():
    A = independence_design(3, 3).design
    first = binomial_completion(lattice_kernel_basis(A), A)
    again = binomial_completion(first, A)
    assert classes(first) == classes(again)


def test_caps():
    A = independence_design(3, 3).design
    with pytest.raises(CompletionOverflow) as exc:
        toric_markov_basis(A, CompletionCaps(max_generators=2))
    assert exc.value.cap == "max_generators"
    with pytest.raises(CompletionOverflow) as exc:
        toric_markov_basis(A, CompletionCaps(max_degree=1))
    assert exc.value.cap == "max_degree"


def test_verify_connects_examples(example_table):
    A = independence_design(2, 2).design
    assert verify_connects(A, independence_basis(2, 2), (1, 0, 0, 1))
    assert not verify_connects(A, [], (1, 0, 0, 1))
    A3 = independence_design(3, 3).design
    assert verify_connects(A3, independence_basis(3, 3), example_table)


def test_verify_cap_is_not_disconnection():
    A = independence_design(3, 3).design
    with pytest.raises(EnumerationCapError):
        verify_connects(A, independence_basis(3, 3), (4,) * 9, cap=10)


def test_distance_reducing_examples():
    A = independence_design(2, 2).design
    rep = distance_reducing_check(A, independence_basis(2, 2), trials=20, seed=1, tables=[(1, 0, 0, 1)])
    assert rep.pairs_checked == 20 and rep.ok
    doubled = [(2, -2, -2, 2)]
    rep = distance_reducing_check(A, doubled, trials=5, seed=1, tables=[(1, 0, 0, 1)])
    assert not rep.ok and rep.violations[0] in [((1, 0, 0, 1), (0, 1, 1, 0))]
    A3 = independence_design(3, 3).design
    rep = distance_reducing_check(A3, independence_basis(3, 3), trials=100, seed=7)
    assert rep.ok and rep.pairs_checked > 50


def test_p1_differential_basis_connects():
    spec = p1_design(4, "differential")
    B = toric_markov_basis(spec.design)
    assert all(in_kernel(spec.design, m.vector) for m in B)
    rng = np.random.default_rng(3)
    from markovbasis.model import Graph, graph_to_table

    for _ in range(5):
        edges = [(i, j) for i in range(4) for j in range(4) if i != j and rng.random() < 0.4]
        u = graph_to_table(Graph(4, tuple(edges)))
        assert verify_connects(spec.design, B, u.cells)


@pytest.mark.slow
def test_p1_zero_basis_connects():
    spec = p1_design(4, "zero")
    B = toric_markov_basis(spec.design)
    rng = np.random.default_rng(5)
    from markovbasis.model import Graph, graph_to_table

    for _ in range(5):
        edges = [(i, j) for i in range(4) for j in range(4) if i != j and rng.random() < 0.5]
        assert verify_connects(spec.design, B, graph_to_table(Graph(4, tuple(edges))).cells)


@settings(max_examples=15)
@given(st.integers(0, 10_000))
def test_random_matrix_bases_connect(seed):
    rng = np.random.default_rng(seed)
    A = rng.integers(0, 4, size=(2, 5)).tolist() + [[1] * 5]
    B = toric_markov_basis(A)
    for m in B:
        assert in_kernel(A, m.vector)
    for _ in range(4):
        u = rng.integers(0, 3, size=5).tolist()
        try:
            assert verify_connects(A, B, u, cap=2000)
        except EnumerationCapError:
            pass


@settings(max_examples=10)
@given(st.integers(2, 3), st.integers(2, 4), st.integers(0, 10_000))
def test_independence_basis_connects_random_tables(d1, d2, seed):
    rng = np.random.default_rng(seed)
    A = independence_design(d1, d2).design
    u = rng.integers(0, 5, size=d1 * d2).tolist()
    try:
        assert verify_connects(A, independence_basis(d1, d2), u, cap=5000)
    except EnumerationCapError:
        pass


def test_lattice_basis_can_fail():
    # all four echelon kernel vectors touch the last cell with the same sign
    A = independence_design(3, 3).design
    K = lattice_kernel_basis(A)
    u = (1, 0, 0, 0, 1, 0, 0, 0, 0)
    assert len(enumerate_fiber_cells(A, u)) == 2
    assert not verify_connects(A, K, u)
    assert verify_connects(A, toric_markov_basis(A), u)
