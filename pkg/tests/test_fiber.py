import collections

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from markovbasis.basis import Move, independence_basis
from markovbasis.enumeration import enumerate_fiber_cells
from markovbasis.errors import ConfigurationError
from markovbasis.fiber import WalkConfig, chain_rng, dynamic_p1_proposer, walk
from markovbasis.intlin import in_kernel, matvec
from markovbasis.model import Graph, graph_to_table, independence_design, p1_design


def test_config_defaults():
    cfg = WalkConfig()
    assert cfg.steps == 100_000 and cfg.burn_in == 10_000 and cfg.thin == 1
    assert cfg.target == "hypergeometric" and cfg.proposal == "basis"
    assert WalkConfig(steps=100, burn_in=10, thin=3).recorded == 30


@pytest.mark.parametrize(
    "kw",
    [dict(steps=10, burn_in=11), dict(thin=0), dict(target="flat"), dict(proposal="gibbs"), dict(burn_in=-1)],
)
def test_config_invalid(kw):
    with pytest.raises(ConfigurationError):
        WalkConfig(**kw)


def test_rng_stream_matches_spawn():
    a = chain_rng(42, 3).integers(0, 2**32, size=5)
    b = np.random.Generator(np.random.PCG64(np.random.SeedSequence(42).spawn(5)[3])).integers(0, 2**32, size=5)
    assert (a == b).all()


def test_two_point_uniform():
    spec = independence_design(2, 2)
    for seed in (1, 2, 3):
        s = walk(spec, independence_basis(2, 2), (1, 0, 0, 1), WalkConfig(steps=10_000, seed=seed, target="uniform"))
        freq = collections.Counter(s.states)[(1, 0, 0, 1)] / len(s.states)
        assert 0.46 <= freq <= 0.54


def test_degenerate_no_records():
    spec = independence_design(2, 2)
    s = walk(spec, independence_basis(2, 2), (1, 0, 0, 1), WalkConfig(steps=50, burn_in=50, seed=1))
    assert s.states == []
    assert s.proposal_count == 50 and s.acceptance_count > 0


def test_example_move_rejected(example_table, example_move):
    spec = independence_design(3, 3)
    u = np.array(example_table) + np.array(example_move)
    assert u.min() == -1 and list(u).index(-1) == 6
    s = walk(spec, [example_move], example_table, WalkConfig(steps=2000, burn_in=0, seed=4, target="uniform"))
    # from u only the minus sign applies; every plus proposal at u is refused
    assert s.negative_count > 0
    assert all(min(v) >= 0 for v in s.states)
    assert set(s.states) <= {tuple(example_table), tuple(x - y for x, y in zip(example_table, example_move))}


def test_empty_basis_rejected():
    with pytest.raises(ConfigurationError):
        walk(independence_design(2, 2), [], (1, 0, 0, 1), WalkConfig(steps=10))


def test_non_kernel_move_rejected():
    with pytest.raises(ConfigurationError):
        walk(independence_design(2, 2), [(1, -1, 0, 0)], (1, 0, 0, 1), WalkConfig(steps=10))


def test_determinism():
    spec = independence_design(3, 3)
    cfg = WalkConfig(steps=5000, seed=11)
    a = walk(spec, independence_basis(3, 3), (1, 2, 0, 0, 1, 2, 2, 0, 1), cfg)
    b = walk(spec, independence_basis(3, 3), (1, 2, 0, 0, 1, 2, 2, 0, 1), cfg)
    assert a.states == b.states and a.acceptance_count == b.acceptance_count


@settings(max_examples=20)
@given(st.lists(st.integers(0, 3), min_size=6, max_size=6), st.integers(0, 2**32), st.sampled_from(["uniform", "hypergeometric"]))
def test_statistics_invariant(u, seed, target):
    spec = independence_design(2, 3)
    s = walk(spec, independence_basis(2, 3), u, WalkConfig(steps=500, burn_in=0, seed=seed, target=target))
    b = matvec(spec.design, u)
    for v in set(s.states):
        assert min(v) >= 0 and matvec(spec.design, v) == b


def tv(counter, probs):
    n = sum(counter.values())
    keys = set(counter) | set(probs)
    return 0.5 * sum(abs(counter.get(k, 0) / n - probs.get(k, 0.0)) for k in keys)


def test_hypergeometric_small_fiber():
    spec = independence_design(2, 2)
    s = walk(spec, independence_basis(2, 2), (2, 0, 0, 2), WalkConfig(steps=60_000, seed=5))
    probs = {(2, 0, 0, 2): 1 / 6, (1, 1, 1, 1): 4 / 6, (0, 2, 2, 0): 1 / 6}
    assert tv(collections.Counter(s.states), probs) < 0.02


# dynamic proposals


def test_dynamic_three_cycle():
    spec = p1_design(3, "constant")
    u = graph_to_table(Graph(3, ((0, 1), (1, 2), (2, 0))))
    rev = graph_to_table(Graph(3, ((1, 0), (2, 1), (0, 2))))
    rng = chain_rng(0)
    seen = set()
    for _ in range(200):
        m = dynamic_p1_proposer(u, spec, rng)
        if m is not None:
            seen.add(tuple(a + b for a, b in zip(u.cells, m.vector)))
    assert seen == {rev.cells}


def test_dynamic_empty_graph():
    spec = p1_design(4, "zero")
    u = graph_to_table(Graph(4, ()))
    rng = chain_rng(1)
    assert all(dynamic_p1_proposer(u, spec, rng) is None for _ in range(300))


def test_dynamic_swap():
    spec = p1_design(4, "zero")
    u = graph_to_table(Graph(4, ((0, 1), (2, 3))))
    target = graph_to_table(Graph(4, ((0, 3), (2, 1))))
    rng = chain_rng(2)
    found = False
    for _ in range(2000):
        m = dynamic_p1_proposer(u, spec, rng)
        if m is not None:
            assert in_kernel(spec.design, m.vector)
            if tuple(a + b for a, b in zip(u.cells, m.vector)) == target.cells:
                found = True
    assert found


def test_dynamic_requires_p1():
    with pytest.raises(ConfigurationError):
        dynamic_p1_proposer((1, 0, 0, 1), independence_design(2, 2), chain_rng(0))
    with pytest.raises(ConfigurationError):
        walk(independence_design(2, 2), None, (1, 0, 0, 1), WalkConfig(steps=10, proposal="dynamic"))


def digraph_strategy(n):
    pairs = [(i, j) for i in range(n) for j in range(n) if i != j]
    return st.lists(st.sampled_from(pairs), unique=True).map(lambda e: Graph(n, tuple(e)))


@settings(max_examples=30)
@given(st.sampled_from([4, 5]).flatmap(digraph_strategy), st.sampled_from(["zero", "constant", "differential"]), st.integers(0, 2**31))
def test_dynamic_soundness(g, mode, seed):
    spec = p1_design(g.n, mode)
    u = graph_to_table(g).cells
    rng = chain_rng(seed)
    for _ in range(50):
        m = dynamic_p1_proposer(u, spec, rng)
        if m is None:
            continue
        assert in_kernel(spec.design, m.vector)
        v = tuple(a + b for a, b in zip(u, m.vector))
        assert min(v) >= 0
        u = v


@pytest.mark.parametrize("mode", ["zero", "constant", "differential"])
def test_dynamic_walk_covers_fiber(mode):
    spec = p1_design(4, mode)
    g = Graph(4, ((0, 1), (1, 0), (1, 2), (2, 3), (3, 0), (0, 2)))
    u = graph_to_table(g)
    fiber = set(enumerate_fiber_cells(spec.design, u.cells))
    s = walk(spec, None, u, WalkConfig(steps=40_000, seed=3, proposal="dynamic", target="uniform"))
    assert set(s.states) == fiber
