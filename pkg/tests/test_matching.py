from __future__ import annotations

import itertools
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from kinetic_hourglass.matching import (
    BipartiteGraph,
    MatchingError,
    NoPerfectMatching,
    aug,
    bottleneck_distance,
    brute_force_bottleneck,
    check_matching,
    diagram_reduction,
    find_augmenting_path,
    hopcroft_karp,
    static_bottleneck,
)
from oracles import brute_hall_violator, brute_max_matching, random_scalar_graph

# x1, x2 -> left 0, 1 ; y1, y2 -> right 0, 1
K22 = BipartiteGraph(2, 2, [(0, 0, 1.0), (0, 1, 5.0), (1, 0, 4.0), (1, 1, 2.0)])


def test_hopcroft_karp_complete_k22():
    assert len(hopcroft_karp(K22)) == 2


def test_hopcroft_karp_hall_violation():
    g = BipartiteGraph(2, 2, [(0, 0, 1), (1, 0, 1)])
    assert len(hopcroft_karp(g)) == 1


def test_hopcroft_karp_rejects_bad_seed():
    with pytest.raises(MatchingError):
        hopcroft_karp(K22, {0: 0, 1: 0})


@pytest.mark.parametrize("seed", range(50))
def test_hopcroft_karp_is_maximum(seed):
    rng = random.Random(seed)
    g = random_scalar_graph(rng, n_max=6)
    adj = g.adjacency()
    m = hopcroft_karp(g)
    check_matching(adj, m)
    assert len(m) == brute_max_matching(g.n_left, adj)


def _brute_augmenting_exists(adj, m, n_right):
    # Berge: a matching is maximum iff no augmenting path exists
    mate_r = {r: l for l, r in m.items()}
    free_l = [u for u in range(len(adj)) if u not in m]
    free_r = [v for v in range(n_right) if v not in mate_r]
    return any(find_augmenting_path(adj, m, u, v) for u in free_l for v in free_r)


@pytest.mark.parametrize("seed", range(30))
def test_no_augmenting_path_after_hopcroft_karp(seed):
    g = random_scalar_graph(random.Random(1000 + seed), n_max=6)
    m = hopcroft_karp(g)
    assert not _brute_augmenting_exists(g.adjacency(), m, g.n_right)


def test_find_augmenting_path_example():
    g = BipartiteGraph(2, 2, [(1, 0, 0), (0, 0, 0), (0, 1, 0)])
    assert find_augmenting_path(g, {0: 0}, 1, 1) == [1, 0, 0, 1]


def test_find_augmenting_path_edgeless():
    g = BipartiteGraph(2, 2, [])
    assert find_augmenting_path(g, {}, 0, 0) is None


def test_find_augmenting_path_direct_edge():
    g = BipartiteGraph(1, 1, [(0, 0, 0)])
    assert find_augmenting_path(g, {}, 0, 0) == [0, 0]


def test_find_augmenting_path_rejects_matched_endpoint():
    with pytest.raises(MatchingError):
        find_augmenting_path(K22, {0: 0}, 0, 1)
    with pytest.raises(MatchingError):
        find_augmenting_path(K22, {0: 0}, 1, 0)


def test_aug_example():
    assert aug({0: 0}, [1, 0, 0, 1]) == {1: 0, 0: 1}


def test_aug_from_empty():
    assert aug({}, [3, 2]) == {3: 2}


def test_aug_rejects_non_alternating():
    with pytest.raises(MatchingError):
        aug({0: 0}, [1, 1, 0, 0])


@pytest.mark.parametrize("seed", range(30))
def test_aug_grows_by_one(seed):
    rng = random.Random(seed)
    g = random_scalar_graph(rng, n_max=6)
    adj = g.adjacency()
    m: dict[int, int] = {}
    while True:
        mate_r = {r: l for l, r in m.items()}
        pairs = [(u, v) for u in range(g.n_left) if u not in m
                 for v in range(g.n_right) if v not in mate_r]
        path = next((p for u, v in pairs if (p := find_augmenting_path(adj, m, u, v))), None)
        if path is None:
            break
        m2 = aug(m, path)
        check_matching(adj, m2)
        assert len(m2) == len(m) + 1
        m = m2
    assert len(m) == brute_max_matching(g.n_left, adj)


def test_static_bottleneck_k22():
    delta, m, e = static_bottleneck(K22)
    assert delta == 2.0
    assert m == {0: 0, 1: 1}
    assert e == 3


def test_static_bottleneck_single_edge():
    assert static_bottleneck(BipartiteGraph(1, 1, [(0, 0, 7.0)]))[0] == 7.0


def test_static_bottleneck_all_zero_tiebreak():
    g = BipartiteGraph(2, 2, [(i, j, 0.0) for i in range(2) for j in range(2)])
    delta, m, e = static_bottleneck(g)
    assert delta == 0.0
    # lowest-ranked edge set admitting a perfect matching is {0, 1, 2, 3}[:k]
    assert e == max(g.edge_id(l, r) for l, r in m.items())


def test_static_bottleneck_infeasible_reports_hall_witness():
    g = BipartiteGraph(3, 3, [(0, 0, 1), (1, 0, 1), (2, 1, 1), (2, 2, 1)])
    with pytest.raises(NoPerfectMatching) as info:
        static_bottleneck(g)
    W, N = info.value.witness, info.value.neighbors
    assert len(W) > len(N)
    adj = g.adjacency()
    assert set().union(*(adj[u] for u in W)) == set(N)


@pytest.mark.parametrize("seed", range(40))
def test_hall_violator_exists_exactly_when_infeasible(seed):
    g = random_scalar_graph(random.Random(seed), n_max=6)
    adj = g.adjacency()
    brute = brute_hall_violator(g.n_left, adj)
    try:
        static_bottleneck(g)
        assert brute is None
    except NoPerfectMatching:
        assert brute is not None


def test_brute_force_bottleneck_examples():
    assert brute_force_bottleneck(K22) == 2.0
    assert brute_force_bottleneck(BipartiteGraph(1, 1, [(0, 0, 3.5)])) == 3.5
    with pytest.raises(ValueError):
        brute_force_bottleneck(BipartiteGraph(9, 9, []))


@pytest.mark.parametrize("seed", range(100))
def test_static_equals_brute_force(seed):
    g = random_scalar_graph(random.Random(seed), n_max=6, integer=seed % 2 == 0)
    want = brute_force_bottleneck(g)
    try:
        got, m, e = static_bottleneck(g)
    except NoPerfectMatching:
        assert want == float("inf")
        return
    assert got == want
    assert len(m) == g.n_left
    assert max(g.weight(l, r) for l, r in m.items()) == got
    assert g.edges[e][2] == got


# -- diagrams -----------------------------------------------------------------


def test_reduction_projection_weights_are_zero():
    g = diagram_reduction([(0, 1), (2, 5)], [(1, 3)])
    p, q = 2, 1
    for u, v, w in g.edges:
        if u >= p and v >= q:
            assert w == 0.0


def test_reduction_example():
    g = diagram_reduction([(0.0, 4.0)], [(0.0, 1.0)])
    assert sorted(w for _u, _v, w in g.edges) == [0.0, 0.5, 2.0, 3.0]
    assert static_bottleneck(g)[0] == 2.0
    assert brute_force_bottleneck(g) == 2.0


def test_reduction_rejects_diagonal_points():
    with pytest.raises(ValueError):
        diagram_reduction([(1.0, 1.0)], [])


def test_identical_diagrams_distance_zero():
    X = [(0, 1), (0.5, 3), (2, 2.5)]
    assert bottleneck_distance(X, list(X)) == 0.0


pt = st.tuples(st.floats(-5, 5), st.floats(0.01, 5)).map(lambda p: (p[0], p[0] + p[1]))
dgm = st.lists(pt, max_size=4)


@settings(max_examples=80, deadline=None)
@given(dgm, dgm)
def test_bottleneck_distance_symmetric(X, Y):
    assert bottleneck_distance(X, Y) == pytest.approx(bottleneck_distance(Y, X), abs=1e-12)


@settings(max_examples=80, deadline=None)
@given(dgm, dgm)
def test_bottleneck_zero_iff_equal_multisets(X, Y):
    d = bottleneck_distance(X, Y)
    assert (d <= 1e-12) == (sorted(X) == sorted(Y))


@settings(max_examples=40, deadline=None)
@given(dgm, dgm)
def test_reduction_matches_brute_force_partial_matching(X, Y):
    # independent oracle: enumerate partial matchings directly
    def cost(pairs, X, Y):
        used_x = {i for i, _ in pairs}
        used_y = {j for _, j in pairs}
        c = [max(abs(X[i][0] - Y[j][0]), abs(X[i][1] - Y[j][1])) for i, j in pairs]
        c += [(X[i][1] - X[i][0]) / 2 for i in range(len(X)) if i not in used_x]
        c += [(Y[j][1] - Y[j][0]) / 2 for j in range(len(Y)) if j not in used_y]
        return max(c, default=0.0)

    best = float("inf")
    for k in range(min(len(X), len(Y)) + 1):
        for xs in itertools.combinations(range(len(X)), k):
            for ys in itertools.permutations(range(len(Y)), k):
                best = min(best, cost(list(zip(xs, ys)), X, Y))
    assert bottleneck_distance(X, Y) == pytest.approx(best, abs=1e-12)
