"""Core data model: complexes, index vectors, degrees, allocations, balance."""

from fractions import Fraction
from itertools import combinations

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from kmatch.core import (
    Matching,
    VertexUniverse,
    allocation_from_index_multiset,
    allocation_properties,
    build_complex,
    degree_sequences,
    index_vector,
    is_pf_partite,
    matching_stats,
    plain_allocation,
)
from kmatch.errors import (
    BadVertex,
    ClosureViolation,
    EmptyAllocation,
    IndexNotInAllocation,
    NotPartite,
)
from kmatch.oracle import complete_complex, gen_divisibility_barrier, gen_space_barrier


def test_universe_basics():
    uni = VertexUniverse.equipartition(2, 4)
    assert uni.r == 2 and uni.n == 4 and uni.total == 8
    assert uni.part_of(0) == 0 and uni.part_of(7) == 1
    assert list(uni.part_vertices(1)) == [4, 5, 6, 7]
    with pytest.raises(BadVertex):
        uni.part_of(8)


def test_index_vector_examples():
    uni = VertexUniverse.equipartition(2, 3)
    assert index_vector([], uni) == (0, 0)
    assert index_vector([0, 1, 3], uni) == (2, 1)
    # a triple meeting the second part in exactly two vertices
    assert index_vector([0, 3, 4], uni) == (1, 2)


@given(st.data())
def test_index_vector_additive(data):
    uni = VertexUniverse.equipartition(3, 4)
    verts = list(uni.vertices())
    s = data.draw(st.sets(st.sampled_from(verts), max_size=6))
    t = data.draw(st.sets(st.sampled_from([v for v in verts if v not in s]), max_size=6))
    si, ti = index_vector(s, uni), index_vector(t, uni)
    union = index_vector(s | t, uni)
    assert union == tuple(a + b for a, b in zip(si, ti))
    assert sum(si) == len(s)


def test_build_complex_closure_of_one_edge():
    uni = VertexUniverse.single(3)
    cx = build_complex([(0, 1, 2)], uni, close=True)
    assert cx.level(2) == frozenset({(0, 1), (0, 2), (1, 2)})
    assert cx.level(1) == frozenset({(0,), (1,), (2,)})
    assert cx.level(0) == frozenset({()})


def test_build_complex_closure_violation():
    uni = VertexUniverse.single(3)
    with pytest.raises(ClosureViolation):
        build_complex(
            {3: [(0, 1, 2)], 2: [(0, 1), (0, 2)], 1: [(0,), (1,), (2,)]},
            uni,
            k=3,
            close=False,
        )


def test_space_barrier_generator_output_is_closed():
    # construction rule: i-sets with at most j vertices of S; closure holds
    cx = gen_space_barrier(6, 3, 1, 2)
    rebuilt = build_complex(
        {i: list(cx.level(i)) for i in range(1, 4)}, cx.universe, k=3, close=False
    )
    assert rebuilt.level(3) == cx.level(3)


def test_build_complex_bad_vertex():
    uni = VertexUniverse.single(3)
    with pytest.raises(BadVertex):
        build_complex([(0, 1, 7)], uni, close=True)


@given(st.sets(st.tuples(st.integers(0, 7), st.integers(0, 7), st.integers(0, 7)), max_size=12))
@settings(max_examples=40)
def test_closure_idempotent(raw):
    uni = VertexUniverse.single(8)
    edges = [t for t in raw if len(set(t)) == 3]
    cx = build_complex(edges, uni, k=3, close=True)
    again = build_complex(
        {i: list(cx.level(i)) for i in range(4)}, uni, k=3, close=True
    )
    assert all(again.level(i) == cx.level(i) for i in range(4))


def test_degree_sequences_space_barrier():
    # independent derivation: enumerate the construction from scratch
    n, k, j, s = 10, 3, 1, 4
    planted = set(range(s))
    uni = VertexUniverse.single(n)
    levels = {
        i: [e for e in combinations(range(n), i) if len(planted & set(e)) <= j]
        for i in range(1, k + 1)
    }
    expected = []
    for i in range(k):
        lower = levels.get(i, [()]) if i else [()]
        upper = set(levels[i + 1])
        expected.append(
            min(
                sum(1 for v in range(n) if v not in e and tuple(sorted(e + (v,))) in upper)
                for e in lower
            )
        )
    assert tuple(expected) == (10, 6, 5)
    cx = gen_space_barrier(n, k, j, s)
    assert degree_sequences(cx).plain == (10, 6, 5)


def test_degree_sequences_complete():
    assert degree_sequences(complete_complex(6, 3)).plain == (6, 5, 4)


def test_degree_sequences_divisibility_enumerated():
    # |A| = |B| = 4: pairs inside A extend only within A, giving n/2 - 2 = 2
    H = gen_divisibility_barrier([4, 4], 3, [(1, 2), (3, 0)])
    cx = build_complex({3: list(H.iter_top())}, H.universe, k=3, close=True)
    rep = degree_sequences(cx)
    assert rep.plain[2] == 2
    assert rep.plain[0] == 8 and rep.plain[1] == 7


def test_partite_degrees_require_partite_system():
    cx = complete_complex(6, 3)  # r=1: no untouched part to extend into
    with pytest.raises(NotPartite):
        degree_sequences(cx, partite=True)


def test_allocation_from_index_multiset_r1():
    alloc = allocation_from_index_multiset([(3,)])
    assert alloc.size == 6  # 3! copies of the constant function
    assert alloc.functions == (((0, 0, 0), 6),)
    assert alloc.multiplicity((3,)) == 1


def test_allocation_from_index_multiset_mixed():
    alloc = allocation_from_index_multiset([(1, 2)])
    assert alloc.size == 6
    funcs = dict(alloc.functions)
    assert set(funcs) == {(0, 1, 1), (1, 0, 1), (1, 1, 0)}
    assert all(c == 2 for c in funcs.values())


def test_allocation_empty():
    alloc = allocation_from_index_multiset([], r=2)
    assert alloc.size == 0


def test_allocation_permutation_closed():
    alloc = allocation_from_index_multiset([(2, 1), (1, 2)])
    funcs = dict(alloc.functions)
    for pattern, count in funcs.items():
        for i in range(len(pattern)):
            for j in range(len(pattern)):
                swapped = list(pattern)
                swapped[i], swapped[j] = swapped[j], swapped[i]
                assert funcs.get(tuple(swapped)) == count


def test_allocation_properties_r1():
    alloc = plain_allocation(3)
    props = allocation_properties(alloc)
    assert props == {"uniform": True, "connected": True, "size": 6}


def test_allocation_properties_injections():
    # all injections [3] -> [3]: uniform by symmetry, complete part graph
    from itertools import permutations

    vectors = [(1, 1, 1)] * 1
    alloc = allocation_from_index_multiset(vectors)
    # derived count: injections with f(i) = j must be |F| / r
    funcs = dict(alloc.functions)
    assert set(funcs) == set(permutations((0, 1, 2)))
    props = allocation_properties(alloc)
    assert props["uniform"] and props["connected"]


def test_allocation_properties_constant_not_uniform():
    alloc = allocation_from_index_multiset([(3, 0)])
    props = allocation_properties(alloc)
    assert not props["uniform"]


def test_allocation_properties_empty_raises():
    with pytest.raises(EmptyAllocation):
        allocation_properties(allocation_from_index_multiset([], r=1))


def test_matching_stats_single_index_alpha_zero():
    uni = VertexUniverse.single(6)
    m = Matching.from_edges([(0, 1, 2), (3, 4, 5)])
    stats = matching_stats(m, plain_allocation(3), uni)
    assert stats["alpha"] == 0
    assert stats["n_tilde"][(3,)] == 2


def test_matching_stats_alpha_ratio():
    # normalized counts {4, 5} give alpha = 1/5
    uni = VertexUniverse.equipartition(2, 27)
    alloc = allocation_from_index_multiset([(1, 2), (2, 1)])
    edges = []
    a_pool = list(uni.part_vertices(0))
    b_pool = list(uni.part_vertices(1))
    for t in range(5):
        edges.append((a_pool[2 * t], a_pool[2 * t + 1], b_pool[t]))
    for t in range(4):
        edges.append((a_pool[10 + t], b_pool[5 + 2 * t], b_pool[6 + 2 * t]))
    m = Matching.from_edges(edges)
    stats = matching_stats(m, alloc, uni)
    assert stats["alpha"] == Fraction(1, 5)


def test_matching_stats_unknown_index():
    uni = VertexUniverse.equipartition(2, 3)
    m = Matching.from_edges([(0, 1, 2)])  # index (3, 0)
    with pytest.raises(IndexNotInAllocation):
        matching_stats(m, allocation_from_index_multiset([(1, 2)]), uni)


def test_is_pf_partite():
    assert is_pf_partite(complete_complex(6, 3), plain_allocation(3))
    H = gen_divisibility_barrier([5, 3], 3, [(1, 2), (3, 0)])
    cx = build_complex({3: list(H.iter_top())}, H.universe, k=3, close=True)
    good = allocation_from_index_multiset([(3, 0), (1, 2)])
    bad = allocation_from_index_multiset([(3, 0)])
    assert is_pf_partite(cx, good)
    assert not is_pf_partite(cx, bad)


def test_plain_degree_invariants():
    cx = gen_space_barrier(8, 3, 1, 3)
    rep = degree_sequences(cx)
    assert rep.plain[0] == len(cx.level(1))
    nv = cx.universe.total
    assert all(rep.plain[j] <= nv - j for j in range(cx.k))


@given(st.lists(st.integers(0, 12), min_size=2, max_size=2))
def test_alpha_in_unit_interval(counts):
    # alpha lies in [0, 1] and vanishes exactly when counts agree
    uni = VertexUniverse.equipartition(2, 3 * (sum(counts) + 1))
    alloc = allocation_from_index_multiset([(1, 2), (2, 1)])
    a = list(uni.part_vertices(0))
    b = list(uni.part_vertices(1))
    edges = []
    ai = bi = 0
    for _ in range(counts[0]):
        edges.append((a[ai], b[bi], b[bi + 1]))
        ai += 1
        bi += 2
    for _ in range(counts[1]):
        edges.append((a[ai], a[ai + 1], b[bi]))
        ai += 2
        bi += 1
    m = Matching.from_edges(edges)
    stats = matching_stats(m, alloc, uni)
    assert 0 <= stats["alpha"] <= 1
    values = set(stats["n_tilde"].values())
    assert (stats["alpha"] == 0) == (len(values) == 1)
