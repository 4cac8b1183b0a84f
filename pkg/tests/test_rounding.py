"""Rounding: weight combination, sampling, coloring, nibble, regularity."""

import math
import statistics
from fractions import Fraction

import pytest

from kmatch.core import (
    VertexUniverse,
    allocation_from_index_multiset,
    build_complex,
    plain_allocation,
)
from kmatch.errors import IndexNotInAllocation, MixedHost
from kmatch.fractional import FractionalMatching, extract_weight_disjoint
from kmatch.oracle import complete_complex
from kmatch.rounding import (
    NibbleParams,
    check_regularity,
    color_classes,
    combine_weights,
    nibble_match,
    sample_subgraph,
)

ALLOC3 = plain_allocation(3)


def test_combine_single():
    cc = complete_complex(6, 3)
    g = FractionalMatching(host=cc, weights={(0, 1, 2): Fraction(1), (3, 4, 5): Fraction(1)})
    combined = combine_weights([g])
    assert combined == {(0, 1, 2): Fraction(1, 2), (3, 4, 5): Fraction(1, 2)}


def test_combine_disjoint_supports():
    cc = complete_complex(12, 3)
    g1 = FractionalMatching(host=cc, weights={(0, 1, 2): Fraction(1)})
    g2 = FractionalMatching(host=cc, weights={(3, 4, 5): Fraction(1)})
    combined = combine_weights([g1, g2])
    assert combined == {(0, 1, 2): Fraction(1, 2), (3, 4, 5): Fraction(1, 2)}


def test_combine_mixed_host():
    g1 = FractionalMatching(host=complete_complex(6, 3), weights={(0, 1, 2): Fraction(1)})
    g2 = FractionalMatching(host=complete_complex(9, 3), weights={(0, 1, 2): Fraction(1)})
    with pytest.raises(MixedHost):
        combine_weights([g1, g2])


def test_combine_pipeline_weights_at_most_one():
    cc = complete_complex(30, 3)
    res = extract_weight_disjoint(cc, ALLOC3, 8, seed=2)
    combined = combine_weights(res.matchings)
    assert max(combined.values()) <= 1


def test_sample_zero_and_one():
    cc = complete_complex(6, 3)
    empty = sample_subgraph(cc, {}, seed=0)
    assert empty.edges == []
    g = {e: Fraction(1) for e in cc.iter_top()}
    full = sample_subgraph(cc, g, seed=0)
    assert sorted(full.edges) == sorted(cc.iter_top())


def test_sample_mean_degree_concentrates():
    # 20 matchings halved: expected degree 10; mean over all vertices and
    # seeds should sit within 3 sigma of the binomial aggregate
    n, ell_in = 120, 20
    cc = complete_complex(n, 3)
    res = extract_weight_disjoint(cc, ALLOC3, ell_in, seed=5)
    assert res.completed
    g = combine_weights(res.matchings)
    expected = ell_in / 2
    means = []
    for seed in range(20):
        H = sample_subgraph(cc, g, seed=seed)
        assert H.expected_degree == Fraction(ell_in, 2)
        means.append(H.stats["mean_degree"])
    grand = statistics.mean(means)
    draws = 20 * n * expected  # aggregated Bernoulli mass
    sigma = math.sqrt(20 * n * expected * 0.5) * 3 / (20 * n)
    assert abs(grand - expected) <= 3 * max(sigma, 0.05)


def test_color_classes_sizes():
    # ten edges of one index vector split into m=3 classes sized {4,3,3}
    uni = VertexUniverse.equipartition(2, 15)
    alloc = allocation_from_index_multiset([(1, 2)] * 3)
    a = list(uni.part_vertices(0))
    b = list(uni.part_vertices(1))
    edges = []
    bi = 0
    for i in range(10):
        edges.append((a[i], b[bi % 15], b[(bi + 1) % 15]))
        bi += 2
    cx = build_complex({3: edges}, uni, k=3, close=True)
    H = sample_subgraph(cx, {e: Fraction(1) for e in cx.iter_top()}, seed=0)
    H = color_classes(H, alloc, seed=1)
    sizes = sorted(
        (c["size"] for c in H.stats["classes"]), reverse=True
    )
    assert sizes == [4, 3, 3]


def test_color_classes_single_index():
    cc = complete_complex(6, 3)
    H = sample_subgraph(cc, {e: Fraction(1) for e in cc.iter_top()}, seed=0)
    H = color_classes(H, ALLOC3, seed=0)
    assert H.num_classes == 1


def test_color_classes_unknown_index():
    uni = VertexUniverse.equipartition(2, 3)
    cx = build_complex({3: [(0, 1, 2)]}, uni, k=3, close=True)  # index (3, 0)
    H = sample_subgraph(cx, {(0, 1, 2): Fraction(1)}, seed=0)
    with pytest.raises(IndexNotInAllocation):
        color_classes(H, allocation_from_index_multiset([(1, 2)]), seed=0)


def test_nibble_single_family():
    # one disjoint edge per color class: the nibble returns exactly that family
    uni = VertexUniverse.equipartition(2, 9)
    alloc = allocation_from_index_multiset([(1, 2), (2, 1)])
    a = list(uni.part_vertices(0))
    b = list(uni.part_vertices(1))
    edges = [(a[0], b[0], b[1]), (a[1], a[2], b[2])]
    cx = build_complex({3: edges}, uni, k=3, close=True)
    H = sample_subgraph(cx, {e: Fraction(1) for e in cx.iter_top()}, seed=0)
    H = color_classes(H, alloc, seed=0)
    result = nibble_match(H, alloc, NibbleParams(epsilon=0.9, seed=0))
    assert sorted(result.matching.edges) == sorted(
        tuple(sorted(e)) for e in edges
    )


def test_nibble_empty():
    cc = complete_complex(6, 3)
    H = sample_subgraph(cc, {}, seed=0)
    result = nibble_match(H, ALLOC3, NibbleParams(seed=0))
    assert len(result.matching) == 0
    assert result.flag == "round-limit"
    assert len(result.uncovered) == 6


def test_nibble_reproducible_and_monotone():
    cc = complete_complex(60, 3)
    res = extract_weight_disjoint(cc, ALLOC3, 10, seed=3)
    g = combine_weights(res.matchings)
    runs = []
    for _ in range(2):
        H = sample_subgraph(cc, g, seed=17)
        H = color_classes(H, ALLOC3, seed=17)
        runs.append(nibble_match(H, ALLOC3, NibbleParams(seed=17)))
    assert runs[0].matching.edges == runs[1].matching.edges
    assert runs[0].uncovered == runs[1].uncovered
    trace = runs[0].best_trace
    assert list(trace) == sorted(trace)


def test_check_regularity_complete_sample_fails_small_ell():
    cc = complete_complex(12, 3)
    H = sample_subgraph(cc, {e: Fraction(1) for e in cc.iter_top()}, seed=0)
    rep = check_regularity(H, tau=0.2, ell=5)
    assert not rep["degree_pass"]
    assert rep["mean_degree"] == math.comb(11, 2)


def test_check_regularity_empty_fails():
    cc = complete_complex(6, 3)
    H = sample_subgraph(cc, {}, seed=0)
    rep = check_regularity(H, tau=0.2, ell=5)
    assert not rep["degree_pass"]
    assert rep["max_degree"] == 0
