"""Barrier search and verification against independent exhaustion oracles."""

from fractions import Fraction
from itertools import combinations

import pytest

from kmatch.barriers import (
    DivBarrierCert,
    SpaceBarrierCert,
    divisibility_barrier_search,
    space_barrier_search,
    verify_divisibility_barrier,
    verify_space_barrier,
)
from kmatch.errors import MalformedCert
from kmatch.oracle import (
    complete_complex,
    gen_divisibility_barrier,
    gen_random_dense,
    gen_space_barrier,
)


def oracle_space_exhaustion(system, beta, p):
    """Independent: scan every planted set of the right size directly."""
    n = system.universe.part_sizes[0]
    want = (p * n) // system.k
    threshold = beta * Fraction(n) ** (p + 1)
    for s in combinations(sorted(system.vertex_pool), want):
        inside = frozenset(s)
        count = sum(1 for e in system.level(p + 1) if inside.issuperset(e))
        if count <= threshold:
            return True
    return False


def test_planted_space_found_and_verified():
    js = gen_space_barrier(6, 3, 1, 2)
    cert = space_barrier_search(js, Fraction(1, 100))
    assert cert is not None and cert.exhaustive
    assert cert.edge_count == 0
    assert verify_space_barrier(js, cert)


def test_complete_no_space_cert_at_small_beta():
    cc = complete_complex(6, 3)
    beta = Fraction(1, 100)
    assert space_barrier_search(cc, beta) is None
    assert not any(oracle_space_exhaustion(cc, beta, p) for p in (1, 2))


def test_search_agrees_with_exhaustion_oracle():
    beta = Fraction(1, 40)
    for seed in range(6):
        cx = gen_random_dense(9, 3, p=0.5 + 0.08 * seed, seed=seed)
        found = space_barrier_search(cx, beta) is not None
        oracle = any(oracle_space_exhaustion(cx, beta, p) for p in (1, 2))
        assert found == oracle


def test_space_budget_zero():
    js = gen_space_barrier(6, 3, 1, 2)
    assert space_barrier_search(js, Fraction(1, 100), budget=0) is None


def test_space_local_search_on_larger_instance():
    js = gen_space_barrier(24, 3, 1, 10)
    cert = space_barrier_search(js, Fraction(1, 1000), seed=3)
    assert cert is not None and not cert.exhaustive
    assert verify_space_barrier(js, cert)


def test_space_malformed_certs():
    js = gen_space_barrier(6, 3, 1, 2)
    good = space_barrier_search(js, Fraction(1, 100))
    with pytest.raises(MalformedCert):
        verify_space_barrier(
            js,
            SpaceBarrierCert(
                p=good.p, part_sets=((0,),), edge_count=0,
                beta=good.beta, part_size=6, exhaustive=True,
            ),
        )
    with pytest.raises(MalformedCert):
        verify_space_barrier(
            js,
            SpaceBarrierCert(
                p=5, part_sets=good.part_sets, edge_count=0,
                beta=good.beta, part_size=6, exhaustive=True,
            ),
        )


def test_space_search_reproducible():
    js = gen_space_barrier(24, 3, 1, 10)
    a = space_barrier_search(js, Fraction(1, 1000), seed=5)
    b = space_barrier_search(js, Fraction(1, 1000), seed=5)
    assert a.part_sets == b.part_sets


def test_divisibility_found_and_verified():
    H = gen_divisibility_barrier([5, 3], 3, [(1, 2), (3, 0)])
    cert = divisibility_barrier_search(H, Fraction(1, 100), 2)
    assert cert is not None and cert.exhaustive
    assert [len(p) for p in cert.parts] == [5, 3]
    assert verify_divisibility_barrier(H, cert)


def test_divisibility_even_b_still_a_barrier():
    # the lattice shape is the certificate; i(V) membership is not its job
    H = gen_divisibility_barrier([4, 4], 3, [(1, 2), (3, 0)])
    cert = divisibility_barrier_search(H, Fraction(1, 300), 2)
    assert cert is not None
    assert verify_divisibility_barrier(H, cert)


def test_complete_no_divisibility_at_small_mu():
    cc = complete_complex(9, 3)
    assert divisibility_barrier_search(cc, Fraction(1, 100), 3) is None


def test_divisibility_mu_raised_flips_verification():
    # raising mu past (1,2)'s support count changes the recomputed lattice,
    # so the original certificate no longer verifies
    H = gen_divisibility_barrier([5, 3], 3, [(1, 2), (3, 0)])
    cert = divisibility_barrier_search(H, Fraction(1, 100), 2)
    assert cert is not None
    raised = DivBarrierCert(
        parts=cert.parts,
        min_part_size=cert.min_part_size,
        lattice=cert.lattice,
        mu=Fraction(16, 512),  # threshold 16 > count(1,2) = 15
        exhaustive=True,
    )
    assert not verify_divisibility_barrier(H, raised)


def test_divisibility_min_part_size_fails_verification():
    H = gen_divisibility_barrier([5, 3], 3, [(1, 2), (3, 0)])
    cert = divisibility_barrier_search(H, Fraction(1, 100), 2)
    small = DivBarrierCert(
        parts=cert.parts,
        min_part_size=4,  # B has only 3 vertices
        lattice=cert.lattice,
        mu=cert.mu,
        exhaustive=True,
    )
    assert not verify_divisibility_barrier(H, small)


def test_divisibility_candidates_path():
    H = gen_divisibility_barrier([5, 3], 3, [(1, 2), (3, 0)])
    parts = (tuple(range(5)), tuple(range(5, 8)))
    cert = divisibility_barrier_search(
        H, Fraction(1, 100), 2, candidates=[parts]
    )
    assert cert is not None and not cert.exhaustive
    wrong = (tuple(range(4)), tuple(range(4, 8)))
    assert (
        divisibility_barrier_search(H, Fraction(1, 100), 2, candidates=[wrong])
        is None
        or verify_divisibility_barrier(
            H,
            divisibility_barrier_search(H, Fraction(1, 100), 2, candidates=[wrong]),
        )
    )


def test_every_returned_cert_passes_its_verifier():
    for seed in range(4):
        cx = gen_random_dense(9, 3, p=0.35 + 0.1 * seed, seed=20 + seed)
        sc = space_barrier_search(cx, Fraction(1, 40), seed=seed)
        if sc is not None:
            assert verify_space_barrier(cx, sc)
        dc = divisibility_barrier_search(cx, Fraction(1, 200), 2)
        if dc is not None:
            assert verify_divisibility_barrier(cx, dc)
