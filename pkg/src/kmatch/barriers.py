"""Space-barrier and divisibility-barrier certificates: search and verification.

Searches are heuristic outside the exhaustive range and say so; verifiers
recompute everything from scratch so a returned certificate never depends on
search-time state.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations

import numpy as np

from .errors import MalformedCert
from .lattice import (
    IndexLattice,
    as_fraction,
    find_transferral,
    generate_lattice,
    is_complete,
    robust_edge_vectors,
)

SPACE_EXHAUSTIVE_LIMIT = 14      # exhaust all S when the pool is at most this
DIV_EXHAUSTIVE_LIMIT = 12        # exhaust set partitions up to this pool size


@dataclass
class SpaceBarrierCert:
    """Witness that J_{p+1} is sparse inside a maximal-size planted set."""

    p: int
    part_sets: tuple             # per part: sorted tuple of vertex ids
    edge_count: int
    beta: Fraction
    part_size: int               # n used in the beta * n^{p+1} bound
    exhaustive: bool
    top_overflow_count: int = 0  # k-edges with more than p vertices in S

    def vertex_set(self) -> frozenset:
        return frozenset(v for part in self.part_sets for v in part)

    @property
    def threshold(self) -> Fraction:
        return self.beta * Fraction(self.part_size) ** (self.p + 1)

    def to_json(self) -> dict:
        return {
            "kind": "space-barrier",
            "p": self.p,
            "sets": [list(s) for s in self.part_sets],
            "edge_count": self.edge_count,
            "beta": str(self.beta),
            "part_size": self.part_size,
            "threshold": str(self.threshold),
            "exhaustive": self.exhaustive,
            "top_overflow_count": self.top_overflow_count,
        }


def _count_inside(system, level, inside: frozenset, stop_after=None) -> int:
    count = 0
    for e in system.level(level):
        if inside.issuperset(e):
            count += 1
            if stop_after is not None and count > stop_after:
                return count
    return count


def _count_top_overflow(system, inside: frozenset, p: int) -> int:
    count = 0
    for e in system.iter_top():
        if sum(1 for v in e if v in inside) > p:
            count += 1
    return count


def _space_target_sizes(system, p):
    uni = system.universe
    n = uni.part_sizes[0]
    return n, (p * n) // system.k


def verify_space_barrier(system, cert: SpaceBarrierCert) -> bool:
    """Recount e(J_{p+1}[S]) exactly and recheck sizes and the threshold."""
    uni = system.universe
    if not 1 <= cert.p <= system.k - 1:
        raise MalformedCert(f"p={cert.p} outside [1, k-1]")
    if len(cert.part_sets) != uni.r:
        raise MalformedCert("certificate does not cover every part")
    n, want = _space_target_sizes(system, cert.p)
    for j, part in enumerate(cert.part_sets):
        members = set(part)
        if len(members) != len(part):
            raise MalformedCert("duplicate vertices in a planted set")
        if not members.issubset(set(uni.part_vertices(j))):
            raise MalformedCert(f"planted set {j} leaves its part")
        if len(members) != want:
            raise MalformedCert(
                f"planted set {j} has {len(members)} vertices, needs {want}"
            )
    inside = cert.vertex_set()
    count = _count_inside(system, cert.p + 1, inside)
    if count != cert.edge_count:
        return False
    return count <= cert.threshold


def space_barrier_search(
    system,
    beta,
    budget=None,
    seed: int = 0,
    restarts: int = 20,
    steps_per_restart=None,
    exhaustive_limit: int = SPACE_EXHAUSTIVE_LIMIT,
):
    """Look for a space-barrier certificate at every p.

    Exhaustive over all planted sets when the pool is small, so absence of a
    certificate is then a proof; otherwise randomized local search (swap one
    planted vertex for an outside one, keep when the inside count drops), and
    absence proves nothing. budget caps candidate evaluations; budget=0
    returns None immediately.
    """
    beta = as_fraction(beta)
    uni = system.universe
    pool = sorted(system.vertex_pool)
    if budget == 0:
        return None
    evaluations = [0]
    cap = budget if budget is not None else None

    def spent():
        evaluations[0] += 1
        return cap is not None and evaluations[0] > cap

    exhaustive = len(pool) <= exhaustive_limit
    rng = random.Random(seed)
    for p in range(1, system.k):
        n, want = _space_target_sizes(system, p)
        threshold = beta * Fraction(n) ** (p + 1)
        if want == 0:
            continue
        per_part = [
            [v for v in uni.part_vertices(j) if v in system.vertex_pool]
            for j in range(uni.r)
        ]
        if any(len(avail) < want for avail in per_part):
            continue
        if exhaustive:
            def rec(j, chosen):
                if spent():
                    return None
                if j == uni.r:
                    inside = frozenset(v for s in chosen for v in s)
                    cnt = _count_inside(system, p + 1, inside)
                    if cnt <= threshold:
                        return SpaceBarrierCert(
                            p=p,
                            part_sets=tuple(tuple(sorted(s)) for s in chosen),
                            edge_count=cnt,
                            beta=beta,
                            part_size=n,
                            exhaustive=True,
                            top_overflow_count=_count_top_overflow(system, inside, p),
                        )
                    return None
                for s in combinations(per_part[j], want):
                    got = rec(j + 1, chosen + [s])
                    if got is not None:
                        return got
                return None

            got = rec(0, [])
            if got is not None:
                return got
        else:
            steps = steps_per_restart if steps_per_restart is not None else 200 * n
            for _ in range(restarts):
                chosen = [rng.sample(avail, want) for avail in per_part]
                inside = frozenset(v for s in chosen for v in s)
                cnt = _count_inside(system, p + 1, inside)
                for _ in range(steps):
                    if spent():
                        return None
                    if cnt <= threshold:
                        break
                    j = rng.randrange(uni.r)
                    outside = [v for v in per_part[j] if v not in inside]
                    if not outside:
                        continue
                    drop = chosen[j][rng.randrange(len(chosen[j]))]
                    add = outside[rng.randrange(len(outside))]
                    cand = [list(s) for s in chosen]
                    cand[j] = [v for v in cand[j] if v != drop] + [add]
                    cand_inside = frozenset(v for s in cand for v in s)
                    cand_cnt = _count_inside(system, p + 1, cand_inside, stop_after=cnt)
                    if cand_cnt <= cnt:
                        chosen, inside, cnt = cand, cand_inside, cand_cnt
                if cnt <= threshold:
                    return SpaceBarrierCert(
                        p=p,
                        part_sets=tuple(tuple(sorted(s)) for s in chosen),
                        edge_count=cnt,
                        beta=beta,
                        part_size=n,
                        exhaustive=False,
                        top_overflow_count=_count_top_overflow(system, inside, p),
                    )
    return None


@dataclass
class DivBarrierCert:
    """A partition whose robust-vector lattice is incomplete and transferral-free."""

    parts: tuple                 # ordered: each a sorted tuple of vertex ids
    min_part_size: int
    lattice: IndexLattice
    mu: Fraction
    exhaustive: bool
    ambient_groups: tuple = None  # refined part -> ambient part, partite mode only
    robust_vectors: tuple = ()

    def to_json(self) -> dict:
        return {
            "kind": "divisibility-barrier",
            "parts": [list(p) for p in self.parts],
            "min_part_size": self.min_part_size,
            "mu": str(self.mu),
            "lattice": self.lattice.to_json(),
            "exhaustive": self.exhaustive,
            "ambient_groups": list(self.ambient_groups) if self.ambient_groups else None,
            "robust_vectors": [list(v) for v in self.robust_vectors],
        }


def _check_div_partition(system, parts, min_part_size):
    pool = system.vertex_pool
    seen = set()
    for part in parts:
        members = set(part)
        if len(members) != len(part) or members & seen:
            raise MalformedCert("partition parts overlap or repeat vertices")
        seen |= members
    if seen != set(pool):
        raise MalformedCert("partition does not cover the vertex pool")
    return all(len(p) >= min_part_size for p in parts)


def _div_facts(system, parts, mu, ambient_groups=None):
    rv = robust_edge_vectors(system.iter_top(), [frozenset(p) for p in parts], mu)
    lat = generate_lattice(rv.vectors(), len(parts))
    complete = is_complete(lat, system.k, groups=ambient_groups)
    transferral = find_transferral(lat, groups=ambient_groups)
    return rv, lat, complete, transferral


def verify_divisibility_barrier(system, cert: DivBarrierCert) -> bool:
    """Recompute robust vectors, lattice, and the barrier facts from scratch."""
    if not _check_div_partition(system, cert.parts, cert.min_part_size):
        return False
    rv, lat, complete, transferral = _div_facts(
        system, cert.parts, cert.mu, cert.ambient_groups
    )
    if set(lat.basis) != set(cert.lattice.basis):
        return False
    return (not complete) and transferral is None


def _partitions_into_at_most(items, max_parts):
    """Set partitions by restricted growth strings, at most max_parts classes."""
    n = len(items)
    if n == 0:
        return
    rgs = [0] * n

    def rec(i, used):
        if i == n:
            parts = [[] for _ in range(used)]
            for t, cls in enumerate(rgs):
                parts[cls].append(items[t])
            yield tuple(tuple(p) for p in parts)
            return
        for cls in range(min(used + 1, max_parts)):
            rgs[i] = cls
            yield from rec(i + 1, max(used, cls + 1))

    yield from rec(0, 0)


def _exhaustive_div_candidates(system, mu, min_part_size):
    """All partitions into at most k parts meeting the size floor, ordered
    deterministically, with the per-partition robust sets batched in numpy."""
    pool = sorted(system.vertex_pool)
    n = len(pool)
    k = system.k
    pos = {v: i for i, v in enumerate(pool)}
    edges = sorted(system.iter_top())
    if not edges:
        return
    E = np.array([[pos[v] for v in e] for e in edges], dtype=np.int64)
    mu = as_fraction(mu)
    thr = mu * Fraction(n) ** k
    thr_int = math.ceil(thr)  # integer counts: count >= thr iff count >= ceil(thr)
    base = k + 1
    chunk_rows = []
    chunk_parts = []

    def flush():
        if not chunk_rows:
            return []
        P = np.array(chunk_rows, dtype=np.int64)          # (C, n)
        idx = P[:, E]                                     # (C, m, k)
        codes = np.zeros(idx.shape[:2], dtype=np.int64)   # (C, m)
        for t in range(k):
            codes += (idx == t).sum(axis=2) * base**t
        out = []
        for row, parts in zip(codes, chunk_parts):
            counts = np.bincount(row, minlength=base**k)
            robust = frozenset(int(c) for c in np.nonzero(counts >= thr_int)[0])
            out.append((parts, robust))
        chunk_rows.clear()
        chunk_parts.clear()
        return out

    for parts in _partitions_into_at_most(pool, k):
        if any(len(p) < min_part_size for p in parts):
            continue
        row = [0] * n
        for cls, part in enumerate(parts):
            for v in part:
                row[pos[v]] = cls
        chunk_rows.append(row)
        chunk_parts.append(parts)
        if len(chunk_rows) >= 4096:
            yield from flush()
    yield from flush()


def _decode(code, dim, base):
    out = []
    for _ in range(dim):
        out.append(code % base)
        code //= base
    return tuple(out)


def divisibility_barrier_search(
    system,
    mu,
    min_part_size: int,
    candidates=None,
    exhaustive_limit: int = DIV_EXHAUSTIVE_LIMIT,
    ambient_groups_of=None,
):
    """First partition whose robust lattice is incomplete and transferral-free.

    With no explicit candidates the search is exhaustive over set partitions
    into at most k parts when the pool is small; larger instances must supply
    candidates (the pipeline passes the closed partition and its
    coarsenings). ambient_groups_of maps a candidate to its ambient-part
    grouping for the partite notions; with None the plain notions are used.
    """
    mu = as_fraction(mu)
    k = system.k
    if candidates is not None:
        for parts in candidates:
            parts = tuple(tuple(sorted(p)) for p in parts)
            try:
                _check_div_partition(system, parts, 0)
            except MalformedCert:
                continue
            if any(len(p) < min_part_size for p in parts):
                continue
            groups = ambient_groups_of(parts) if ambient_groups_of else None
            rv, lat, complete, transferral = _div_facts(system, parts, mu, groups)
            if not complete and transferral is None:
                return DivBarrierCert(
                    parts=parts,
                    min_part_size=min_part_size,
                    lattice=lat,
                    mu=mu,
                    exhaustive=False,
                    ambient_groups=tuple(groups) if groups else None,
                    robust_vectors=tuple(rv.vectors()),
                )
        return None

    if len(system.vertex_pool) > exhaustive_limit:
        return None
    base = k + 1
    verdict_cache = {}
    for parts, robust_codes in _exhaustive_div_candidates(system, mu, min_part_size):
        dim = len(parts)
        key = (dim, robust_codes)
        verdict = verdict_cache.get(key)
        if verdict is None:
            vectors = sorted(_decode(c, dim, base) for c in robust_codes)
            lat = generate_lattice(vectors, dim)
            complete = is_complete(lat, k)
            transferral = find_transferral(lat)
            verdict = (not complete and transferral is None, lat, tuple(vectors))
            verdict_cache[key] = verdict
        good, lat, vectors = verdict
        if good:
            return DivBarrierCert(
                parts=parts,
                min_part_size=min_part_size,
                lattice=lat,
                mu=mu,
                exhaustive=True,
                robust_vectors=vectors,
            )
    return None
