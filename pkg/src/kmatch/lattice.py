"""Integer lattices of index vectors: canonical bases, membership, completeness,
transferrals, and coefficient-bounded decompositions.

All arithmetic is exact over Python ints; dimensions are tiny (r <= ~12), so
membership goes through a canonical triangular (Hermite-form) basis.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations

from .core import index_vector
from .errors import (
    BoundTooSmall,
    DimensionMismatch,
    NotInLattice,
)


def sum_vectors(total: int, dim: int) -> list:
    """All nonnegative integer vectors of a given coordinate sum (s-vectors)."""
    if dim == 0:
        return [()] if total == 0 else []
    if dim == 1:
        return [(total,)]
    out = []
    for first in range(total + 1):
        for rest in sum_vectors(total - first, dim - 1):
            out.append((first,) + rest)
    return out


def hermite_basis(generators) -> list:
    """Canonical row-echelon integer basis of the lattice spanned by generators.

    Rows have positive pivots at strictly increasing columns, entries above a
    pivot reduced into [0, pivot). This form is unique per lattice, so equal
    lattices yield identical bases.
    """
    rows = [list(g) for g in generators if any(g)]
    if not rows:
        return []
    dim = len(rows[0])
    basis = []
    col = 0
    while col < dim and rows:
        live = [r for r in rows if r[col] != 0]
        rest = [r for r in rows if r[col] == 0]
        if not live:
            rows = rest
            col += 1
            continue
        # euclidean elimination in this column until one row survives
        while len(live) > 1:
            live.sort(key=lambda r: abs(r[col]))
            piv = live[0]
            new_live = [piv]
            for r in live[1:]:
                q = r[col] // piv[col]
                reduced = [a - q * b for a, b in zip(r, piv)]
                if reduced[col] != 0:
                    new_live.append(reduced)
                elif any(reduced):
                    rest.append(reduced)
            live = new_live
        piv = live[0]
        if piv[col] < 0:
            piv = [-a for a in piv]
        basis.append(piv)
        rows = rest
        col += 1
    # reduce entries above each pivot for canonicity
    for i in range(len(basis) - 1, -1, -1):
        pcol = next(j for j, a in enumerate(basis[i]) if a != 0)
        for t in range(i):
            q = basis[t][pcol] // basis[i][pcol]
            if q:
                basis[t] = [a - q * b for a, b in zip(basis[t], basis[i])]
    return [tuple(r) for r in basis]


@dataclass(frozen=True)
class IndexLattice:
    """Lattice generated by k-vectors, with its canonical triangular basis."""

    dimension: int
    generators: tuple
    basis: tuple

    @property
    def rank(self) -> int:
        return len(self.basis)

    def contains(self, vector) -> bool:
        return lattice_contains(self, vector)

    def to_json(self) -> dict:
        return {
            "dimension": self.dimension,
            "generators": [list(g) for g in self.generators],
            "basis": [list(b) for b in self.basis],
        }

    @classmethod
    def from_json(cls, data) -> "IndexLattice":
        return cls(
            dimension=data["dimension"],
            generators=tuple(tuple(g) for g in data["generators"]),
            basis=tuple(tuple(b) for b in data["basis"]),
        )


def generate_lattice(vectors, dimension=None) -> IndexLattice:
    """Lattice (additive subgroup) generated by the given vectors."""
    vecs = [tuple(v) for v in vectors]
    if dimension is None:
        if not vecs:
            raise DimensionMismatch("dimension required for an empty generator set")
        dimension = len(vecs[0])
    if any(len(v) != dimension for v in vecs):
        raise DimensionMismatch("generators of mixed dimension")
    return IndexLattice(
        dimension=dimension,
        generators=tuple(sorted(set(vecs))),
        basis=tuple(hermite_basis(vecs)),
    )


def lattice_contains(lattice: IndexLattice, vector) -> bool:
    """Exact membership via reduction against the triangular basis."""
    v = list(vector)
    if len(v) != lattice.dimension:
        raise DimensionMismatch(
            f"vector dimension {len(v)} != lattice dimension {lattice.dimension}"
        )
    for row in lattice.basis:
        pcol = next(j for j, a in enumerate(row) if a != 0)
        if v[pcol] % row[pcol] != 0:
            return False
        q = v[pcol] // row[pcol]
        if q:
            v = [a - q * b for a, b in zip(v, row)]
    return not any(v)


def is_complete(lattice: IndexLattice, k: int, groups=None) -> bool:
    """Completeness of a lattice with respect to k-vectors.

    Plain mode (groups None): the lattice must contain every nonnegative
    k-vector of its dimension. Partite mode: groups[j] names the ambient part
    containing refined part j, and the test runs over 0/1 k-vectors with at
    most one unit per ambient part (the refinement-compatible partite
    k-vectors).
    """
    dim = lattice.dimension
    if groups is None:
        targets = sum_vectors(k, dim)
    else:
        if len(groups) != dim:
            raise DimensionMismatch("groups length != lattice dimension")
        targets = []
        for support in combinations(range(dim), k):
            touched = [groups[j] for j in support]
            if len(set(touched)) != k:
                continue
            vec = [0] * dim
            for j in support:
                vec[j] = 1
            targets.append(tuple(vec))
    return all(lattice_contains(lattice, t) for t in targets)


def find_transferral(lattice: IndexLattice, groups=None):
    """Some (i, j) with u_i - u_j in the lattice, or None.

    In partite mode only pairs inside the same ambient part count (a
    transferral must move a vertex within one original part).
    """
    dim = lattice.dimension
    for i in range(dim):
        for j in range(dim):
            if i == j:
                continue
            if groups is not None and groups[i] != groups[j]:
                continue
            probe = [0] * dim
            probe[i] = 1
            probe[j] = -1
            if lattice_contains(lattice, probe):
                return (i, j)
    return None


@dataclass(frozen=True)
class Decomposition:
    """Integer combination of generator vectors hitting a target, with a bound."""

    target: tuple
    coefficients: tuple   # ((vector, coefficient), ...), nonzero entries only
    bound: int

    @property
    def positive_part(self) -> dict:
        """b_v: positive coefficients (the k-sets produced)."""
        return {v: c for v, c in self.coefficients if c > 0}

    @property
    def negative_part(self) -> dict:
        """c_v: negated negative coefficients (the reserve edges consumed)."""
        return {v: -c for v, c in self.coefficients if c < 0}

    def evaluate(self) -> tuple:
        dim = len(self.target)
        acc = [0] * dim
        for v, c in self.coefficients:
            for j in range(dim):
                acc[j] += c * v[j]
        return tuple(acc)


def bounded_decompose(target, vectors, bound: int) -> Decomposition:
    """Find integer coefficients a_v with max |a_v| <= bound and sum a_v v = target.

    Raises NotInLattice when the target is outside the generated lattice and
    BoundTooSmall when membership holds but no witness fits the bound (the
    caller may retry with a larger bound).
    """
    vecs = sorted(set(tuple(v) for v in vectors))
    target = tuple(target)
    if not vecs:
        if any(target):
            raise NotInLattice(f"{target} not in the zero lattice")
        return Decomposition(target=target, coefficients=(), bound=bound)
    dim = len(target)
    if any(len(v) != dim for v in vecs):
        raise DimensionMismatch("target/generator dimension mismatch")
    if not lattice_contains(generate_lattice(vecs, dim), target):
        raise NotInLattice(f"{target} not in lattice of {vecs}")

    # DFS over coefficients with per-coordinate interval pruning
    neg_reach = [[0] * dim for _ in range(len(vecs) + 1)]
    pos_reach = [[0] * dim for _ in range(len(vecs) + 1)]
    for t in range(len(vecs) - 1, -1, -1):
        for j in range(dim):
            lo = min(-bound * vecs[t][j], bound * vecs[t][j])
            hi = max(-bound * vecs[t][j], bound * vecs[t][j])
            neg_reach[t][j] = neg_reach[t + 1][j] + lo
            pos_reach[t][j] = pos_reach[t + 1][j] + hi

    coeffs = [0] * len(vecs)

    def search(t, residual):
        if t == len(vecs):
            return not any(residual)
        for j in range(dim):
            if not (neg_reach[t][j] <= residual[j] <= pos_reach[t][j]):
                return False
        vec = vecs[t]
        for c in range(-bound, bound + 1):
            coeffs[t] = c
            nxt = [residual[j] - c * vec[j] for j in range(dim)]
            if search(t + 1, nxt):
                return True
        coeffs[t] = 0
        return False

    if not search(0, list(target)):
        raise BoundTooSmall(f"no decomposition of {target} within |a| <= {bound}")
    pairs = tuple((v, c) for v, c in zip(vecs, coeffs) if c != 0)
    return Decomposition(target=target, coefficients=pairs, bound=bound)


def minimal_decomposition_bound(target, vectors, cap=30) -> int:
    """Smallest bound admitting a decomposition, by iterative deepening."""
    for c in range(cap + 1):
        try:
            bounded_decompose(target, vectors, c)
            return c
        except BoundTooSmall:
            continue
    raise BoundTooSmall(f"no decomposition of {target} within |a| <= {cap}")


DEFAULT_TRANSFER_BOUND = 8
EXHAUSTIVE_LIMIT = 9  # exhaust generator subsets only when k*r is at most this


def transfer_constant(k: int, r: int, configured=None, exhaustive_limit=EXHAUSTIVE_LIMIT):
    """The worst-case coefficient bound C(k, r) for decomposing k-vectors.

    Exact by double exhaustion (all generator subsets, all lattice-member
    targets) when k*r is small; otherwise a configured upper bound is returned
    and flagged. Targets outside the generated lattice are skipped: only
    lattice members admit decompositions at all.
    """
    if configured is not None:
        return configured, "configured"
    if k * r > exhaustive_limit:
        return DEFAULT_TRANSFER_BOUND, "configured"
    vectors = sum_vectors(k, r)
    best = 0
    for size in range(1, len(vectors) + 1):
        for subset in combinations(vectors, size):
            lat = generate_lattice(subset, r)
            for target in vectors:
                if not lattice_contains(lat, target):
                    continue
                best = max(best, minimal_decomposition_bound(target, subset))
    return best, "exact"


@dataclass(frozen=True)
class RobustVectorSet:
    """Index vectors supported by at least mu * |V|^k edges, with exact counts."""

    mu: Fraction
    threshold: Fraction
    counts: tuple          # ((vector, exact count), ...) for robust vectors only
    all_counts: tuple      # every observed vector, robust or not

    def vectors(self) -> list:
        return [v for v, _ in self.counts]

    def __contains__(self, vector) -> bool:
        return tuple(vector) in dict(self.counts)

    def to_json(self) -> dict:
        return {
            "mu": str(self.mu),
            "threshold": str(self.threshold),
            "vectors": [{"vector": list(v), "count": c} for v, c in self.counts],
        }


def as_fraction(x) -> Fraction:
    """Exact threshold arithmetic; floats go through their decimal repr."""
    if isinstance(x, float):
        return Fraction(str(x))
    return Fraction(x)


def robust_edge_vectors(edges, partition, mu, total_vertices=None) -> RobustVectorSet:
    """Index vectors realized by at least mu * |V|^k edges.

    `partition` is either a VertexUniverse or an ordered sequence of vertex
    sets; counts are exact and the threshold comparison is exact rational.
    """
    if hasattr(partition, "part_of"):
        uni = partition
        part_of = uni.part_of
        dim = uni.r
        nv = uni.total
    else:
        parts = [frozenset(p) for p in partition]
        lookup = {}
        for j, p in enumerate(parts):
            for v in p:
                lookup[v] = j
        part_of = lookup.__getitem__
        dim = len(parts)
        nv = sum(len(p) for p in parts)
    if total_vertices is not None:
        nv = total_vertices
    counts = {}
    k = None
    for e in edges:
        k = len(e) if k is None else k
        vec = [0] * dim
        for v in e:
            vec[part_of(v)] += 1
        vec = tuple(vec)
        counts[vec] = counts.get(vec, 0) + 1
    if k is None:
        k = 0
    mu = as_fraction(mu)
    threshold = mu * Fraction(nv) ** k
    robust = tuple(sorted((v, c) for v, c in counts.items() if c >= threshold))
    return RobustVectorSet(
        mu=mu,
        threshold=threshold,
        counts=robust,
        all_counts=tuple(sorted(counts.items())),
    )


def robust_vectors_of(system, partition, mu) -> RobustVectorSet:
    """Robust edge-vectors of a system's top level."""
    return robust_edge_vectors(system.iter_top(), partition, mu)


def matching_index_sum(matching_edges, universe) -> tuple:
    """Index vector of the union of a matching's edges (additivity check aid)."""
    total = [0] * universe.r
    for e in matching_edges:
        for j, c in enumerate(index_vector(e, universe)):
            total[j] += c
    return tuple(total)
