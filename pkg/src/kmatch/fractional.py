"""F-balanced perfect fractional matchings by exact LP feasibility, and the
weight-disjoint multi-extraction loop.

All weights are Fractions and every verification is exact; an approximate
solution would poison the downstream rounding and absorbing checks.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction

from .core import Allocation, edge_key, index_vector
from .errors import EmptyTopLevel, UnknownEdge
from .simplex import solve_equality_feasibility

ZERO = Fraction(0)
ONE = Fraction(1)


@dataclass
class FractionalMatching:
    """Edge -> rational weight map with exact vertex sums of 1."""

    host: object
    weights: dict

    def support(self) -> list:
        return sorted(self.weights)

    def vertex_sums(self) -> dict:
        sums = {}
        for e, w in self.weights.items():
            for v in e:
                sums[v] = sums.get(v, ZERO) + w
        return sums

    def total_weight(self) -> Fraction:
        return sum(self.weights.values(), ZERO)


@dataclass
class LPModel:
    """Feasibility model: one nonnegative variable per k-edge, exact rows."""

    host: object
    edges: list                      # column order
    columns: list                    # sparse columns [(row, Fraction), ...]
    b: list
    row_names: list
    vertex_rows: dict                # vertex id -> row index
    balance_pairs: list              # [(index_vec, index_vec'), ...] in row order

    @property
    def num_rows(self) -> int:
        return len(self.b)

    @property
    def num_cols(self) -> int:
        return len(self.edges)


def build_lp(system, alloc: Allocation) -> LPModel:
    """LP for an F-balanced perfect fractional matching.

    Rows: one vertex-sum equality per vertex; one balance equality per
    consecutive pair of distinct index vectors of I(F) (the common normalized
    value is left free rather than pinned, since pinning it is ambiguous).
    """
    edges = sorted(system.iter_top())
    if not edges:
        raise EmptyTopLevel("system has no top-level edges")
    uni = system.universe
    vertex_rows = {v: i for i, v in enumerate(sorted(system.vertex_pool))}
    nrows = len(vertex_rows)
    vectors = alloc.index_vectors()
    balance_pairs = [(vectors[t], vectors[t + 1]) for t in range(len(vectors) - 1)]
    pair_row = {pair: nrows + t for t, pair in enumerate(balance_pairs)}
    columns = []
    for e in edges:
        col = [(vertex_rows[v], ONE) for v in e]
        vec = index_vector(e, uni)
        for t, (va, vb) in enumerate(balance_pairs):
            if vec == va:
                col.append((nrows + t, Fraction(1, alloc.multiplicity(va))))
            elif vec == vb:
                col.append((nrows + t, -Fraction(1, alloc.multiplicity(vb))))
        columns.append(col)
    b = [ONE] * nrows + [ZERO] * len(balance_pairs)
    row_names = [f"v{v}" for v in vertex_rows] + [
        f"bal_{'_'.join(map(str, va))}__{'_'.join(map(str, vb))}"
        for va, vb in balance_pairs
    ]
    return LPModel(
        host=system,
        edges=edges,
        columns=columns,
        b=b,
        row_names=row_names,
        vertex_rows=vertex_rows,
        balance_pairs=balance_pairs,
    )


def dump_lp(model: LPModel) -> str:
    """Model text in LP format, for cross-checking with external solvers."""
    lines = ["Minimize", " obj: 0", "Subject To"]
    rows = [[] for _ in range(model.num_rows)]
    for j, col in enumerate(model.columns):
        for i, a in col:
            rows[i].append((j, a))
    for i, terms in enumerate(rows):
        parts = []
        for j, a in terms:
            if a == 1:
                parts.append(f"+ g{j}")
            elif a == -1:
                parts.append(f"- g{j}")
            elif a > 0:
                parts.append(f"+ {a} g{j}")
            else:
                parts.append(f"- {-a} g{j}")
        expr = " ".join(parts) if parts else "0 g0"
        lines.append(f" {model.row_names[i]}: {expr} = {model.b[i]}")
    lines.append("Bounds")
    for j in range(model.num_cols):
        lines.append(f" 0 <= g{j}")
    lines.append("End")
    return "\n".join(lines) + "\n"


def solve_feasible(model: LPModel, hint=None):
    """Exact feasible point of the model, or None when infeasible.

    `hint` is an optional list of edges to offer the simplex as a crash
    sequence (typically an integer matching); it only affects speed.
    """
    crash = None
    if hint:
        pos = {e: j for j, e in enumerate(model.edges)}
        crash = [pos[edge_key(e)] for e in hint if edge_key(e) in pos]
    res = solve_equality_feasibility(model.columns, model.b, crash_order=crash)
    if not res.feasible:
        return None
    weights = {model.edges[j]: val for j, val in res.solution.items()}
    return FractionalMatching(host=model.host, weights=weights)


def verify_fractional(system, frac: FractionalMatching, alloc: Allocation = None) -> dict:
    """Exact residual report: vertex sums, balance residuals, support size."""
    uni = system.universe
    for e in frac.weights:
        if not system.has_top(e):
            raise UnknownEdge(f"edge {e} not in the host top level")
    sums = {v: ZERO for v in sorted(system.vertex_pool)}
    per_index = {}
    for e, w in frac.weights.items():
        for v in e:
            sums[v] += w
        vec = index_vector(e, uni)
        per_index[vec] = per_index.get(vec, ZERO) + w
    vertex_residuals = {v: s - ONE for v, s in sums.items()}
    balance_residuals = {}
    if alloc is not None:
        vectors = alloc.index_vectors()
        normalized = {
            vec: per_index.get(vec, ZERO) / alloc.multiplicity(vec) for vec in vectors
        }
        for t in range(len(vectors) - 1):
            a, bvec = vectors[t], vectors[t + 1]
            balance_residuals[(a, bvec)] = normalized[a] - normalized[bvec]
    ok = all(r == 0 for r in vertex_residuals.values()) and all(
        r == 0 for r in balance_residuals.values()
    )
    return {
        "ok": ok,
        "vertex_residuals": vertex_residuals,
        "max_vertex_residual": max(
            (abs(r) for r in vertex_residuals.values()), default=ZERO
        ),
        "balance_residuals": balance_residuals,
        "support": len(frac.weights),
    }


# --- weight-disjoint extraction ----------------------------------------------

def _pair_key(u, v):
    return (u, v) if u < v else (v, u)


def edge_pairs(e):
    return [_pair_key(e[a], e[b]) for a in range(len(e)) for b in range(a + 1, len(e))]


class PairWeights:
    """Residual pair capacities for the extraction loop; everything starts at 2."""

    def __init__(self):
        self.w = {}

    def get(self, u, v) -> Fraction:
        return self.w.get(_pair_key(u, v), Fraction(2))

    def charge(self, pair, amount):
        self.w[pair] = self.w.get(pair, Fraction(2)) - amount

    def alive(self, u, v) -> bool:
        """Pair still usable: residual weight at least 1."""
        return self.get(u, v) >= 1

    def edge_alive(self, e) -> bool:
        return all(self.alive(e[a], e[b]) for a in range(len(e)) for b in range(a + 1, len(e)))

    def min_weight(self) -> Fraction:
        return min(self.w.values(), default=Fraction(2))

    def dead_pairs_at(self) -> dict:
        """vertex -> number of incident pairs that fell below 1."""
        out = {}
        for (u, v), wt in self.w.items():
            if wt < 1:
                out[u] = out.get(u, 0) + 1
                out[v] = out.get(v, 0) + 1
        return out


def _greedy_integer_pm(system, alloc, pairs: PairWeights, rng, tries=60):
    """Random greedy F-balanced perfect matching on the pair-pruned system.

    Used as an LP crash hint and as a fast path: an indicator vector of a
    perfect matching with exact per-index quotas is a feasible LP point.
    Returns a list of edges or None; failure here proves nothing.
    """
    uni = system.universe
    pool = system.vertex_pool
    total = len(pool)
    k = system.k
    if total % k or total == 0:
        return None
    vectors = alloc.index_vectors()
    msum = sum(alloc.multiplicity(v) for v in vectors)
    quota_unit = Fraction(total, k * msum)
    quotas = {}
    for vec in vectors:
        q = quota_unit * alloc.multiplicity(vec)
        if q.denominator != 1:
            return None  # exact balance unreachable by an integer matching
        quotas[vec] = int(q)

    explicit = hasattr(system, "top_sorted")
    if explicit:
        incident = {}
        for e in system.iter_top():
            for v in e:
                incident.setdefault(v, []).append(e)

    for _ in range(tries):
        free = set(pool)
        need = dict(quotas)
        chosen = []
        ok = True
        while free:
            v = rng.choice(sorted(free))
            cands = []
            if explicit:
                for e in incident.get(v, ()):
                    if all(u in free for u in e) and need.get(index_vector(e, uni), 0) > 0 and pairs.edge_alive(e):
                        cands.append(e)
            else:
                # implicit complete host: sample partners directly
                others = sorted(free - {v})
                for _ in range(40):
                    if len(others) < k - 1:
                        break
                    e = edge_key([v] + rng.sample(others, k - 1))
                    if (
                        system.has_top(e)
                        and need.get(index_vector(e, uni), 0) > 0
                        and pairs.edge_alive(e)
                    ):
                        cands.append(e)
                        break
            if not cands:
                ok = False
                break
            e = cands[rng.randrange(len(cands))]
            chosen.append(e)
            need[index_vector(e, uni)] -= 1
            free.difference_update(e)
        if ok and not free:
            return chosen
    return None


def _pruned_system(system, pairs: PairWeights):
    """Subsystem with top edges not supported on live pairs removed."""
    from .core import KSystem

    live = [e for e in system.iter_top() if pairs.edge_alive(e)]
    return KSystem(
        system.universe, system.k, {system.k: live}, vertex_pool=system.vertex_pool
    )


@dataclass
class ExtractionResult:
    matchings: list
    pair_weights: PairWeights
    completed: bool
    requested: int
    diagnostics: dict = field(default_factory=dict)


def extract_weight_disjoint(
    system,
    alloc: Allocation,
    ell: int,
    seed: int = 0,
    lp_column_cap: int = 250_000,
    use_greedy: bool = True,
) -> ExtractionResult:
    """Extract up to ell perfect fractional matchings whose pair loads sum to
    at most 2 on every vertex pair.

    Each round solves feasibility on the shrinking system (edges supported on
    pairs with residual weight >= 1), then charges the chosen weights to the
    pairs. Residuals stay >= 0 by construction: an edge is only usable while
    all its pairs have residual >= 1, and one round charges a pair at most 1.
    Stops early with the completed prefix when a round is infeasible.
    """
    rng = random.Random(seed)
    pairs = PairWeights()
    out = []
    diag = {"rounds": [], "greedy_hits": 0, "lp_solves": 0}
    implicit = not hasattr(system, "top_sorted")
    for rnd in range(ell):
        hint = None
        if use_greedy:
            hint = _greedy_integer_pm(system, alloc, pairs, rng)
        frac = None
        if hint is not None:
            frac = FractionalMatching(
                host=system, weights={edge_key(e): ONE for e in hint}
            )
            diag["greedy_hits"] += 1
        else:
            if implicit:
                diag["rounds"].append({"round": rnd, "status": "implicit-host-no-greedy"})
                break
            pruned = _pruned_system(system, pairs)
            if pruned.top_count() == 0 or pruned.top_count() > lp_column_cap:
                diag["rounds"].append(
                    {"round": rnd, "status": "empty-or-oversized", "columns": pruned.top_count()}
                )
                break
            model = build_lp(pruned, alloc)
            diag["lp_solves"] += 1
            frac = solve_feasible(model)
            if frac is not None:
                frac = FractionalMatching(host=system, weights=frac.weights)
        if frac is None:
            diag["rounds"].append({"round": rnd, "status": "infeasible"})
            break
        for e, w in frac.weights.items():
            for pr in edge_pairs(e):
                pairs.charge(pr, w)
        # erosion accounting from the extraction proof: after r rounds at most
        # r dead pairs can sit at any one vertex
        dead = pairs.dead_pairs_at()
        worst = max(dead.values(), default=0)
        assert worst <= rnd + 1, f"pair erosion {worst} exceeds round count {rnd + 1}"
        diag["rounds"].append({"round": rnd, "status": "ok", "max_dead_pairs": worst})
        out.append(frac)
    assert pairs.min_weight() >= 0, "pair weight went negative"
    diag["min_pair_weight"] = str(pairs.min_weight())
    return ExtractionResult(
        matchings=out,
        pair_weights=pairs,
        completed=len(out) == ell,
        requested=ell,
        diagnostics=diag,
    )
