#!/usr/bin/env python3
"""From fractional matchings to an almost-perfect integral one.

Combine a weight-disjoint family into edge probabilities, sample a
near-regular subgraph, and round it greedily. At n = 300 the sampled graph
has mean degree about 15 and tiny codegrees, and the rounds cover 97-98% of
the vertices.
"""

import statistics

from kmatch import (
    NibbleParams,
    check_regularity,
    color_classes,
    combine_weights,
    complete_complex,
    extract_weight_disjoint,
    nibble_match,
    plain_allocation,
    sample_subgraph,
)

alloc = plain_allocation(3)
cc = complete_complex(300, 3)

res = extract_weight_disjoint(cc, alloc, 30, seed=7)
g = combine_weights(res.matchings)
print(f"combined weights: {len(g)} support edges,",
      f"max weight {max(map(float, g.values())):.2f}")

coverages = []
for seed in range(10):
    H = sample_subgraph(cc, g, seed=seed)
    H = color_classes(H, alloc, seed=seed)
    reg = check_regularity(H, tau=0.2, ell=15)
    nr = nibble_match(H, alloc, NibbleParams(epsilon=0.02, seed=seed))
    coverages.append(nr.covered_fraction)
    if seed < 3:
        print(f"seed {seed}: {len(H.edges)} sampled edges,"
              f" mean degree {reg['mean_degree']:.1f},"
              f" max codegree {reg['max_codegree']},"
              f" coverage {nr.covered_fraction:.3f} ({nr.flag})")

print("median coverage over 10 seeds:", statistics.median(coverages))
