"""Explicit extremal constructions and the bound-rule catalog.

Run with: python3 demos/04_constructions_and_bounds.py
"""

from zerosum import (
    KnownValues,
    collect_bounds,
    elb_witness,
    make_group,
    max_disjoint_zero_sums,
    maxfull_factorization,
    paige_bijection,
    s_le,
)
from zerosum.sequences import format_sequence

# A self-map of C_2^r whose doubling map g + phi(g) hits every element.
# Used to pair up group elements when splitting the full squarefree
# sequence into blocks.
phi = paige_bijection(3)
doubled = sorted(tuple(a ^ b for a, b in zip(g, img)) for g, img in phi.items())
print("rank 3 doubling map is onto:", len(set(doubled)) == 8)

# The full squarefree sequence over C_2^4 \ {0} splits into 5 blocks,
# which meets the ceiling |S| / 3 and is therefore optimal.
fact = maxfull_factorization(4)
print("blocks over rank 4:", fact.length)
for atom, mult in fact.atoms:
    print("  ", format_sequence(atom))

# A long sequence with few disjoint zero-sum blocks pushes the k-block
# constant up from below. Here: 9 elements of C_3^3 with no two
# disjoint blocks, so the 2-block constant is at least 10.
w = elb_witness(make_group((3, 3, 3)), s=2, t=1, k=2)
print("witness length:", w.length, " disjoint blocks:", max_disjoint_zero_sums(w))

# The bound catalog, fed with known inputs, brackets a constant without
# any new searching. For C_2^5 with two blocks the catalog alone gives
# [9, 10]; the full pipeline closes this to 10 exactly.
G = make_group((2,) * 5)
known = KnownValues(D=6)
for ell in (2, 3, 4, 5, 6):
    known.s_le[ell] = s_le(G, ell).value
for rep in collect_bounds(G, 2, known):
    print("%-5s %-16s %s" % (rep.direction, rep.rule_id, rep.value))
