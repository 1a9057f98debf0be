"""Tour of the basic objects: groups, sequences, and factorizations.

Run with: python3 demos/01_groups_and_sequences.py
"""

from zerosum import (
    Sequence,
    format_group,
    make_group,
    max_disjoint_zero_sums,
    max_length,
    minimal_divisors,
    parse_group,
    profile,
)
from zerosum.sequences import format_sequence, parse_sequence

# Groups are tuples of invariant factors, each dividing the next.
G = make_group((2, 2, 2, 2))
print("group:", format_group(G))
print("profile:", profile(G))

# The same group can be parsed from a compact literal.
assert parse_group("2^4") == G

# Sequences are multisets of elements, written coordinate-wise with
# multiplicities after a caret.
S = parse_sequence(G, "1,0,0,0; 0,1,0,0; 1,1,0,0; 0,0,1,0 ^ 2")
print("sequence:", format_sequence(S), " length", S.length)
print("sum is zero:", S.sum() == (0, 0, 0, 0))

# A zero-sum sequence factors into minimal zero-sum blocks (atoms).
atoms = list(minimal_divisors(S))
print("atoms dividing it:", [format_sequence(a) for a in atoms])

# Two numbers drive everything downstream: the most blocks a
# factorization of S can have, and the most pairwise disjoint blocks
# that fit inside S when S itself need not be zero-sum.
print("max factorization length:", max_length(S))

T = Sequence.from_elements(G, [(1, 0, 0, 0), (0, 1, 0, 0), (1, 1, 0, 0),
                               (0, 0, 1, 0), (0, 0, 0, 1)])
print("disjoint blocks in a non-zero-sum sequence:", max_disjoint_zero_sums(T))
