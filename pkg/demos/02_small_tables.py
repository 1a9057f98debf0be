"""Exact block-constant tables for small groups.

The k-block constant is the threshold length at which every sequence
over the group contains k pairwise disjoint non-empty zero-sum blocks.
For small 2-groups and cyclic groups everything here is settled by
complete search, so each row comes back as an exact certificate.

Run with: python3 demos/02_small_tables.py
"""

from zerosum import davenport_k, format_group, make_group, stabilization, verify_certificate

for factors in [(2, 2, 2), (2, 2, 2, 2), (3, 3), (6,)]:
    G = make_group(factors)
    row = []
    for k in range(1, 6):
        cert = davenport_k(G, k)
        assert verify_certificate(cert).ok
        row.append(cert.value)
    print("%-6s" % format_group(G), row)

print()

# Every table turns into an arithmetic progression with difference
# exp(G) once k is large enough. The stabilization report reads the
# offset and onset off the tail, and marks the read "certified" only
# when a proof rule closes it.
for factors in [(2, 2), (3, 3), (2, 2, 2)]:
    G = make_group(factors)
    rep = stabilization(G, 5)
    print("%-6s offset %d from k=%d  certified=%s (%s)"
          % (format_group(G), rep.d0, rep.k_onset, rep.certified, rep.method))
