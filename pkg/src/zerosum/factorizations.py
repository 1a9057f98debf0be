"""Factorizations of zero-sum sequences into minimal zero-sum parts.

The atom searches all share one branching scheme: pin the
lexicographically least remaining element and branch over the minimal
zero-sum divisors containing it. Pinning breaks the symmetry between
orderings of the same decomposition, so every decomposition is visited
once.
"""

from __future__ import annotations

from collections import OrderedDict
from dataclasses import dataclass
from typing import Dict, Iterator, List, Optional, Tuple

from .groups import Element, Group, add, zero
from .sequences import Sequence, SequenceError, format_sequence, parse_sequence

MEMO_LIMIT = 1 << 18


class BudgetExhausted(RuntimeError):
    """A search hit its node budget before finishing.

    Carries no partial answer on purpose: exhaustion is an outcome
    distinct from any mathematical result.
    """

    def __init__(self, nodes: int):
        super().__init__("search budget exhausted after %d nodes" % nodes)
        self.nodes = nodes


class _Budget:
    __slots__ = ("remaining",)

    def __init__(self, limit: Optional[int]):
        self.remaining = limit

    def spend(self) -> None:
        if self.remaining is None:
            return
        if self.remaining <= 0:
            raise BudgetExhausted(0)
        self.remaining -= 1


class _Memo:
    """Mapping with FIFO eviction; lookups stay value-correct."""

    def __init__(self, limit: int = MEMO_LIMIT):
        self.data: "OrderedDict" = OrderedDict()
        self.limit = limit

    def get(self, key):
        return self.data.get(key)

    def put(self, key, value) -> None:
        if key in self.data:
            self.data[key] = value
            return
        if len(self.data) >= self.limit:
            self.data.popitem(last=False)
        self.data[key] = value


# ---------------------------------------------------------------------------
# Minimality


def is_minimal_zero_sum(S: Sequence) -> bool:
    """Nonempty, zero-sum, and no proper nonempty zero-sum subsequence."""
    from .sequences import gf2_rank, shortest_zero_sum_length, _support_masks

    G = S.group
    n = S.length
    if n == 0:
        return False
    z = zero(G)
    if S.sum() != z:
        return False
    if n == 1:
        return True  # the single element is 0, and 0 alone is minimal
    if G.is_elementary_2:
        # only shapes: the zero singleton, a doubled element, or a
        # squarefree circuit (dependent set whose proper subsets are free)
        if S.contains_zero():
            return False
        if n == 2:
            return S.items[0][1] == 2  # g*g for a single g
        if not S.is_squarefree():
            return False
        masks = _support_masks(S)
        return gf2_rank(masks) == n - 1
    # a proper zero-sum part and its complement are both zero-sum; one of
    # them has length at most half, so a capped search settles minimality
    return shortest_zero_sum_length(S, n // 2) is None


# ---------------------------------------------------------------------------
# Atom enumeration


def _atom_dfs(
    G: Group,
    elements: List[Element],
    counts: List[int],
    start: int,
    prefix: List[Element],
    s: Element,
    proper_sums: frozenset,
    max_len: Optional[int],
    budget: _Budget,
) -> Iterator[Tuple[Element, ...]]:
    """Extend prefix with nondecreasing element indices.

    proper_sums is the set of sums of nonempty proper subsequences of
    the prefix; hitting zero there means no extension can be minimal.
    """
    z = zero(G)
    for i in range(start, len(elements)):
        if counts[i] == 0:
            continue
        budget.spend()
        e = elements[i]
        s2 = add(G, s, e)
        if prefix:
            ps2 = proper_sums | frozenset(add(G, x, e) for x in proper_sums) | {s, e}
        else:
            ps2 = frozenset()
        if z in ps2:
            continue
        prefix.append(e)
        if s2 == z:
            yield tuple(prefix)
        elif max_len is None or len(prefix) < max_len:
            counts[i] -= 1
            yield from _atom_dfs(
                G, elements, counts, i, prefix, s2, ps2, max_len, budget
            )
            counts[i] += 1
        prefix.pop()


def minimal_divisors(
    S: Sequence, max_len: Optional[int] = None, budget: Optional[int] = None
) -> Iterator[Sequence]:
    """All minimal zero-sum T dividing S, each once, in lexicographic order."""
    G = S.group
    elements = [e for e, _ in S.items]
    counts = [m for _, m in S.items]
    b = _Budget(budget)
    for atom in _atom_dfs(G, elements, counts, 0, [], zero(G), frozenset(), max_len, b):
        yield Sequence.from_elements(G, atom)


def atoms_through(
    S: Sequence,
    g: Element,
    max_len: Optional[int] = None,
    budget: Optional[_Budget] = None,
) -> Iterator[Tuple[Element, ...]]:
    """Minimal zero-sum divisors of S containing g, as element tuples."""
    G = S.group
    z = zero(G)
    if S.multiplicity(g) == 0:
        return
    if budget is None:
        budget = _Budget(None)
    if g == z:
        yield (z,)
        return
    elements = [e for e, _ in S.items]
    counts = [m for _, m in S.items]
    gi = elements.index(g)
    counts[gi] -= 1
    if max_len is None or max_len >= 2:
        for atom in _atom_dfs(
            G, elements, counts, 0, [g], g, frozenset(), max_len, budget
        ):
            yield tuple(sorted(atom))
    counts[gi] += 1


# ---------------------------------------------------------------------------
# Disjoint zero-sum counting


def _first_nonzero(counts: List[int]) -> int:
    for i, c in enumerate(counts):
        if c:
            return i
    return -1


def max_disjoint_zero_sums(S: Sequence, budget: Optional[int] = None) -> int:
    """Largest k with a product of k nonempty zero-sum sequences dividing S."""
    G = S.group
    elements = [e for e, _ in S.items]
    counts = [m for _, m in S.items]
    index = {e: i for i, e in enumerate(elements)}
    b = _Budget(budget)
    memo = _Memo()

    def search(counts: List[int]) -> int:
        i = _first_nonzero(counts)
        if i < 0:
            return 0
        key = tuple(counts)
        hit = memo.get(key)
        if hit is not None:
            return hit
        b.spend()
        p = elements[i]
        counts[i] -= 1
        best = search(counts)  # discard the pinned element
        counts[i] += 1
        base = Sequence.from_counts(G, {e: counts[j] for j, e in enumerate(elements)})
        for atom in list(atoms_through(base, p, budget=b)):
            for e in atom:
                counts[index[e]] -= 1
            candidate = 1 + search(counts)
            for e in atom:
                counts[index[e]] += 1
            if candidate > best:
                best = candidate
        memo.put(key, best)
        return best

    return search(counts)


def max_length(B: Sequence, budget: Optional[int] = None) -> int:
    """Largest factorization length of a zero-sum sequence.

    Same search as max_disjoint_zero_sums but the parts must exhaust B,
    so there is no discard branch.
    """
    G = B.group
    if B.sum() != zero(G):
        raise SequenceError("max_length requires a zero-sum sequence")
    elements = [e for e, _ in B.items]
    counts = [m for _, m in B.items]
    index = {e: i for i, e in enumerate(elements)}
    b = _Budget(budget)
    memo = _Memo()

    def search(counts: List[int]) -> int:
        i = _first_nonzero(counts)
        if i < 0:
            return 0
        key = tuple(counts)
        hit = memo.get(key)
        if hit is not None:
            return hit
        b.spend()
        p = elements[i]
        base = Sequence.from_counts(G, {e: counts[j] for j, e in enumerate(elements)})
        best = 0
        for atom in list(atoms_through(base, p, budget=b)):
            for e in atom:
                counts[index[e]] -= 1
            candidate = 1 + search(counts)
            for e in atom:
                counts[index[e]] += 1
            if candidate > best:
                best = candidate
        memo.put(key, best)
        return best

    return search(counts)


# ---------------------------------------------------------------------------
# Length sets and factorization enumeration


@dataclass(frozen=True)
class LengthSet:
    lengths: tuple

    def __post_init__(self):
        if list(self.lengths) != sorted(set(self.lengths)):
            raise ValueError("lengths must be strictly sorted and unique")

    @property
    def min(self) -> int:
        return self.lengths[0]

    @property
    def max(self) -> int:
        return self.lengths[-1]

    def gaps(self) -> tuple:
        """Set of successive differences, deduplicated and sorted."""
        diffs = {
            self.lengths[i + 1] - self.lengths[i]
            for i in range(len(self.lengths) - 1)
        }
        return tuple(sorted(diffs))

    def __contains__(self, k: int) -> bool:
        return k in self.lengths

    def __iter__(self):
        return iter(self.lengths)

    def __len__(self) -> int:
        return len(self.lengths)


def length_set(
    B: Sequence, atom_cap: Optional[int] = None, budget: Optional[int] = None
) -> LengthSet:
    """Exact set of factorization lengths of a zero-sum sequence."""
    G = B.group
    if B.sum() != zero(G):
        raise SequenceError("length_set requires a zero-sum sequence")
    elements = [e for e, _ in B.items]
    counts = [m for _, m in B.items]
    index = {e: i for i, e in enumerate(elements)}
    b = _Budget(budget)
    memo = _Memo()

    def search(counts: List[int]) -> frozenset:
        i = _first_nonzero(counts)
        if i < 0:
            return frozenset([0])
        key = tuple(counts)
        hit = memo.get(key)
        if hit is not None:
            return hit
        b.spend()
        p = elements[i]
        base = Sequence.from_counts(G, {e: counts[j] for j, e in enumerate(elements)})
        out = set()
        for atom in list(atoms_through(base, p, max_len=atom_cap, budget=b)):
            for e in atom:
                counts[index[e]] -= 1
            out |= {1 + n for n in search(counts)}
            for e in atom:
                counts[index[e]] += 1
        result = frozenset(out)
        memo.put(key, result)
        return result

    lengths = search(counts)
    if not lengths and B.length > 0:
        raise SequenceError(
            "no factorization within atom length cap %r" % (atom_cap,)
        )
    return LengthSet(tuple(sorted(lengths)))


@dataclass(frozen=True)
class Factorization:
    """Multiset of minimal zero-sum sequences, each verified on construction."""

    group: Group
    atoms: tuple  # ((Sequence, multiplicity), ...) sorted by atom items

    @staticmethod
    def from_atoms(G: Group, atoms) -> "Factorization":
        counts: Dict[Sequence, int] = {}
        for a in atoms:
            if a.group != G:
                raise SequenceError("atom belongs to a different group")
            if not is_minimal_zero_sum(a):
                raise SequenceError("part %r is not a minimal zero-sum sequence" % (a,))
            counts[a] = counts.get(a, 0) + 1
        ordered = tuple(sorted(counts.items(), key=lambda kv: kv[0].items))
        return Factorization(G, ordered)

    @property
    def length(self) -> int:
        return sum(m for _, m in self.atoms)

    def product(self) -> Sequence:
        out = Sequence.empty(self.group)
        for a, m in self.atoms:
            for _ in range(m):
                out = out.times(a)
        return out

    def multiplicity(self, atom: Sequence) -> int:
        for a, m in self.atoms:
            if a == atom:
                return m
        return 0

    def to_json(self) -> list:
        return [{"atom": format_sequence(a), "mult": m} for a, m in self.atoms]

    @staticmethod
    def from_json(G: Group, data: list) -> "Factorization":
        atoms = []
        for entry in data:
            a = parse_sequence(G, entry["atom"])
            atoms.extend([a] * entry["mult"])
        return Factorization.from_atoms(G, atoms)

    def __repr__(self) -> str:
        parts = []
        for a, m in self.atoms:
            text = "(%s)" % format_sequence(a)
            parts.append(text if m == 1 else "%s^%d" % (text, m))
        return "Factorization[%s]" % " ".join(parts)


def enumerate_factorizations(
    B: Sequence, budget: Optional[int] = None
) -> Iterator[Factorization]:
    """All factorizations of B, each exactly once.

    Atoms are chosen in nondecreasing canonical order; an atom's least
    element is always the current pin, so the ordering constraint is a
    single global threshold.
    """
    G = B.group
    if B.sum() != zero(G):
        raise SequenceError("enumerate_factorizations requires a zero-sum sequence")
    elements = [e for e, _ in B.items]
    counts = [m for _, m in B.items]
    index = {e: i for i, e in enumerate(elements)}
    b = _Budget(budget)

    def search(counts: List[int], last_atom) -> Iterator[List[Tuple[Element, ...]]]:
        i = _first_nonzero(counts)
        if i < 0:
            yield []
            return
        b.spend()
        p = elements[i]
        base = Sequence.from_counts(G, {e: counts[j] for j, e in enumerate(elements)})
        for atom in list(atoms_through(base, p, budget=b)):
            if last_atom is not None and atom < last_atom:
                continue
            for e in atom:
                counts[index[e]] -= 1
            for rest in search(counts, atom):
                yield [atom] + rest
            for e in atom:
                counts[index[e]] += 1

    for chain in search(counts, None):
        yield Factorization.from_atoms(
            G, [Sequence.from_elements(G, a) for a in chain]
        )


# ---------------------------------------------------------------------------
# Distances


def distance(z1: Factorization, z2: Factorization) -> int:
    """Cancel the common atoms, then take the larger remaining length."""
    if z1.group != z2.group:
        raise SequenceError("factorizations belong to different groups")
    c1 = dict(z1.atoms)
    common = 0
    for a, m in z2.atoms:
        common += min(m, c1.get(a, 0))
    return max(z1.length - common, z2.length - common)


def successive_distance_of(z: Factorization, budget: Optional[int] = None) -> int:
    """Least m reaching every adjacent factorization length within m.

    For each length adjacent to |z| in the length set of the product,
    some factorization of that length must be within distance m of z;
    the answer is 0 when no adjacent length exists.
    """
    B = z.product()
    by_length: Dict[int, List[Factorization]] = {}
    for xi in enumerate_factorizations(B, budget=budget):
        by_length.setdefault(xi.length, []).append(xi)
    lengths = sorted(by_length)
    k = z.length
    pos = lengths.index(k)
    adjacent = []
    if pos > 0:
        adjacent.append(lengths[pos - 1])
    if pos + 1 < len(lengths):
        adjacent.append(lengths[pos + 1])
    if not adjacent:
        return 0
    worst = 0
    for other in adjacent:
        best = min(distance(z, xi) for xi in by_length[other])
        worst = max(worst, best)
    return worst
