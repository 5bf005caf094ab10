"""Independent brute-force oracles used by the tests.

Everything here works on plain tuples with itertools; nothing calls into the
package, so agreement with the library is a genuine cross-check.
"""

from __future__ import annotations

import itertools
from collections import Counter
from fractions import Fraction


def cycle_lengths(p: tuple[int, ...]) -> tuple[tuple[int, int], ...]:
    seen = [False] * len(p)
    lengths = Counter()
    for start in range(len(p)):
        if seen[start]:
            continue
        n, x = 0, start
        while not seen[x]:
            seen[x] = True
            x = p[x]
            n += 1
        lengths[n] += 1
    return tuple(sorted(lengths.items(), reverse=True))


def type_census(n: int) -> Counter:
    """Cycle type -> number of permutations of degree n with that type."""
    return Counter(cycle_lengths(p) for p in itertools.permutations(range(n)))


def compose(p, q):
    """(p o q)(x) = p(q(x))."""
    return tuple(p[x] for x in q)


def inverse(p):
    out = [0] * len(p)
    for i, x in enumerate(p):
        out[x] = i
    return tuple(out)


def parity(p) -> int:
    swaps = sum(length - 1 for length, c in cycle_lengths(p) for _ in range(c))
    return -1 if swaps % 2 else 1


def canonical(parts: dict[int, int]) -> tuple[int, ...]:
    img, pos = [], 0
    for j in sorted(parts, reverse=True):
        for _ in range(parts[j]):
            img.extend(pos + (i + 1) % j for i in range(j))
            pos += j
    return tuple(img)


def conjugation_frequency(member, g) -> Fraction:
    """P_s[s g s^-1 in H] over all of Sym(m), ``member`` a tuple predicate."""
    m = len(g)
    hits = total = 0
    for s in itertools.permutations(range(m)):
        total += 1
        hits += member(compose(compose(s, g), inverse(s)))
    return Fraction(hits, total)


def injective_tuple_fraction(g, r: int) -> Fraction:
    fixed = total = 0
    for tup in itertools.permutations(range(len(g)), r):
        total += 1
        fixed += all(g[x] == x for x in tup)
    return Fraction(fixed, total)
