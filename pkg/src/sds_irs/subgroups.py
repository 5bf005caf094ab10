"""Structured subgroups H of Sym(m) and their normalized permutation characters.

For the action of S = Sym(m) on the cosets S/H the normalized permutation
character has three equal descriptions::

    theta(g) = |Fix(g)| / [S:H] = |g^S n H| / |g^S| = P_s[s g s^-1 in H]

with s uniform on S.  Closed forms are given for the pointwise stabilizers
and the intransitive subgroups; wreath products are handled by Monte Carlo and
small-degree enumeration only.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Literal

import numpy as np

from . import _kernels
from .cycletype import CycleType, class_size, falling_factorial, sign
from .errors import DegreeMismatch, NoClosedForm, ValidationError
from .montecarlo import TrialReport, map_chunks
from .permutation import Permutation, all_permutations, uniform_random_permutation

__all__ = [
    "Subgroup", "PointwiseStabilizer", "Intransitive", "ImprimitiveWreath", "FullSym", "Alt",
    "contains", "order", "normalized_char_exact", "normalized_char_montecarlo",
    "brute_force_char", "char_via_class", "char_via_cosets", "class_intersection_size",
    "parse_subgroup", "uniform_random_permutation",
]


class Subgroup:
    """Common interface of the subgroup models.

    ``partition()`` returns ``(labels, nlabels, fixed)``: ``s g s^-1`` lies in
    the subgroup iff it maps label classes onto label classes (onto themselves
    when ``fixed``) and, for the alternating variants, ``g`` is even.
    """

    m: int
    even_only: bool = False

    def contains(self, s: Permutation) -> bool:
        raise NotImplementedError

    def order(self) -> int:
        raise NotImplementedError

    def partition(self) -> tuple[np.ndarray, int, bool]:
        raise NotImplementedError

    def conjugate(self, w: Permutation) -> Subgroup:
        """``w H w^-1``."""
        raise NotImplementedError

    def describe(self) -> str:
        raise NotImplementedError

    def _check_degree(self, m: int):
        if m != self.m:
            raise DegreeMismatch(f"subgroup acts on {self.m} points, element on {m}")


def _point_set(points, m: int) -> frozenset[int]:
    out = frozenset(int(x) for x in points)
    if any(x < 0 or x >= m for x in out):
        raise ValidationError(f"points must lie in [0, {m})")
    return out


@dataclass(frozen=True)
class PointwiseStabilizer(Subgroup):
    """``S^eps(complement of U)`` fixing ``U`` pointwise; eps '-' means the alternating group."""

    m: int
    fixed: frozenset[int]
    parity: Literal["+", "-"] = "+"

    def __post_init__(self):
        object.__setattr__(self, "fixed", _point_set(self.fixed, self.m))
        if self.parity not in ("+", "-"):
            raise ValidationError(f"parity must be '+' or '-', got {self.parity!r}")
        if len(self.fixed) >= self.m:
            raise ValidationError("the fixed set must be a proper subset")
        if self.parity == "-" and self.m - len(self.fixed) < 2:
            raise ValidationError("parity '-' needs at least two moved points")

    @property
    def even_only(self) -> bool:
        return self.parity == "-"

    def contains(self, s):
        self._check_degree(s.degree)
        if any(s(u) != u for u in self.fixed):
            return False
        return self.parity == "+" or s.sign() == 1

    def order(self):
        n = math.factorial(self.m - len(self.fixed))
        return n if self.parity == "+" else n // 2

    def partition(self):
        labels = np.full(self.m, len(self.fixed), dtype=np.int64)
        for i, u in enumerate(sorted(self.fixed)):
            labels[u] = i
        return labels, len(self.fixed) + 1, True

    def conjugate(self, w):
        return PointwiseStabilizer(self.m, frozenset(w(u) for u in self.fixed), self.parity)

    def describe(self):
        return f"pointwise{self.parity}(U={_fmt_set(self.fixed)};m={self.m})"


@dataclass(frozen=True)
class Intransitive(Subgroup):
    """``Sym(U) x Sym(complement)``."""

    m: int
    invariant: frozenset[int]

    def __post_init__(self):
        object.__setattr__(self, "invariant", _point_set(self.invariant, self.m))
        if not 0 < len(self.invariant) < self.m:
            raise ValidationError("the invariant set must be nonempty and proper")

    def contains(self, s):
        self._check_degree(s.degree)
        return all(s(u) in self.invariant for u in self.invariant)

    def order(self):
        u = len(self.invariant)
        return math.factorial(u) * math.factorial(self.m - u)

    def partition(self):
        labels = np.zeros(self.m, dtype=np.int64)
        labels[sorted(self.invariant)] = 1
        return labels, 2, True

    def conjugate(self, w):
        return Intransitive(self.m, frozenset(w(u) for u in self.invariant))

    def describe(self):
        return f"intransitive(U={_fmt_set(self.invariant)};m={self.m})"


@dataclass(frozen=True)
class ImprimitiveWreath(Subgroup):
    """``Sym(d) Wr Sym(m/d)``: the stabilizer of a block system with blocks of size ``d``."""

    m: int
    blocks: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        blocks = tuple(sorted(tuple(sorted(int(x) for x in b)) for b in self.blocks))
        object.__setattr__(self, "blocks", blocks)
        sizes = {len(b) for b in blocks}
        if len(sizes) != 1:
            raise ValidationError("blocks must all have the same size")
        d = sizes.pop()
        if not 2 <= d <= self.m // 2:
            raise ValidationError(f"blocksize must satisfy 2 <= d <= m/2, got d={d}, m={self.m}")
        if sorted(x for b in blocks for x in b) != list(range(self.m)):
            raise ValidationError("blocks must partition the ground set")

    @classmethod
    def consecutive(cls, m: int, d: int) -> ImprimitiveWreath:
        if d < 2 or m % d:
            raise ValidationError(f"blocksize {d} must be >= 2 and divide {m}")
        return cls(m, tuple(tuple(range(i, i + d)) for i in range(0, m, d)))

    @property
    def d(self) -> int:
        return len(self.blocks[0])

    def contains(self, s):
        self._check_degree(s.degree)
        block_sets = {frozenset(b) for b in self.blocks}
        return all(frozenset(s(x) for x in b) in block_sets for b in self.blocks)

    def order(self):
        k = len(self.blocks)
        return math.factorial(self.d) ** k * math.factorial(k)

    def partition(self):
        labels = np.empty(self.m, dtype=np.int64)
        for i, b in enumerate(self.blocks):
            labels[list(b)] = i
        return labels, len(self.blocks), False

    def conjugate(self, w):
        return ImprimitiveWreath(self.m, tuple(tuple(w(x) for x in b) for b in self.blocks))

    def describe(self):
        return f"wreath(d={self.d};m={self.m})"


@dataclass(frozen=True)
class FullSym(Subgroup):
    m: int

    def contains(self, s):
        self._check_degree(s.degree)
        return True

    def order(self):
        return math.factorial(self.m)

    def partition(self):
        return np.zeros(self.m, dtype=np.int64), 1, True

    def conjugate(self, w):
        return self

    def describe(self):
        return f"sym({self.m})"


@dataclass(frozen=True)
class Alt(Subgroup):
    m: int
    even_only = True

    def contains(self, s):
        self._check_degree(s.degree)
        return s.sign() == 1

    def order(self):
        return max(math.factorial(self.m) // 2, 1)

    def partition(self):
        return np.zeros(self.m, dtype=np.int64), 1, True

    def conjugate(self, w):
        return self

    def describe(self):
        return f"alt({self.m})"


def _fmt_set(points) -> str:
    return "{" + ",".join(str(x) for x in sorted(points)) + "}"


def parse_subgroup(text: str, m: int) -> Subgroup:
    """Parse a canonical subgroup of Sym(m).

    ``sym``, ``alt``, ``pointwise+:r`` / ``pointwise-:r`` (fixing ``0..r-1``),
    ``intransitive:u`` (``U = 0..u-1``), ``wreath:d`` (consecutive blocks).
    """
    text = text.strip().lower()
    if text == "sym":
        return FullSym(m)
    if text == "alt":
        return Alt(m)
    match = re.fullmatch(r"(pointwise[+-]|intransitive|wreath):(\d+)", text)
    if match is None:
        raise ValidationError(f"unknown subgroup {text!r}")
    kind, n = match.group(1), int(match.group(2))
    if kind.startswith("pointwise"):
        return PointwiseStabilizer(m, frozenset(range(n)), kind[-1])
    if kind == "intransitive":
        return Intransitive(m, frozenset(range(n)))
    return ImprimitiveWreath.consecutive(m, n)


# --------------------------------------------------------------------------
# operations


def contains(H: Subgroup, s: Permutation) -> bool:
    return H.contains(s)


def order(H: Subgroup) -> int:
    return H.order()


def _as_type(g) -> CycleType:
    return g.cycle_type() if isinstance(g, Permutation) else g


def _split_count(t: CycleType, u: int) -> int:
    """Number of ways to pick whole cycles of ``t`` covering exactly ``u`` points.

    Coefficient of ``x^u`` in ``prod_j (1 + x^j)^(c_j)``.
    """
    poly = [1] + [0] * u
    for j, c in t.items():
        for _ in range(c):
            for deg in range(u, j - 1, -1):
                poly[deg] += poly[deg - j]
    return poly[u]


def normalized_char_exact(H: Subgroup, g) -> Fraction:
    """Exact ``|g^S n H| / |g^S|`` for the subgroups with a closed form.

    Pointwise stabilizer of ``r`` points: ``f^(r) / m^(r)`` (falling
    factorials, ``f`` the number of fixed points), times the parity indicator
    for the alternating variant.

    Intransitive with ``|U| = u``: summing the class counts of Sym(U) x
    Sym(T) over all ways of splitting the cycles of ``g`` into a degree-``u``
    part and a degree-``m-u`` part and dividing by ``|g^S|`` collapses to
    ``#{cycle subsets covering u points} / C(m, u)``.
    """
    t = _as_type(g)
    H._check_degree(t.degree)
    if isinstance(H, FullSym):
        return Fraction(1)
    if isinstance(H, Alt):
        return Fraction(1 if sign(t) == 1 else 0)
    if isinstance(H, PointwiseStabilizer):
        if H.parity == "-" and sign(t) == -1:
            return Fraction(0)
        r = len(H.fixed)
        return Fraction(falling_factorial(t.fixed_points, r), falling_factorial(H.m, r))
    if isinstance(H, Intransitive):
        u = len(H.invariant)
        return Fraction(_split_count(t, u), math.comb(H.m, u))
    raise NoClosedForm(f"no closed form for {H.describe()}; use the Monte Carlo estimate")


def _conj_hits(H: Subgroup, g: Permutation, perms: np.ndarray) -> int:
    if H.even_only and g.sign() == -1:
        return 0
    labels, nlabels, fixed = H.partition()
    return int(np.count_nonzero(
        _kernels.conj_preserves_partition(perms, g.images, labels, nlabels, fixed)))


def normalized_char_montecarlo(H: Subgroup, g: Permutation, trials: int, seed: int,
                               workers: int = 1) -> TrialReport:
    """Frequency with which a uniform conjugate ``s g s^-1`` lands in ``H``."""
    if trials < 1:
        raise ValidationError("trials must be >= 1")
    H._check_degree(g.degree)
    hits = sum(map_chunks(seed, trials, H.m, lambda P: _conj_hits(H, g, P), workers))
    try:
        exact = normalized_char_exact(H, g)
    except NoClosedForm:
        exact = None
    return TrialReport(H.describe(), str(g.cycle_type()), trials, hits, seed, exact)


def brute_force_char(H: Subgroup, g: Permutation) -> Fraction:
    """``|{s in Sym(m) : s g s^-1 in H}| / m!`` by enumerating Sym(m), m <= 8."""
    H._check_degree(g.degree)
    perms = all_permutations(H.m)
    return Fraction(_conj_hits(H, g, perms), perms.shape[0])


def _class_members(g: Permutation) -> list[Permutation]:
    t = g.cycle_type()
    out = []
    for row in all_permutations(g.degree):
        p = Permutation(row)
        if p.cycle_type() == t:
            out.append(p)
    return out


def class_intersection_size(H: Subgroup, g: Permutation) -> int:
    """``|g^S n H|`` by enumerating the conjugacy class and testing membership."""
    H._check_degree(g.degree)
    return sum(1 for p in _class_members(g) if H.contains(p))


def char_via_class(H: Subgroup, g: Permutation) -> Fraction:
    return Fraction(class_intersection_size(H, g), class_size(g.cycle_type()))


def _ranks(perms: np.ndarray, m: int) -> np.ndarray:
    weights = m ** np.arange(m - 1, -1, -1, dtype=np.int64)
    return perms @ weights


def char_via_cosets(H: Subgroup, g: Permutation, block: int = 256) -> Fraction:
    """``|Fix(g)| / [S:H]`` for ``g`` acting by left multiplication on the cosets ``aH``.

    Each coset is named by the least rank among its elements.
    """
    H._check_degree(g.degree)
    m = H.m
    S = all_permutations(m)
    elems = np.array([row for row in S if H.contains(Permutation(row))])

    def coset_keys(A):
        keys = np.empty(A.shape[0], dtype=np.int64)
        for lo in range(0, A.shape[0], block):
            prod = A[lo:lo + block][:, elems]  # a o h for every h in H
            keys[lo:lo + block] = _ranks(prod, m).min(axis=1)
        return keys

    keys = coset_keys(S)
    moved = coset_keys(g.images[S])
    cosets = np.unique(keys)
    fixed = np.unique(keys[keys == moved])
    return Fraction(fixed.size, cosets.size)
