"""Exact arithmetic on cycle types of finite symmetric groups.

A :class:`CycleType` records, for each cycle length, how many cycles of that
length a permutation has.  Fixed points are stored as 1-cycles.  Two counts are
kept apart because different estimates need different ones:

* ``total_cycles`` counts every cycle, fixed points included.  This is the
  ``sum k_i`` appearing in the class-size lower bound.
* ``nontrivial_cycles`` counts cycles of length at least 2.  This is the ``k``
  used by the block-splitting and intransitive experiments.

Class sizes and factorials are Python ints (exact); bounds that have to reach
``ell`` of order ``10**4`` and beyond are carried in log space as
:class:`LogBound` values.
"""

from __future__ import annotations

import math
import re
from collections.abc import Iterator, Mapping
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Literal

from .errors import IdentityType, ValidationError

# Above this degree log class sizes are computed with lgamma instead of exact ints.
EXACT_DEGREE_LIMIT = 2000

LOG_STIRLING_GAP = 1.0 - 0.5 * math.log(2.0 * math.pi)  # log(e / sqrt(2 pi))


class CycleType:
    """Multiset of cycle lengths.

    >>> t = CycleType({2: 1, 1: 2})
    >>> t.degree, t.fixed_points, t.total_cycles, t.nontrivial_cycles
    (4, 2, 3, 1)
    >>> str(t)
    '2^1 1^2'
    """

    __slots__ = ("_parts",)

    def __init__(self, parts: Mapping[int, int]):
        clean = {}
        for length, mult in parts.items():
            length, mult = int(length), int(mult)
            if length < 1:
                raise ValidationError(f"cycle length must be positive, got {length}")
            if mult < 0:
                raise ValidationError(f"multiplicity must be nonnegative, got {mult}")
            if mult:
                clean[length] = clean.get(length, 0) + mult
        if not clean:
            raise ValidationError("cycle type must have degree >= 1")
        object.__setattr__(self, "_parts", tuple(sorted(clean.items(), reverse=True)))

    def __setattr__(self, name, value):
        raise AttributeError("CycleType is immutable")

    @classmethod
    def parse(cls, text: str) -> CycleType:
        """Parse ``"2^1 1^2"``; a bare length means multiplicity one."""
        parts: dict[int, int] = {}
        tokens = text.replace(",", " ").split()
        if not tokens:
            raise ValidationError("empty cycle type")
        for tok in tokens:
            m = re.fullmatch(r"(\d+)(?:\^(\d+))?", tok)
            if m is None:
                raise ValidationError(f"bad cycle-type factor {tok!r}; expected LEN^MULT")
            length = int(m.group(1))
            parts[length] = parts.get(length, 0) + int(m.group(2) or 1)
        return cls(parts)

    @classmethod
    def identity(cls, n: int) -> CycleType:
        return cls({1: n})

    @property
    def parts(self) -> dict[int, int]:
        return dict(self._parts)

    def items(self) -> tuple[tuple[int, int], ...]:
        """(length, multiplicity) pairs, longest cycles first."""
        return self._parts

    def multiplicity(self, length: int) -> int:
        return dict(self._parts).get(length, 0)

    @property
    def degree(self) -> int:
        return sum(j * c for j, c in self._parts)

    @property
    def fixed_points(self) -> int:
        return self.multiplicity(1)

    @property
    def total_cycles(self) -> int:
        return sum(c for _, c in self._parts)

    @property
    def nontrivial_cycles(self) -> int:
        return sum(c for j, c in self._parts if j > 1)

    @property
    def is_identity(self) -> bool:
        return self.fixed_points == self.degree

    def fixed_fraction(self) -> Fraction:
        return Fraction(self.fixed_points, self.degree)

    def __eq__(self, other):
        return isinstance(other, CycleType) and self._parts == other._parts

    def __hash__(self):
        return hash(self._parts)

    def __str__(self):
        return " ".join(f"{j}^{c}" for j, c in self._parts)

    def __repr__(self):
        return f"CycleType({dict(self._parts)!r})"


def all_cycle_types(n: int) -> Iterator[CycleType]:
    """Every cycle type of degree ``n`` (one per integer partition)."""

    def parts(rest: int, largest: int):
        if rest == 0:
            yield {}
            return
        for j in range(min(rest, largest), 0, -1):
            for c in range(rest // j, 0, -1):
                for tail in parts(rest - j * c, j - 1):
                    yield {j: c, **tail}

    for p in parts(n, n):
        yield CycleType(p)


def class_size(t: CycleType) -> int:
    """Size of the conjugacy class of type ``t`` in Sym(degree)."""
    denom = 1
    for j, c in t.items():
        denom *= math.factorial(c) * j**c
    return math.factorial(t.degree) // denom


def centralizer_order(t: CycleType) -> int:
    out = 1
    for j, c in t.items():
        out *= math.factorial(c) * j**c
    return out


def diagonal_embed(t: CycleType, ell: int) -> CycleType:
    """Type of the image of ``t`` under an ``ell``-fold diagonal embedding."""
    if ell < 1:
        raise ValidationError(f"ell must be >= 1, got {ell}")
    return CycleType({j: c * ell for j, c in t.items()})


def sign(t: CycleType) -> int:
    exponent = sum((j - 1) * c for j, c in t.items())
    return -1 if exponent % 2 else 1


def falling_factorial(n: int, r: int) -> int:
    """n (n-1) ... (n-r+1); zero when r > n >= 0."""
    out = 1
    for i in range(r):
        out *= n - i
    return out


# --------------------------------------------------------------------------
# log-space bounds


@dataclass(frozen=True)
class LogBound:
    """Natural log of a positive quantity, tagged as a lower or upper bound.

    Adding two bounds of the same kind keeps the kind; subtracting an upper
    bound from a lower bound gives a lower bound (and vice versa).
    """

    value: float
    kind: Literal["lower", "upper"]

    def __add__(self, other: LogBound) -> LogBound:
        if other.kind != self.kind:
            raise ValueError("cannot add a lower bound to an upper bound")
        return LogBound(self.value + other.value, self.kind)

    def __neg__(self) -> LogBound:
        return LogBound(-self.value, "upper" if self.kind == "lower" else "lower")

    def __sub__(self, other: LogBound) -> LogBound:
        return self + (-other)


@lru_cache(maxsize=4096)
def log_factorial(n: int) -> float:
    if n <= EXACT_DEGREE_LIMIT:
        return math.log(math.factorial(n))
    return math.lgamma(n + 1)


def stirling_envelope(n: int) -> tuple[LogBound, LogBound]:
    """Log-space bracket ``sqrt(2 pi n)(n/e)^n <= n! <= (e/sqrt(2 pi)) sqrt(2 pi n)(n/e)^n``."""
    if n < 1:
        raise ValidationError(f"n must be >= 1, got {n}")
    lo = 0.5 * math.log(2.0 * math.pi * n) + n * (math.log(n) - 1.0)
    return LogBound(lo, "lower"), LogBound(lo + LOG_STIRLING_GAP, "upper")


def log_class_size(t: CycleType) -> float:
    """log |g^S|, exact-then-log below EXACT_DEGREE_LIMIT, lgamma above."""
    if t.degree <= EXACT_DEGREE_LIMIT:
        return math.log(class_size(t))
    out = math.lgamma(t.degree + 1)
    for j, c in t.items():
        out -= math.lgamma(c + 1) + c * math.log(j)
    return out


@dataclass(frozen=True)
class ClassSizeWitness:
    """Constants of ``|g^S| >= r s^ell ell^(exponent * ell)`` for ``t`` embedded ``ell``-fold.

    Obtained by applying the Stirling lower bound to ``(a ell)!`` and the upper
    bound to every ``(k_i ell)!``, then absorbing the leftover ``ell^((1-t)/2)``
    into ``s`` via ``log ell <= ell / e``.
    """

    log_r: float
    log_s: float
    exponent: int  # a - sum k_i, all cycles counted

    def log_bound(self, ell: float) -> float:
        return self.log_r + ell * self.log_s + self.exponent * ell * math.log(ell)


def class_size_witness(t: CycleType) -> ClassSizeWitness:
    if t.is_identity:
        raise IdentityType("the class-size lower bound needs a non-identity type")
    a = t.degree
    items = t.items()
    n_lengths = len(items)
    total = t.total_cycles
    log_r = 0.5 * math.log(2.0 * math.pi * a) - n_lengths * LOG_STIRLING_GAP
    log_s = a * math.log(a) - (a - total)
    for j, c in items:
        log_r -= 0.5 * math.log(2.0 * math.pi * c)
        log_s -= c * math.log(c * j)
    log_s -= (n_lengths - 1) / (2.0 * math.e)
    return ClassSizeWitness(log_r, log_s, a - total)


def class_size_lower_bound(t: CycleType, ell: int) -> LogBound:
    """Log-space lower bound for the class size of ``diagonal_embed(t, ell)``."""
    if ell < 1:
        raise ValidationError(f"ell must be >= 1, got {ell}")
    return LogBound(class_size_witness(t).log_bound(ell), "lower")


@dataclass(frozen=True)
class WreathWitness:
    """Constants of ``|Sym(d) Wr Sym(a ell/d)| <= b c^ell ell^(a ell/d)``.

    From the Stirling upper bound on ``(a ell/d)!`` with ``sqrt(ell) <= e^(ell/2)``.
    """

    log_b: float
    log_c: float
    exponent: Fraction  # a / d

    def log_bound(self, ell: float) -> float:
        return self.log_b + ell * self.log_c + float(self.exponent) * ell * math.log(ell)


def wreath_witness(a: int, d: int) -> WreathWitness:
    if d < 2:
        raise ValidationError(f"blocksize must be >= 2, got {d}")
    q = a / d
    log_b = LOG_STIRLING_GAP + 0.5 * math.log(2.0 * math.pi * q)
    log_c = q * log_factorial(d) + q * (math.log(q) - 1.0) + 0.5
    return WreathWitness(log_b, log_c, Fraction(a, d))


def wreath_order(d: int, blocks: int) -> int:
    return math.factorial(d) ** blocks * math.factorial(blocks)
