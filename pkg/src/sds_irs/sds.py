"""Strictly diagonal limits of finite symmetric groups, at finite levels.

The group is ``G = union of G_n = Sym(X_n)`` with ``X_n = [k_0] x ... x [k_n]``.
A point ``(i_0, ..., i_n)`` of ``X_n`` is stored as the mixed-radix index
``i_0 + k_0 i_1 + k_0 k_1 i_2 + ...``, so restricting a level-``n+1`` point to
level ``n`` is reduction modulo ``|X_n|`` and the embedding
``G_n -> G_{n+1}`` repeats a permutation on ``k_{n+1}`` consecutive copies.

Only a finite prefix of ``(k_n)`` is ever known; the parity behaviour of the
tail has to be declared, since simplicity of ``G`` depends on it.
"""

from __future__ import annotations

import enum
import hashlib
import json
import math
import re
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from itertools import permutations as _iter_permutations
from pathlib import Path
from typing import Literal

import numpy as np

from . import _kernels
from .cycletype import CycleType, diagonal_embed, falling_factorial, sign
from .errors import (DegreeTooLarge, InvalidLabel, LevelOutOfRange, LevelTooSmall,
                     ValidationError)
from .montecarlo import TrialReport, map_chunks
from .permutation import BRUTE_FORCE_MAX_DEGREE, Permutation, all_permutations, chunk_generator
from .subgroups import PointwiseStabilizer, Subgroup

Tail = Literal["inf_even", "event_odd"]


class Simplicity(enum.Enum):
    SIMPLE = "Simple"
    NOT_SIMPLE = "NotSimple"


@dataclass(frozen=True)
class SdsSpec:
    prefix: tuple[int, ...]
    tail: Tail

    def __post_init__(self):
        object.__setattr__(self, "prefix", tuple(int(k) for k in self.prefix))
        if not self.prefix:
            raise ValidationError("prefix must contain at least k_0")
        if any(k < 2 for k in self.prefix):
            raise ValidationError("every k_n must be >= 2")
        if self.tail not in ("inf_even", "event_odd"):
            raise ValidationError(f"tail must be 'inf_even' or 'event_odd', got {self.tail!r}")

    @classmethod
    def from_dict(cls, data: dict) -> SdsSpec:
        try:
            return cls(tuple(data["prefix"]), data["tail"])
        except (KeyError, TypeError) as exc:
            raise ValidationError(f"bad SDS spec: {exc}") from None

    @classmethod
    def load(cls, path) -> SdsSpec:
        try:
            data = json.loads(Path(path).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ValidationError(f"cannot read SDS spec {path}: {exc}") from None
        return cls.from_dict(data)

    def to_dict(self) -> dict:
        return {"prefix": list(self.prefix), "tail": self.tail}

    def digest(self) -> str:
        blob = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()

    @property
    def top(self) -> int:
        """Largest level covered by the prefix."""
        return len(self.prefix) - 1

    def check_level(self, n: int):
        if not 0 <= n <= self.top:
            raise LevelOutOfRange(f"level {n} outside 0..{self.top}")

    def level_size(self, n: int) -> int:
        self.check_level(n)
        return math.prod(self.prefix[: n + 1])

    def ratio(self, n: int, to: int) -> int:
        """``|X_to| / |X_n|``: the multiplicity of the diagonal embedding."""
        return self.level_size(to) // self.level_size(n)

    def point_index(self, coords) -> int:
        n = len(coords) - 1
        self.check_level(n)
        idx, scale = 0, 1
        for i, k in zip(coords, self.prefix):
            if not 0 <= i < k:
                raise ValidationError(f"coordinate {i} outside [0, {k})")
            idx += i * scale
            scale *= k
        return idx

    def point_coords(self, idx: int, n: int) -> tuple[int, ...]:
        out = []
        for k in self.prefix[: n + 1]:
            idx, i = divmod(idx, k)
            out.append(i)
        return tuple(out)


def simplicity(spec: SdsSpec) -> Simplicity:
    """Simple iff ``k_n`` is even for infinitely many ``n``; only the declared tail matters."""
    return Simplicity.SIMPLE if spec.tail == "inf_even" else Simplicity.NOT_SIMPLE


@dataclass(frozen=True)
class LevelElement:
    """An element of ``G_level``, given by a permutation or only by its cycle type."""

    level: int
    perm: Permutation | None = None
    ctype: CycleType | None = None

    def __post_init__(self):
        if self.perm is None and self.ctype is None:
            raise ValidationError("LevelElement needs a permutation or a cycle type")
        if self.ctype is None:
            object.__setattr__(self, "ctype", self.perm.cycle_type())

    @property
    def degree(self) -> int:
        return self.ctype.degree

    def check(self, spec: SdsSpec):
        if self.degree != spec.level_size(self.level):
            raise ValidationError(
                f"element has degree {self.degree}, level {self.level} has "
                f"{spec.level_size(self.level)} points")


def element(spec: SdsSpec, level: int, g) -> LevelElement:
    """Wrap a Permutation or CycleType as a checked level element."""
    el = LevelElement(level, perm=g) if isinstance(g, Permutation) else LevelElement(level, ctype=g)
    el.check(spec)
    return el


def embed_level(spec: SdsSpec, g: LevelElement, to_level: int) -> LevelElement:
    if to_level < g.level:
        raise LevelOutOfRange(f"cannot embed level {g.level} into lower level {to_level}")
    spec.check_level(to_level)
    g.check(spec)
    ell = spec.ratio(g.level, to_level)
    ctype = diagonal_embed(g.ctype, ell)
    if g.perm is None:
        return LevelElement(to_level, ctype=ctype)
    size = g.degree
    images = np.concatenate([g.perm.images + j * size for j in range(ell)])
    return LevelElement(to_level, perm=Permutation(images), ctype=ctype)


# --------------------------------------------------------------------------
# characters of the ergodic IRS's


@dataclass(frozen=True)
class IrsLabel:
    kind: Literal["trivial", "alt", "full", "sigma", "sigmatilde"]
    r: int | None = None

    def __post_init__(self):
        if self.kind in ("sigma", "sigmatilde"):
            if self.r is None or self.r < 1:
                raise InvalidLabel(f"{self.kind} needs r >= 1")
        elif self.kind in ("trivial", "alt", "full"):
            if self.r is not None:
                raise InvalidLabel(f"{self.kind} takes no r")
        else:
            raise InvalidLabel(f"unknown IRS {self.kind!r}")

    @classmethod
    def parse(cls, text: str) -> IrsLabel:
        match = re.fullmatch(r"(sigma|sigmatilde):(\d+)", text.strip().lower())
        if match:
            return cls(match.group(1), int(match.group(2)))
        if text.strip().lower() in ("trivial", "alt", "full"):
            return cls(text.strip().lower())
        raise InvalidLabel(f"cannot parse IRS label {text!r}")

    def validate(self, spec: SdsSpec):
        if self.kind in ("alt", "sigmatilde") and spec.tail != "event_odd":
            raise InvalidLabel(f"{self} exists only when all but finitely many k_n are odd")

    def __str__(self):
        return self.kind if self.r is None else f"{self.kind}:{self.r}"


def last_even_level(spec: SdsSpec) -> int | None:
    evens = [n for n, k in enumerate(spec.prefix) if k % 2 == 0]
    return evens[-1] if evens else None


def in_alt_subgroup(spec: SdsSpec, g: LevelElement) -> bool:
    """Membership in ``A(G) = union Alt(X_n)``.

    Beyond the prefix every ``k`` is odd, so the sign stabilizes once ``g`` is
    pushed past the last even ``k`` in the prefix.
    """
    if spec.tail != "event_odd":
        raise InvalidLabel("A(G) is a proper subgroup only when the tail is eventually odd")
    g.check(spec)
    last = last_even_level(spec)
    target = g.level if last is None else max(g.level, last)
    ell = spec.ratio(g.level, target)
    s = sign(g.ctype)
    return (s if ell % 2 else 1) == 1


def irs_character(spec: SdsSpec, label: IrsLabel, g: LevelElement) -> Fraction:
    """Exact value of the character ``chi(g) = mu(Fix(g))`` of the labelled IRS."""
    label.validate(spec)
    g.check(spec)
    t = g.ctype
    if label.kind == "trivial":
        return Fraction(1 if t.is_identity else 0)
    if label.kind == "full":
        return Fraction(1)
    if label.kind == "alt":
        return Fraction(1 if in_alt_subgroup(spec, g) else 0)
    if label.kind == "sigmatilde" and not in_alt_subgroup(spec, g):
        return Fraction(0)
    return t.fixed_fraction() ** label.r


def pet_orbit_average(spec: SdsSpec, g: LevelElement, r: int, level: int) -> Fraction:
    """``|Fix(g)| / |Omega|`` for ``Omega`` the injective ``r``-tuples of ``X_level``.

    This is the finite-level orbit average whose limit is the ``sigma_r``
    character.
    """
    if r < 1:
        raise ValidationError("r must be >= 1")
    size = spec.level_size(level)
    if size < r:
        raise LevelTooSmall(f"|X_{level}| = {size} < r = {r}")
    f = embed_level(spec, g, level).ctype.fixed_points
    return Fraction(falling_factorial(f, r), falling_factorial(size, r))


def pet_orbit_enumeration(spec: SdsSpec, g: LevelElement, r: int, level: int,
                          limit: int = 12) -> Fraction:
    """Enumeration oracle for :func:`pet_orbit_average` on small levels."""
    size = spec.level_size(level)
    if size > limit:
        raise DegreeTooLarge(f"|X_{level}| = {size} exceeds enumeration limit {limit}")
    if size < r:
        raise LevelTooSmall(f"|X_{level}| = {size} < r = {r}")
    el = embed_level(spec, g if g.perm is not None else _with_perm(g), level)
    img = el.perm.images
    total = fixed = 0
    for tup in _iter_permutations(range(size), r):
        total += 1
        fixed += all(img[x] == x for x in tup)
    return Fraction(fixed, total)


def _with_perm(g: LevelElement) -> LevelElement:
    return LevelElement(g.level, perm=Permutation.canonical(g.ctype))


# --------------------------------------------------------------------------
# samplers


def sample_irs_points(spec: SdsSpec, r: int, level: int, seed: int, draw: int = 0):
    """``r`` i.i.d. product-measure points restricted to ``X_level``, redrawn until distinct."""
    size = spec.level_size(level)
    if size <= r:
        raise LevelTooSmall(f"|X_{level}| = {size} must exceed r = {r}")
    rng = chunk_generator(seed, draw)
    ks = np.array(spec.prefix[: level + 1])
    while True:
        coords = rng.integers(0, ks, size=(r, ks.size))
        pts = [spec.point_index(tuple(int(i) for i in row)) for row in coords]
        if len(set(pts)) == r:
            return pts


def sample_irs_subgroup(spec: SdsSpec, label: IrsLabel, level: int, seed: int,
                        draw: int = 0) -> PointwiseStabilizer:
    if label.kind not in ("sigma", "sigmatilde"):
        raise InvalidLabel("only sigma:r and sigmatilde:r have subgroup samplers")
    label.validate(spec)
    pts = sample_irs_points(spec, label.r, level, seed, draw)
    parity = "+" if label.kind == "sigma" else "-"
    return PointwiseStabilizer(spec.level_size(level), frozenset(pts), parity)


# --------------------------------------------------------------------------
# character axioms


def character_gram(spec: SdsSpec, label: IrsLabel, elems: list[LevelElement]) -> np.ndarray:
    """``[chi(g_j^-1 g_i)]_{i,j}`` as floats; elements must carry permutations."""
    k = len(elems)
    out = np.empty((k, k))
    for i, gi in enumerate(elems):
        for j, gj in enumerate(elems):
            h = gj.perm.inverse() * gi.perm
            out[i, j] = float(irs_character(spec, label, LevelElement(gi.level, perm=h)))
    return out


def psd_min_eigenvalues(spec: SdsSpec, label: IrsLabel, level: int, sets: int, size: int,
                        seed: int) -> np.ndarray:
    """Smallest Gram eigenvalue for each of ``sets`` random ``size``-element sets of ``G_level``."""
    m = spec.level_size(level)
    out = np.empty(sets)
    for c in range(sets):
        rng = chunk_generator(seed, c)
        rows = _kernels.shuffle_from_draws(
            rng.integers(0, np.arange(m, 1, -1), size=(size, m - 1)))
        elems = [LevelElement(level, perm=Permutation(row)) for row in rows]
        out[c] = np.linalg.eigvalsh(character_gram(spec, label, elems)).min()
    return out


# --------------------------------------------------------------------------
# unique ergodicity


@lru_cache(maxsize=8)
def _mult_table(m: int) -> np.ndarray:
    perms = all_permutations(m)
    index = {tuple(row): i for i, row in enumerate(perms.tolist())}
    return np.array([[index[tuple(a[b])] for b in perms] for a in perms], dtype=np.int64)


def all_subgroups(m: int) -> list[frozenset[int]]:
    """Every subgroup of Sym(m), as sets of row indices into ``all_permutations(m)``.

    Built by repeatedly adjoining one element and closing; practical for m <= 4.
    """
    if m > 5:
        raise DegreeTooLarge("subgroup enumeration is limited to m <= 5")
    table = _mult_table(m)
    ident = 0  # the identity is the lexicographically first row

    def close(gens: set[int]) -> frozenset[int]:
        group = {ident} | gens
        frontier = list(group)
        while frontier:
            new = []
            for a in frontier:
                for b in list(group):
                    for c in (table[a, b], table[b, a]):
                        if c not in group:
                            group.add(int(c))
                            new.append(int(c))
            frontier = new
        return frozenset(group)

    found = {frozenset({ident})}
    frontier = list(found)
    n = table.shape[0]
    while frontier:
        new = []
        for grp in frontier:
            for x in range(n):
                if x not in grp:
                    bigger = close(set(grp) | {x})
                    if bigger not in found:
                        found.add(bigger)
                        new.append(bigger)
        frontier = new
    return sorted(found, key=lambda s: (len(s), sorted(s)))


def level_subgroup(spec: SdsSpec, level: int, rows) -> list[Permutation]:
    perms = all_permutations(spec.level_size(level))
    return [Permutation(perms[i]) for i in sorted(rows)]


def _embedded_rows(spec: SdsSpec, m_small: int, n: int) -> tuple[np.ndarray, list[tuple]]:
    small = all_permutations(spec.level_size(m_small))
    imgs = []
    for row in small:
        el = embed_level(spec, LevelElement(m_small, perm=Permutation(row)), n)
        imgs.append(el.perm.images)
    return np.array(imgs), [tuple(row) for row in small.tolist()]


def unique_ergodicity_probe(spec: SdsSpec, H: Subgroup, n: int, m_small: int,
                            L: list[Permutation], mode: Literal["exact", "sampled"] = "exact",
                            trials: int = 10_000, seed: int = 0):
    """Fraction of ``g in G_n`` with ``g H g^-1 n G_{m_small} = L``.

    ``L`` is a subgroup of ``G_{m_small}`` given by its elements; ``G_{m_small}``
    is identified with its diagonal image in ``G_n``.  Exact mode enumerates
    ``G_n`` and returns a Fraction; sampled mode returns a TrialReport.
    """
    if m_small > n:
        raise LevelOutOfRange("m_small must not exceed n")
    size = spec.level_size(n)
    H._check_degree(size)
    if mode == "exact" and size > BRUTE_FORCE_MAX_DEGREE:
        raise DegreeTooLarge(f"exact probe needs |X_n| <= {BRUTE_FORCE_MAX_DEGREE}")
    images, keys = _embedded_rows(spec, m_small, n)
    target = np.array([k in {tuple(p.images.tolist()) for p in L} for k in keys])
    labels, nlabels, fixed = H.partition()
    parity_ok = np.array([Permutation(x).sign() == 1 or not H.even_only for x in images])

    # Row s stands for g = s^-1: s x s^-1 = g^-1 x g lies in H iff x lies in g H g^-1.
    def hits(perms: np.ndarray) -> int:
        member = np.empty((perms.shape[0], images.shape[0]), dtype=bool)
        for j, x in enumerate(images):
            member[:, j] = parity_ok[j] & _kernels.conj_preserves_partition(
                perms, x, labels, nlabels, fixed)
        return int(np.count_nonzero(np.all(member == target, axis=1)))

    if mode == "exact":
        perms = all_permutations(size)
        return Fraction(hits(perms), perms.shape[0])
    if mode != "sampled":
        raise ValidationError(f"mode must be 'exact' or 'sampled', got {mode!r}")
    count = sum(map_chunks(seed, trials, size, hits))
    return TrialReport(H.describe(), f"L(order={len(L)};level={m_small})", trials, count, seed)
