"""Explicit permutations of ``{0, ..., m-1}`` and seeded uniform sampling."""

from __future__ import annotations

import itertools
from functools import lru_cache

import numpy as np

from . import _kernels
from .cycletype import CycleType
from .errors import DegreeMismatch, DegreeTooLarge, ValidationError

# Trials are generated in fixed-size chunks, each from its own counter-based
# substream, so results do not depend on how chunks are spread over workers.
CHUNK = 1024

BRUTE_FORCE_MAX_DEGREE = 8


class Permutation:
    """A bijection of ``{0, ..., m-1}`` given by its image array.

    Composition follows function notation: ``(p * q)(x) == p(q(x))``.
    """

    __slots__ = ("images",)

    def __init__(self, images):
        arr = np.array(images, dtype=np.int64)
        if arr.ndim != 1 or arr.size == 0:
            raise ValidationError("a permutation needs a nonempty 1-d image array")
        seen = np.zeros(arr.size, dtype=bool)
        if arr.min() < 0 or arr.max() >= arr.size:
            raise ValidationError("images out of range")
        seen[arr] = True
        if not seen.all():
            raise ValidationError("images do not form a bijection")
        arr.flags.writeable = False
        object.__setattr__(self, "images", arr)

    def __setattr__(self, name, value):
        raise AttributeError("Permutation is immutable")

    @classmethod
    def identity(cls, m: int) -> Permutation:
        return cls(np.arange(m))

    @classmethod
    def from_cycles(cls, m: int, cycles) -> Permutation:
        """``Permutation.from_cycles(4, [(0, 1), (2, 3)])``"""
        img = np.arange(m)
        for cyc in cycles:
            for i, x in enumerate(cyc):
                img[x] = cyc[(i + 1) % len(cyc)]
        return cls(img)

    @classmethod
    def canonical(cls, t: CycleType) -> Permutation:
        """Cycles laid out consecutively, longest first."""
        img = np.arange(t.degree)
        pos = 0
        for j, c in t.items():
            for _ in range(c):
                img[pos:pos + j] = np.roll(np.arange(pos, pos + j), -1)
                pos += j
        return cls(img)

    @property
    def degree(self) -> int:
        return int(self.images.size)

    def __call__(self, x: int) -> int:
        return int(self.images[x])

    def __mul__(self, other: Permutation) -> Permutation:
        if other.degree != self.degree:
            raise DegreeMismatch(f"degrees {self.degree} and {other.degree} differ")
        return Permutation(self.images[other.images])

    def inverse(self) -> Permutation:
        inv = np.empty_like(self.images)
        inv[self.images] = np.arange(self.degree)
        return Permutation(inv)

    def conjugate_by(self, s: Permutation) -> Permutation:
        """``s * self * s^-1``."""
        return s * self * s.inverse()

    def cycles(self) -> list[tuple[int, ...]]:
        seen = np.zeros(self.degree, dtype=bool)
        out = []
        for start in range(self.degree):
            if seen[start]:
                continue
            cyc = []
            x = start
            while not seen[x]:
                seen[x] = True
                cyc.append(x)
                x = int(self.images[x])
            out.append(tuple(cyc))
        return out

    def cycle_type(self) -> CycleType:
        counts: dict[int, int] = {}
        for cyc in self.cycles():
            counts[len(cyc)] = counts.get(len(cyc), 0) + 1
        return CycleType(counts)

    def fixed_points(self) -> int:
        return int(np.count_nonzero(self.images == np.arange(self.degree)))

    def sign(self) -> int:
        return -1 if (self.degree - len(self.cycles())) % 2 else 1

    def is_identity(self) -> bool:
        return bool(np.array_equal(self.images, np.arange(self.degree)))

    def __eq__(self, other):
        return isinstance(other, Permutation) and np.array_equal(self.images, other.images)

    def __hash__(self):
        return hash(self.images.tobytes())

    def __repr__(self):
        return f"Permutation({self.images.tolist()})"


def chunk_generator(seed: int, chunk: int) -> np.random.Generator:
    """Independent Philox stream for chunk number ``chunk`` of a run seeded ``seed``."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed, spawn_key=(chunk,))))


def shuffle_draws(rng: np.random.Generator, batch: int, m: int) -> np.ndarray:
    """Fisher-Yates swap targets: column ``c`` is uniform on ``[0, m-1-c]``."""
    if m == 1:
        return np.zeros((batch, 0), dtype=np.int32)
    highs = np.arange(m, 1, -1, dtype=np.int32)
    return rng.integers(0, highs, size=(batch, m - 1), dtype=np.int32)


def random_permutations(seed: int, chunk: int, batch: int, m: int) -> np.ndarray:
    """``batch`` uniform permutations of degree ``m`` as rows of an int array."""
    return _kernels.shuffle_from_draws(shuffle_draws(chunk_generator(seed, chunk), batch, m))


def uniform_random_permutation(m: int, seed: int, index: int = 0) -> Permutation:
    """The ``index``-th uniform permutation of the stream seeded by ``seed``."""
    if m < 1:
        raise ValidationError(f"m must be >= 1, got {m}")
    chunk, offset = divmod(index, CHUNK)
    rng = chunk_generator(seed, chunk)
    # Draws for earlier rows of the chunk are consumed so index i matches row i of a batch.
    rows = random_permutations_rows(rng, offset + 1, m)
    return Permutation(rows[offset])


def random_permutations_rows(rng: np.random.Generator, batch: int, m: int) -> np.ndarray:
    return _kernels.shuffle_from_draws(shuffle_draws(rng, batch, m))


@lru_cache(maxsize=16)
def all_permutations(m: int) -> np.ndarray:
    """All ``m!`` permutations as rows, lexicographic order."""
    if m > BRUTE_FORCE_MAX_DEGREE:
        raise DegreeTooLarge(f"enumeration of Sym({m}) refused; limit is {BRUTE_FORCE_MAX_DEGREE}")
    arr = np.array(list(itertools.permutations(range(m))), dtype=np.int64)
    arr.flags.writeable = False
    return arr

