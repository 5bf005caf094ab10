"""Seeded, chunked Monte Carlo driver and frequency reports."""

from __future__ import annotations

import math
from collections.abc import Callable
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .permutation import CHUNK, random_permutations

Z95 = 1.96


def wilson_interval(hits: int, trials: int, z: float = Z95) -> tuple[float, float]:
    if trials <= 0:
        return 0.0, 1.0
    p = hits / trials
    denom = 1.0 + z * z / trials
    centre = (p + z * z / (2 * trials)) / denom
    half = z * math.sqrt(p * (1 - p) / trials + z * z / (4 * trials * trials)) / denom
    return max(0.0, centre - half), min(1.0, centre + half)


def chunk_sizes(trials: int) -> list[int]:
    full, rest = divmod(trials, CHUNK)
    return [CHUNK] * full + ([rest] if rest else [])


def map_chunks(seed: int, trials: int, m: int, fn: Callable[[np.ndarray], object],
               workers: int = 1) -> list:
    """Apply ``fn`` to each chunk of uniform permutations; results in chunk order.

    Chunk ``c`` always uses the same substream, so the output does not depend
    on ``workers``.
    """
    sizes = chunk_sizes(trials)

    def run(c):
        return fn(random_permutations(seed, c, sizes[c], m))

    if workers <= 1 or len(sizes) <= 1:
        return [run(c) for c in range(len(sizes))]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(run, range(len(sizes))))


@dataclass(frozen=True)
class TrialReport:
    subgroup: str
    cycle_type: str
    trials: int
    hits: int
    seed: int | None
    exact: Fraction | None = None

    @property
    def freq(self) -> float:
        return self.hits / self.trials

    @property
    def ci(self) -> tuple[float, float]:
        return wilson_interval(self.hits, self.trials)

    @property
    def radius(self) -> float:
        lo, hi = self.ci
        return (hi - lo) / 2

    @property
    def mean(self) -> float:
        return self.freq

    @property
    def variance(self) -> float:
        p = self.freq
        return p * (1 - p) * self.trials / max(self.trials - 1, 1)

    def contains_exact(self) -> bool | None:
        if self.exact is None:
            return None
        lo, hi = self.ci
        return lo <= float(self.exact) <= hi

    def merge(self, other: TrialReport) -> TrialReport:
        if (self.subgroup, self.cycle_type) != (other.subgroup, other.cycle_type):
            raise ValueError("can only merge reports of the same experiment")
        return TrialReport(
            self.subgroup,
            self.cycle_type,
            self.trials + other.trials,
            self.hits + other.hits,
            self.seed if self.seed == other.seed else None,
            self.exact if self.exact == other.exact else None,
        )

    def to_dict(self) -> dict:
        lo, hi = self.ci
        return {
            "subgroup": self.subgroup,
            "cycle_type": self.cycle_type,
            "trials": self.trials,
            "hits": self.hits,
            "freq": self.freq,
            "ci_low": lo,
            "ci_high": hi,
            "exact": self.exact,
            "seed": self.seed,
        }
