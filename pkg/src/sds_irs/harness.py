"""Block-splitting and intransitive experiments, Chebyshev thresholds, bound crossovers.

Fix ``g`` of degree ``m`` with ``cm`` nontrivial cycles, ``Z`` one point from
each nontrivial cycle, ``z0 in Z`` and ``y0 = g(z0)``.  For a uniform ``s``:

* block experiment (invariant set ``U``, block system on ``T = [m] - U`` with
  blocksize ``d``): ``J(s) = {z in Z - {z0} : s(z) in B0, s(g z) not in C0}``
  where ``B0``, ``C0`` are the blocks of ``s(z0)``, ``s(y0)``;
* intransitive experiment (``|U| = r``): ``I(s) = {z in Z : s(z) in U, s(g z) not in U}``.

A nonzero count certifies that ``s g s^-1`` leaves the structure (block system,
resp. ``U``) and so is not in the corresponding subgroup.

Concrete layout: ``g`` is the canonical permutation (cycles consecutive,
longest first), ``Z`` the least points of the nontrivial cycles,
``z0 = min Z``; ``T`` is ``0..m-r-1`` cut into consecutive blocks and ``U`` is
``m-r..m-1``.  All quantities are invariant under relabelling, so this choice
only fixes the random stream.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from . import _kernels
from .cycletype import (CycleType, class_size_witness, diagonal_embed, wreath_witness)
from .errors import (DegreeTooLarge, DegreeTooSmall, ExponentConditionFailed, IdentityType,
                     NonpositiveInput, ValidationError)
from .montecarlo import map_chunks, wilson_interval
from .permutation import BRUTE_FORCE_MAX_DEGREE, Permutation, all_permutations, \
    uniform_random_permutation

ATTAINMENT = 0.99


def type_for_fraction(c: Fraction, m: int) -> CycleType:
    """The diagonal type of degree ``m`` built from ``c.numerator`` 2-cycles in Sym(c.denominator)."""
    c = Fraction(c)
    if not 0 < c <= Fraction(1, 2):
        raise ValidationError(f"c must satisfy 0 < c <= 1/2, got {c}")
    a, k = c.denominator, c.numerator
    if m % a:
        raise ValidationError(f"m = {m} is not a multiple of the base degree {a} for c = {c}")
    base = CycleType({2: k, 1: a - 2 * k})
    return diagonal_embed(base, m // a)


@dataclass(frozen=True)
class _Layout:
    perm: Permutation
    zs: np.ndarray  # Z without z0 for the block experiment, all of Z otherwise
    gzs: np.ndarray
    z0: int
    y0: int


def _layout(g: CycleType, drop_z0: bool) -> _Layout:
    perm = Permutation.canonical(g)
    reps = sorted(min(cyc) for cyc in perm.cycles() if len(cyc) > 1)
    z0 = reps[0]
    zs = np.array(reps[1:] if drop_z0 else reps, dtype=np.int64)
    return _Layout(perm, zs, perm.images[zs], z0, perm(z0))


@dataclass(frozen=True)
class BlockExperiment:
    m: int
    d: int
    r: int
    g: CycleType

    def __post_init__(self):
        if self.g.degree != self.m:
            raise ValidationError(f"g has degree {self.g.degree}, expected m = {self.m}")
        if self.g.is_identity:
            raise IdentityType("the experiment needs g != 1")
        if not 0 <= self.r < self.m:
            raise ValidationError("need 0 <= r < m")
        t = self.m - self.r
        if self.d < 2 or self.d > t or t % self.d:
            raise ValidationError(f"blocksize d = {self.d} must be >= 2 and divide m - r = {t}")

    @classmethod
    def from_fraction(cls, m: int, d: int, c, r: int = 0) -> BlockExperiment:
        return cls(m, d, r, type_for_fraction(Fraction(c), m))

    @property
    def c(self) -> Fraction:
        return Fraction(self.g.nontrivial_cycles, self.m)

    @property
    def n_reps(self) -> int:
        """``|Z| = cm``."""
        return self.g.nontrivial_cycles

    def labels(self) -> np.ndarray:
        lab = np.full(self.m, -1, dtype=np.int64)
        lab[: self.m - self.r] = np.arange(self.m - self.r) // self.d
        return lab

    def layout(self) -> _Layout:
        return _layout(self.g, drop_z0=True)

    def counts(self, perms: np.ndarray):
        lay = self.layout()
        return _kernels.count_block_split(perms, lay.zs, lay.gzs, lay.z0, lay.y0, self.labels())

    def to_dict(self) -> dict:
        return {"kind": "block", "m": self.m, "d": self.d, "r": self.r, "g": str(self.g),
                "c": self.c}


@dataclass(frozen=True)
class IntransitiveExperiment:
    m: int
    r: int
    g: CycleType

    def __post_init__(self):
        if self.g.degree != self.m:
            raise ValidationError(f"g has degree {self.g.degree}, expected m = {self.m}")
        if self.g.is_identity:
            raise IdentityType("the experiment needs g != 1")
        if not 0 <= 2 * self.r <= self.m:
            raise ValidationError(f"need 0 <= r <= m/2, got r = {self.r}")

    @classmethod
    def from_fraction(cls, m: int, r: int, c) -> IntransitiveExperiment:
        return cls(m, r, type_for_fraction(Fraction(c), m))

    @property
    def c(self) -> Fraction:
        return Fraction(self.g.nontrivial_cycles, self.m)

    @property
    def n_reps(self) -> int:
        return self.g.nontrivial_cycles

    def umask(self) -> np.ndarray:
        mask = np.zeros(self.m, dtype=bool)
        mask[self.m - self.r:] = True
        return mask

    def layout(self) -> _Layout:
        return _layout(self.g, drop_z0=False)

    def counts(self, perms: np.ndarray):
        lay = self.layout()
        return _kernels.count_intransitive(perms, lay.zs, lay.gzs, self.umask())

    def to_dict(self) -> dict:
        return {"kind": "intransitive", "m": self.m, "r": self.r, "g": str(self.g), "c": self.c}


def experiment_from_dict(data: dict):
    """Build an experiment from ``{"kind", "m", "d"|"r", "c" | "type"[, "ell"]}``."""
    try:
        kind = data["kind"]
        m = int(data["m"])
        if "type" in data:
            g = CycleType.parse(data["type"])
            g = diagonal_embed(g, int(data.get("ell", m // g.degree)))
        else:
            g = type_for_fraction(Fraction(str(data["c"])), m)
        if kind == "block":
            return BlockExperiment(m, int(data["d"]), int(data.get("r", 0)), g)
        if kind == "intransitive":
            return IntransitiveExperiment(m, int(data["r"]), g)
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, ValidationError):
            raise
        raise ValidationError(f"bad experiment definition: {exc}") from None
    raise ValidationError(f"unknown experiment kind {kind!r}")


# --------------------------------------------------------------------------
# single draws and witnesses


def sample_J(exp: BlockExperiment, seed: int, index: int = 0) -> int:
    s = uniform_random_permutation(exp.m, seed, index)
    counts, _ = exp.counts(s.images[None, :])
    return int(counts[0])


def sample_I(exp: IntransitiveExperiment, seed: int, index: int = 0) -> int:
    s = uniform_random_permutation(exp.m, seed, index)
    return int(exp.counts(s.images[None, :])[0])


def block_split_witness(exp: BlockExperiment, s: Permutation) -> bool:
    """Does ``s g s^-1`` send the block ``B0`` into at least two blocks?"""
    lay = exp.layout()
    lab = exp.labels()
    b0 = lab[s(lay.z0)]
    if b0 < 0:
        return False
    conj = lay.perm.conjugate_by(s)
    image_labels = {int(lab[conj(x)]) for x in np.flatnonzero(lab == b0)}
    return len(image_labels) >= 2


# --------------------------------------------------------------------------
# exact moments


@dataclass(frozen=True)
class ExactMoments:
    """Exact moments of ``|J(s)|`` (or ``|I(s)|``), with the conditional pieces for ``J``."""

    mean: Fraction
    second: Fraction
    p_event: Fraction = Fraction(0)
    p_same: Fraction | None = None
    p_diff: Fraction | None = None
    cond_mean_same: Fraction | None = None
    cond_mean_diff: Fraction | None = None
    cond_second_same: Fraction | None = None
    cond_second_diff: Fraction | None = None

    @property
    def variance(self) -> Fraction:
        return self.second - self.mean**2


def exact_conditional_moments_J(exp: BlockExperiment) -> ExactMoments:
    """Conditional first and second moments of ``|J(s)|`` on the three events.

    With ``N = cm``, on ``C0 = B0`` (outside ``E``)::

        E[J]   = (N-1) (d-2)(m-d) / ((m-2)(m-3))
        E[J^2] = E[J] + (N-1)(N-2) (d-2)(d-3)(m-d)(m-d-1) / ((m-2)(m-3)(m-4)(m-5))

    and on ``C0 != B0``::

        E[J]   = (N-1) (d-1)(m-d-2) / ((m-2)(m-3))
        E[J^2] = E[J] + (N-1)(N-2) (d-1)(d-2)(m-d-3)(m-d-4) / ((m-2)(m-3)(m-4)(m-5))

    On ``E`` the count is 0.  Moments on events of probability zero are None.
    """
    m, d, r, n = exp.m, exp.d, exp.r, exp.n_reps
    if m < 6:
        raise DegreeTooSmall(f"the moment formulas need m >= 6, got {m}")
    den2 = (m - 2) * (m - 3)
    den4 = den2 * (m - 4) * (m - 5)
    pairs = (n - 1) * (n - 2)
    mean_same = Fraction((n - 1) * (d - 2) * (m - d), den2)
    mean_diff = Fraction((n - 1) * (d - 1) * (m - d - 2), den2)
    second_same = mean_same + Fraction(pairs * (d - 2) * (d - 3) * (m - d) * (m - d - 1), den4)
    second_diff = mean_diff + Fraction(
        pairs * (d - 1) * (d - 2) * (m - d - 3) * (m - d - 4), den4)
    t = m - r
    p_same = Fraction(t * (d - 1), m * (m - 1))
    p_diff = Fraction(t * (t - d), m * (m - 1))
    p_event = 1 - p_same - p_diff
    if p_diff == 0:
        mean_diff = second_diff = None
    return ExactMoments(
        mean=p_same * mean_same + p_diff * (mean_diff or 0),
        second=p_same * second_same + p_diff * (second_diff or 0),
        p_event=p_event,
        p_same=p_same,
        p_diff=p_diff,
        cond_mean_same=mean_same,
        cond_mean_diff=mean_diff,
        cond_second_same=second_same,
        cond_second_diff=second_diff,
    )


def exact_moments_I(exp: IntransitiveExperiment) -> ExactMoments:
    """``E|I| = N r(m-r)/(m(m-1))``; the pair term uses ``r(r-1)(m-r)(m-r-1)/m^(4)``."""
    m, r, n = exp.m, exp.r, exp.n_reps
    mean = Fraction(n * r * (m - r), m * (m - 1))
    if n >= 2:
        pair = Fraction(n * (n - 1) * r * (r - 1) * (m - r) * (m - r - 1),
                        m * (m - 1) * (m - 2) * (m - 3))
    else:
        pair = Fraction(0)
    return ExactMoments(mean=mean, second=mean + pair)


def leading_term(exp) -> Fraction:
    """``c d (1 - d/m)`` for block experiments, ``c r (1 - r/m)`` for intransitive ones."""
    size = exp.d if isinstance(exp, BlockExperiment) else exp.r
    return exp.c * size * (1 - Fraction(size, exp.m))


@dataclass(frozen=True)
class EnumeratedMoments:
    """Moments over all of Sym(m); ``by_category`` maps category -> (P, E[X|cat], E[X^2|cat])."""

    mean: Fraction
    second: Fraction
    p_positive: Fraction
    by_category: dict = field(default_factory=dict)


def enumerate_moments(exp) -> EnumeratedMoments:
    """Exact moments by running the counting kernel over every ``s in Sym(m)``."""
    if exp.m > BRUTE_FORCE_MAX_DEGREE:
        raise DegreeTooLarge(f"enumeration needs m <= {BRUTE_FORCE_MAX_DEGREE}")
    perms = all_permutations(exp.m)
    total = perms.shape[0]
    if isinstance(exp, BlockExperiment):
        counts, cat = exp.counts(perms)
    else:
        counts, cat = exp.counts(perms), np.zeros(total, dtype=np.int8)
    by_cat = {}
    for code in np.unique(cat):
        sel = counts[cat == code]
        by_cat[int(code)] = (Fraction(sel.size, total), Fraction(int(sel.sum()), sel.size),
                             Fraction(int((sel * sel).sum()), sel.size))
    return EnumeratedMoments(
        mean=Fraction(int(counts.sum()), total),
        second=Fraction(int((counts * counts).sum()), total),
        p_positive=Fraction(int(np.count_nonzero(counts)), total),
        by_category=by_cat,
    )


# --------------------------------------------------------------------------
# Chebyshev


@dataclass(frozen=True)
class ChebyshevVerdict:
    """``K = sqrt(mu/sigma)``, ``L = mu - K sigma``; ``P[N > L] >= 1 - 1/K^2``.

    When ``K > 1`` we have ``L > 0`` and the bound transfers to ``P[N > 0]``.
    """

    mu: float
    sigma: float
    K: float
    L: float
    lower_bound_P: float
    conclusive: bool

    def to_dict(self) -> dict:
        return dict(mu=self.mu, sigma=self.sigma, K=self.K, L=self.L,
                    lower_bound_P=self.lower_bound_P, conclusive=self.conclusive)


def chebyshev_threshold(mu: float, sigma: float) -> ChebyshevVerdict:
    mu, sigma = float(mu), float(sigma)
    if not (mu > 0 and sigma > 0):
        raise NonpositiveInput(f"mu and sigma must be positive, got mu={mu}, sigma={sigma}")
    K = math.sqrt(mu / sigma)
    return ChebyshevVerdict(mu, sigma, K, mu - K * sigma, 1.0 - 1.0 / (K * K), K > 1.0)


def chebyshev_from_moments(ex: ExactMoments) -> ChebyshevVerdict | None:
    var = ex.variance
    if ex.mean <= 0 or var <= 0:
        return None
    return chebyshev_threshold(float(ex.mean), math.sqrt(var))


# --------------------------------------------------------------------------
# Monte Carlo moment reports


@dataclass(frozen=True)
class MomentReport:
    experiment: dict
    trials: int
    seed: int
    exact: ExactMoments | None
    leading: Fraction
    total: int  # sum of counts
    total_sq: int
    positives: int
    events: int  # trials on the event E (block experiments)
    chebyshev: ChebyshevVerdict | None

    @property
    def empirical_mean(self) -> float:
        return self.total / self.trials

    @property
    def empirical_variance(self) -> float:
        n = self.trials
        if n < 2:
            return 0.0
        return (self.total_sq - self.total * self.total / n) / (n - 1)

    @property
    def mean_radius(self) -> float:
        """Half-width of the 95% normal interval for the mean."""
        return 1.96 * math.sqrt(self.empirical_variance / self.trials)

    @property
    def p_positive(self) -> float:
        return self.positives / self.trials

    @property
    def positive_ci(self) -> tuple[float, float]:
        return wilson_interval(self.positives, self.trials)

    def merge(self, other: MomentReport) -> MomentReport:
        if self.experiment != other.experiment:
            raise ValueError("can only merge reports of the same experiment")
        return MomentReport(
            self.experiment, self.trials + other.trials,
            self.seed if self.seed == other.seed else None,
            self.exact, self.leading, self.total + other.total, self.total_sq + other.total_sq,
            self.positives + other.positives, self.events + other.events, self.chebyshev)

    def to_dict(self) -> dict:
        ex = self.exact
        lo, hi = self.positive_ci
        out = {
            "experiment": self.experiment,
            "trials": self.trials,
            "seed": self.seed,
            "leading_term": self.leading,
            "leading_term_float": float(self.leading),
        }
        if ex is not None:
            out.update({
                "exact_mean": ex.mean,
                "exact_second_moment": ex.second,
                "exact_variance": ex.variance,
                "exact_P_E": ex.p_event,
                "exact_conditional_E1": ex.cond_mean_same,
                "exact_conditional_E2": ex.cond_mean_diff,
                "exact_conditional_second_same": ex.cond_second_same,
                "exact_conditional_second_diff": ex.cond_second_diff,
            })
        out.update({
            "empirical_mean": self.empirical_mean,
            "empirical_variance": self.empirical_variance,
            "mean_ci_radius": self.mean_radius,
            "empirical_P_positive": self.p_positive,
            "P_positive_ci_low": lo,
            "P_positive_ci_high": hi,
            "empirical_P_E": self.events / self.trials,
            "chebyshev": None if self.chebyshev is None else self.chebyshev.to_dict(),
        })
        return out


def _exact_for(exp) -> ExactMoments | None:
    if isinstance(exp, IntransitiveExperiment):
        return exact_moments_I(exp)
    if exp.m < 6:
        return None
    return exact_conditional_moments_J(exp)


def run_moments(exp, trials: int, seed: int, workers: int = 1) -> MomentReport:
    """Monte Carlo moments of ``|J(s)|`` or ``|I(s)|`` next to their exact values."""
    if trials < 1:
        raise ValidationError("trials must be >= 1")
    block = isinstance(exp, BlockExperiment)

    def chunk(perms):
        if block:
            counts, cat = exp.counts(perms)
            events = int(np.count_nonzero(cat == _kernels.CAT_E))
        else:
            counts, events = exp.counts(perms), 0
        return (int(counts.sum()), int((counts * counts).sum()),
                int(np.count_nonzero(counts)), events)

    parts = map_chunks(seed, trials, exp.m, chunk, workers)
    total, total_sq, positives, events = (sum(col) for col in zip(*parts))
    ex = _exact_for(exp)
    cheb = chebyshev_from_moments(ex) if ex is not None else None
    return MomentReport(exp.to_dict(), trials, seed, ex, leading_term(exp),
                        total, total_sq, positives, events, cheb)


# --------------------------------------------------------------------------
# trends


@dataclass(frozen=True)
class TrendRow:
    param: int
    report: MomentReport
    low_power: bool

    def to_dict(self) -> dict:
        lo, hi = self.report.positive_ci
        ex = self.report.exact
        cheb = self.report.chebyshev
        return {
            "param": self.param,
            "trials": self.report.trials,
            "hits": self.report.positives,
            "freq": self.report.p_positive,
            "ci_low": lo,
            "ci_high": hi,
            "exact_mean": None if ex is None else ex.mean,
            "chebyshev_bound": None if cheb is None or not cheb.conclusive else cheb.lower_bound_P,
            "low_power": self.low_power,
        }


@dataclass(frozen=True)
class TrendReport:
    kind: str
    rows: list[TrendRow]
    seed: int

    @property
    def monotone_within_ci(self) -> bool:
        """Each frequency is at least the previous one, up to overlapping Wilson intervals."""
        for prev, cur in zip(self.rows, self.rows[1:]):
            if cur.report.positive_ci[1] < prev.report.positive_ci[0]:
                return False
        return True

    @property
    def attained(self) -> bool:
        return bool(self.rows) and self.rows[-1].report.p_positive >= ATTAINMENT

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "seed": self.seed,
            "rows": [row.to_dict() for row in self.rows],
            "monotone_within_ci": self.monotone_within_ci,
            "attained": self.attained,
            "threshold": ATTAINMENT,
        }


def probability_trend(experiments: list, trials: int, seed: int, workers: int = 1) -> TrendReport:
    """Empirical ``P[count > 0]`` across a family ordered by ``d`` (or ``r``)."""
    if not experiments:
        raise ValidationError("empty experiment family")
    block = isinstance(experiments[0], BlockExperiment)
    rows = []
    for exp in experiments:
        param = exp.d if block else exp.r
        low = param <= 3 if block else param <= 1
        rows.append(TrendRow(param, run_moments(exp, trials, seed, workers), low))
    return TrendReport("block" if block else "intransitive", rows, seed)


# --------------------------------------------------------------------------
# vanishing crossover


@dataclass(frozen=True)
class PrimitiveCase:
    """``|H| < 4^(a ell)`` for primitive ``H`` not containing Alt."""


@dataclass(frozen=True)
class WreathCase:
    d: int


@dataclass(frozen=True)
class CrossoverResult:
    ell_star: int
    log_ratio_at_star: float
    log_ratio_at_double: float
    log_epsilon: float
    constants: dict

    @property
    def ratio_at_star(self) -> float:
        return math.exp(self.log_ratio_at_star)

    @property
    def ratio_at_double(self) -> float:
        return math.exp(self.log_ratio_at_double)

    def to_dict(self) -> dict:
        return {
            "ell_star": self.ell_star,
            "ratio_at_star": self.ratio_at_star,
            "ratio_at_double": self.ratio_at_double,
            "log_ratio_at_star": self.log_ratio_at_star,
            "log_ratio_at_double": self.log_ratio_at_double,
            "constants": self.constants,
        }


def _log_ratio_fn(g: CycleType, case):
    """``ell -> log(upper bound on |H| / lower bound on |g^S|)`` and its (C, alpha, beta)."""
    lower = class_size_witness(g)
    a = g.degree
    if isinstance(case, PrimitiveCase):
        const = -lower.log_r
        alpha = a * math.log(4.0) - lower.log_s
        beta = float(lower.exponent)
        consts = {"log_r": lower.log_r, "log_s": lower.log_s, "exponent": lower.exponent}
    elif isinstance(case, WreathCase):
        if Fraction(lower.exponent) <= Fraction(a, case.d):
            raise ExponentConditionFailed(
                f"need a - sum k_i > a/d: {lower.exponent} <= {Fraction(a, case.d)}")
        upper = wreath_witness(a, case.d)
        const = upper.log_b - lower.log_r
        alpha = upper.log_c - lower.log_s
        beta = float(lower.exponent - upper.exponent)
        consts = {"log_r": lower.log_r, "log_s": lower.log_s, "exponent": lower.exponent,
                  "log_b": upper.log_b, "log_c": upper.log_c, "wreath_exponent": upper.exponent}
    else:
        raise ValidationError(f"unknown case {case!r}")

    def f(ell: float) -> float:
        return const + alpha * ell - beta * ell * math.log(ell)

    return f, alpha, beta, consts


def vanishing_crossover(g: CycleType, case, epsilon: float) -> CrossoverResult:
    """Least ``ell*`` with bound ratio ``< epsilon`` for every ``ell >= ell*``.

    The log ratio is ``C + alpha ell - beta ell log ell`` with ``beta > 0``, a
    concave function; the search starts at its maximum, doubles until the
    ratio falls below ``epsilon`` and then bisects.
    """
    if g.is_identity:
        raise IdentityType("the crossover needs g != 1")
    if not epsilon > 0:
        raise NonpositiveInput("epsilon must be positive")
    f, alpha, beta, consts = _log_ratio_fn(g, case)
    log_eps = math.log(epsilon)
    peak = math.exp(min(alpha / beta - 1.0, 700.0))
    if peak < 1.0:
        top = 1
    else:
        lo = math.floor(peak)
        top = lo if f(lo) >= f(lo + 1) else lo + 1
    if f(top) < log_eps:
        return CrossoverResult(1, f(1), f(2), log_eps, consts)
    lo, hi = top, 2 * top
    while f(hi) >= log_eps:
        lo, hi = hi, 2 * hi
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if f(mid) >= log_eps:
            lo = mid
        else:
            hi = mid
    return CrossoverResult(hi, f(hi), f(2 * hi), log_eps, consts)
