import json
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sds_irs.cycletype import CycleType, diagonal_embed
from sds_irs.errors import (DegreeTooLarge, InvalidLabel, LevelOutOfRange, LevelTooSmall,
                            ValidationError)
from sds_irs.permutation import Permutation, all_permutations
from sds_irs.sds import (
    IrsLabel, LevelElement, SdsSpec, Simplicity, all_subgroups, element, embed_level,
    in_alt_subgroup, irs_character, level_subgroup, pet_orbit_average, pet_orbit_enumeration,
    psd_min_eigenvalues, sample_irs_points, sample_irs_subgroup, simplicity,
    unique_ergodicity_probe,
)
from sds_irs.subgroups import FullSym, Intransitive, PointwiseStabilizer, normalized_char_exact

from oracles import injective_tuple_fraction

SPEC = SdsSpec((2, 3, 2, 3, 2), "inf_even")
ODD = SdsSpec((2, 3, 3), "event_odd")


def swap(spec, level=0):
    return element(spec, level, Permutation.from_cycles(spec.level_size(level), [(0, 1)]))


def test_spec_validation_and_io(tmp_path):
    assert SPEC.level_size(4) == 72
    assert SPEC.ratio(1, 3) == 6
    with pytest.raises(ValidationError):
        SdsSpec((2, 1), "inf_even")
    with pytest.raises(ValidationError):
        SdsSpec((), "inf_even")
    with pytest.raises(ValidationError):
        SdsSpec((2,), "sometimes")
    with pytest.raises(LevelOutOfRange):
        SPEC.level_size(5)
    path = tmp_path / "spec.json"
    path.write_text(json.dumps({"prefix": [2, 3], "tail": "event_odd"}))
    assert SdsSpec.load(path) == SdsSpec((2, 3), "event_odd")
    path.write_text("{}")
    with pytest.raises(ValidationError):
        SdsSpec.load(path)
    assert SPEC.digest() == SdsSpec.from_dict(SPEC.to_dict()).digest()


@given(st.integers(0, 71))
def test_point_coordinates_roundtrip(idx):
    coords = SPEC.point_coords(idx, 4)
    assert SPEC.point_index(coords) == idx
    # restricting to a lower level is reduction mod |X_n|
    assert SPEC.point_index(coords[:3]) == idx % SPEC.level_size(2)


def test_simplicity():
    assert simplicity(SPEC) is Simplicity.SIMPLE
    assert simplicity(ODD) is Simplicity.NOT_SIMPLE


def test_embed_examples():
    g = swap(SPEC)
    assert embed_level(SPEC, g, 0) == g
    up = embed_level(SPEC, g, 1)
    assert up.ctype == CycleType({2: 3})
    assert up.perm.cycle_type() == up.ctype
    # acts as g on the first coordinate and trivially on the second
    for idx in range(6):
        i0, i1 = SPEC.point_coords(idx, 1)
        assert SPEC.point_coords(up.perm(idx), 1) == (1 - i0, i1)
    with pytest.raises(LevelOutOfRange):
        embed_level(SPEC, up, 0)


@settings(max_examples=30, deadline=None)
@given(st.permutations(list(range(6))), st.integers(1, 4), st.integers(1, 4))
def test_embedding_functorial(p, a, b):
    lo, hi = sorted((a, b))
    g = element(SPEC, 1, Permutation(p))
    direct = embed_level(SPEC, g, hi)
    staged = embed_level(SPEC, embed_level(SPEC, g, lo), hi)
    assert direct.perm == staged.perm
    assert direct.ctype == diagonal_embed(g.ctype, SPEC.ratio(1, hi))


@settings(max_examples=30, deadline=None)
@given(st.permutations(list(range(6))), st.permutations(list(range(6))))
def test_embedding_is_homomorphism(p, q):
    P, Q = Permutation(p), Permutation(q)
    lhs = embed_level(SPEC, element(SPEC, 1, P * Q), 3).perm
    rhs = embed_level(SPEC, element(SPEC, 1, P), 3).perm * embed_level(SPEC, element(SPEC, 1, Q), 3).perm
    assert lhs == rhs


def test_irs_labels():
    assert IrsLabel.parse("sigma:2") == IrsLabel("sigma", 2)
    assert IrsLabel.parse("Alt") == IrsLabel("alt")
    for bad in ("sigma:0", "sigma", "beta:1", "full:2"):
        with pytest.raises(InvalidLabel):
            IrsLabel.parse(bad)
    with pytest.raises(InvalidLabel):
        IrsLabel("sigmatilde", 1).validate(SPEC)
    IrsLabel("sigmatilde", 1).validate(ODD)


def test_character_examples():
    spec = SdsSpec((4, 2), "inf_even")
    g = swap(spec)
    assert irs_character(spec, IrsLabel("sigma", 1), g) == Fraction(1, 2)
    for r in (1, 2, 3):
        assert irs_character(spec, IrsLabel("sigma", r), element(spec, 1, CycleType.identity(8))) == 1
    assert irs_character(spec, IrsLabel("trivial"), g) == 0
    assert irs_character(spec, IrsLabel("full"), g) == 1
    # in the eventually-odd spec the level-0 transposition is odd at every level
    g = swap(ODD)
    assert not in_alt_subgroup(ODD, g)
    assert irs_character(ODD, IrsLabel("sigmatilde", 1), g) == 0
    assert irs_character(ODD, IrsLabel("alt"), g) == 0
    assert irs_character(ODD, IrsLabel("sigma", 1), g) == 0
    with pytest.raises(InvalidLabel):
        irs_character(SPEC, IrsLabel("alt"), swap(SPEC))


def test_alt_membership_stabilizes():
    # k = (3, 2, 3): the transposition becomes even once pushed through the even k_1.
    spec = SdsSpec((3, 2, 3), "event_odd")
    g = swap(spec)
    assert in_alt_subgroup(spec, g)
    assert in_alt_subgroup(spec, embed_level(spec, g, 2))
    assert irs_character(spec, IrsLabel("sigmatilde", 1), g) == Fraction(1, 3)


@pytest.mark.parametrize("r", [1, 2, 3])
def test_character_well_defined_on_limit(r):
    g = swap(SPEC)  # fixes no point of X_0, hence none at any level
    values = {irs_character(SPEC, IrsLabel("sigma", r), embed_level(SPEC, g, n)) for n in range(5)}
    assert values == {Fraction(0)}
    g = element(SPEC, 1, Permutation.from_cycles(6, [(0, 1)]))
    values = {irs_character(SPEC, IrsLabel("sigma", r), embed_level(SPEC, g, n)) for n in range(1, 5)}
    assert values == {Fraction(4, 6) ** r}


def test_pet_examples():
    spec = SdsSpec((4, 2), "inf_even")
    g = swap(spec)
    assert pet_orbit_average(spec, g, 1, 0) == Fraction(1, 2)
    assert pet_orbit_average(spec, g, 2, 0) == Fraction(1, 6)
    assert pet_orbit_enumeration(spec, g, 2, 0) == Fraction(1, 6)
    with pytest.raises(LevelTooSmall):
        pet_orbit_average(SdsSpec((2, 2), "inf_even"), swap(SdsSpec((2, 2), "inf_even")), 3, 0)
    with pytest.raises(DegreeTooLarge):
        pet_orbit_enumeration(SPEC, swap(SPEC), 1, 3)


@pytest.mark.parametrize("r", [1, 2, 3])
def test_pet_matches_pointwise_character_and_oracle(r):
    g = element(SPEC, 1, Permutation.from_cycles(6, [(0, 1)]))
    for n in range(1, 5):
        up = embed_level(SPEC, g, n)
        H = PointwiseStabilizer(up.degree, set(range(r)))
        assert pet_orbit_average(SPEC, g, r, n) == normalized_char_exact(H, up.ctype)
        if up.degree <= 12:
            assert pet_orbit_average(SPEC, g, r, n) == injective_tuple_fraction(
                tuple(up.perm.images), r)


@pytest.mark.parametrize("r", [1, 2, 3])
def test_pet_gap_nonincreasing(r):
    g = element(SPEC, 1, Permutation.from_cycles(6, [(0, 1)]))
    limit = irs_character(SPEC, IrsLabel("sigma", r), g)
    gaps = [abs(pet_orbit_average(SPEC, g, r, n) - limit) for n in range(1, 5)]
    assert all(b <= a for a, b in zip(gaps, gaps[1:]))
    if r == 1:
        assert set(gaps) == {0}  # f/m is preserved exactly by the embedding
    else:
        assert all(b < a for a, b in zip(gaps, gaps[1:]))


def test_sampler_uniform_points():
    # All k equal: the level-n restriction of a product-measure point is uniform on X_n.
    spec = SdsSpec((3, 3), "inf_even")
    n = 100_000
    counts = np.zeros(9)
    for draw in range(n):
        counts[sample_irs_points(spec, 1, 1, seed=21, draw=draw)[0]] += 1
    chi2 = ((counts - n / 9) ** 2 / (n / 9)).sum()
    assert chi2 < 26.1  # 0.999 quantile, 8 degrees of freedom


def test_sampler_points_distinct_and_conjugation_invariant():
    spec = SdsSpec((2, 2, 2), "inf_even")
    w = Permutation.from_cycles(8, [(0, 5, 3)])
    n = 20_000
    hits = hits_conj = 0
    g = Permutation.from_cycles(8, [(3, 5)])
    gw = g.conjugate_by(w)
    for draw in range(n):
        H = sample_irs_subgroup(spec, IrsLabel("sigma", 2), 2, seed=4, draw=draw)
        assert len(H.fixed) == 2
        hits += H.contains(g)
        hits_conj += H.contains(gw)
    # chi(g) = P[g in H] is a class function: the two frequencies estimate the same value
    p1, p2 = hits / n, hits_conj / n
    se = np.sqrt(p1 * (1 - p1) / n + p2 * (1 - p2) / n)
    assert abs(p1 - p2) < 4 * se
    # exact value at level 2 with collision resampling: 6*5/(8*7)
    assert abs(p1 - 30 / 56) < 4 * np.sqrt(p1 * (1 - p1) / n)


def test_sampler_rejects():
    with pytest.raises(InvalidLabel):
        sample_irs_subgroup(SPEC, IrsLabel("full"), 1, 0)
    with pytest.raises(InvalidLabel):
        sample_irs_subgroup(SPEC, IrsLabel("sigmatilde", 1), 1, 0)
    with pytest.raises(LevelTooSmall):
        sample_irs_points(SPEC, 2, 0, 0)
    H = sample_irs_subgroup(ODD, IrsLabel("sigmatilde", 1), 1, 3)
    assert H.parity == "-"


@pytest.mark.parametrize("r", [1, 2, 3])
def test_gram_matrices_psd(r):
    mins = psd_min_eigenvalues(SPEC, IrsLabel("sigma", r), 1, sets=20, size=6, seed=r)
    assert mins.min() >= -1e-9


def test_gram_psd_for_sigmatilde():
    mins = psd_min_eigenvalues(ODD, IrsLabel("sigmatilde", 2), 1, sets=20, size=6, seed=3)
    assert mins.min() >= -1e-9


def test_subgroup_counts():
    assert len(all_subgroups(3)) == 6
    assert len(all_subgroups(4)) == 30
    with pytest.raises(DegreeTooLarge):
        all_subgroups(6)


def _stabilizer_rows(m, point):
    return [i for i, row in enumerate(all_permutations(m)) if row[point] == point]


def test_probe_examples():
    spec = SdsSpec((2, 2), "inf_even")
    H = PointwiseStabilizer(4, {0})
    # L = all of G_0 with H = Sym(4): every conjugate contains G_0.
    full_small = level_subgroup(spec, 0, range(2))
    assert unique_ergodicity_probe(spec, FullSym(4), 1, 0, full_small) == 1
    # L = G_0 itself never equals g H g^-1 n G_0 = 1, since the level-0 swap moves every point.
    assert unique_ergodicity_probe(spec, H, 1, 0, full_small) == 0
    trivial = level_subgroup(spec, 0, [0])
    assert unique_ergodicity_probe(spec, H, 1, 0, trivial) == 1
    # L = stabilizer of a point of X_1 inside G_1: the conjugate g H g^-1 fixes g(0),
    # so exactly the 6 elements with g(0) = 0 give equality, out of 24.
    stab0 = level_subgroup(spec, 1, _stabilizer_rows(4, 0))
    assert unique_ergodicity_probe(spec, H, 1, 1, stab0) == Fraction(6, 24)


def test_probe_conjugate_subgroups_agree():
    spec = SdsSpec((2, 2), "inf_even")
    H = Intransitive(4, {0, 1})
    Hw = H.conjugate(Permutation.from_cycles(4, [(1, 2, 3)]))
    for m_small in (0, 1):
        size = spec.level_size(m_small)
        for rows in all_subgroups(size):
            L = level_subgroup(spec, m_small, rows)
            a = unique_ergodicity_probe(spec, H, 1, m_small, L)
            assert a == unique_ergodicity_probe(spec, Hw, 1, m_small, L)


def test_probe_sampled_mode():
    spec = SdsSpec((2, 2), "inf_even")
    stab0 = level_subgroup(spec, 1, _stabilizer_rows(4, 0))
    rep = unique_ergodicity_probe(spec, PointwiseStabilizer(4, {0}), 1, 1, stab0,
                                  mode="sampled", trials=20_000, seed=2)
    lo, hi = rep.ci
    assert lo <= 0.25 <= hi


def test_level_element_checks():
    with pytest.raises(ValidationError):
        element(SPEC, 1, CycleType({2: 1}))
    with pytest.raises(ValidationError):
        LevelElement(0)
