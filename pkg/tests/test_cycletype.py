import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sds_irs.cycletype import (
    CycleType, LogBound, all_cycle_types, centralizer_order, class_size, class_size_lower_bound,
    class_size_witness, diagonal_embed, falling_factorial, log_class_size, log_factorial, sign,
    stirling_envelope, wreath_order, wreath_witness,
)
from sds_irs.errors import IdentityType, ValidationError

from oracles import type_census

cycle_types = st.dictionaries(st.integers(1, 6), st.integers(1, 4), min_size=1, max_size=4).map(
    CycleType)


def as_key(t: CycleType):
    return tuple(t.items())


def test_basic_fields():
    t = CycleType({2: 1, 1: 2})
    assert (t.degree, t.fixed_points, t.total_cycles, t.nontrivial_cycles) == (4, 2, 3, 1)
    assert str(t) == "2^1 1^2"
    assert CycleType.parse("2^1 1^2") == t
    assert CycleType.parse("3 1^2") == CycleType({3: 1, 1: 2})
    assert CycleType({3: 2}).fixed_points == 0


def test_zero_multiplicity_is_dropped():
    assert CycleType({2: 1, 3: 0}).parts == {2: 1}


@pytest.mark.parametrize("bad", [{}, {0: 1}, {2: -1}, {1: 0}])
def test_rejects_bad_types(bad):
    with pytest.raises(ValidationError):
        CycleType(bad)


@pytest.mark.parametrize("text", ["", "2^", "a^1", "2^1^1"])
def test_parse_rejects(text):
    with pytest.raises(ValidationError):
        CycleType.parse(text)


@pytest.mark.parametrize("parts, size", [({2: 1, 1: 1}, 3), ({1: 5}, 1), ({2: 2}, 3)])
def test_class_size_examples(parts, size):
    assert class_size(CycleType(parts)) == size


@pytest.mark.parametrize("n", range(1, 8))
def test_class_size_matches_enumeration(n):
    census = type_census(n)
    types = list(all_cycle_types(n))
    assert {as_key(t) for t in types} == set(census)
    for t in types:
        assert class_size(t) == census[as_key(t)]
    assert sum(class_size(t) for t in types) == math.factorial(n)


@given(cycle_types)
def test_orbit_stabilizer(t):
    assert class_size(t) * centralizer_order(t) == math.factorial(t.degree)


def test_embed_examples():
    t = CycleType({2: 1, 1: 1})
    assert diagonal_embed(t, 1) == t
    assert diagonal_embed(t, 5) == CycleType({2: 5, 1: 5})
    with pytest.raises(ValidationError):
        diagonal_embed(t, 0)


@given(cycle_types, st.integers(1, 20), st.integers(1, 20))
def test_embed_composes(t, a, b):
    assert diagonal_embed(diagonal_embed(t, a), b) == diagonal_embed(t, a * b)
    assert diagonal_embed(t, a).degree == a * t.degree


@given(cycle_types, st.integers(1, 30))
def test_sign_of_embedding(t, ell):
    assert sign(diagonal_embed(t, ell)) == sign(t) ** ell


def test_sign_examples():
    assert sign(CycleType({2: 1, 1: 1})) == -1
    assert sign(CycleType.identity(7)) == 1
    assert sign(CycleType({3: 2})) == 1


def test_falling_factorial():
    assert falling_factorial(5, 2) == 20
    assert falling_factorial(3, 0) == 1
    assert falling_factorial(2, 3) == 0


def test_stirling_examples():
    lo, hi = stirling_envelope(1)
    assert math.exp(hi.value) == pytest.approx(1.0, rel=1e-12)
    assert math.exp(-lo.value) == pytest.approx(math.e / math.sqrt(2 * math.pi), rel=1e-12)
    lo, hi = stirling_envelope(10)
    assert lo.value <= math.log(3628800) <= hi.value
    lo, hi = stirling_envelope(10_000)
    gap = math.log(math.e / math.sqrt(2 * math.pi))
    assert hi.value - lo.value == pytest.approx(gap, abs=1e-9)
    assert (lo.kind, hi.kind) == ("lower", "upper")


def test_log_factorial_switches_to_lgamma():
    assert log_factorial(100) == pytest.approx(math.lgamma(101), rel=1e-14)
    assert log_factorial(5000) == pytest.approx(math.lgamma(5001), rel=1e-14)


def test_logbound_kinds():
    a, b = LogBound(2.0, "lower"), LogBound(1.0, "upper")
    assert (a - b) == LogBound(1.0, "lower")
    assert (-a).kind == "upper"
    with pytest.raises(ValueError):
        a + b


def test_lower_bound_examples():
    t = CycleType({2: 1, 1: 2})
    exact = math.log(class_size(CycleType({2: 10, 1: 20})))
    assert class_size_lower_bound(t, 10).value <= exact
    assert class_size_lower_bound(CycleType({2: 1}), 1).value <= 0.0
    assert class_size_witness(CycleType({3: 1, 1: 1})).exponent == 2


def test_lower_bound_rejects_identity():
    with pytest.raises(IdentityType):
        class_size_lower_bound(CycleType.identity(4), 3)


@settings(max_examples=60)
@given(cycle_types.filter(lambda t: not t.is_identity), st.integers(1, 60))
def test_lower_bound_holds(t, ell):
    exact = math.log(class_size(diagonal_embed(t, ell)))
    assert class_size_lower_bound(t, ell).value <= exact


def test_log_class_size_above_exact_limit():
    t = diagonal_embed(CycleType({2: 1, 1: 2}), 1000)
    assert log_class_size(t) == pytest.approx(math.log(class_size(t)), rel=1e-12)


@pytest.mark.parametrize("a, d", [(4, 2), (6, 2), (6, 3), (9, 3)])
def test_wreath_witness_is_upper_bound(a, d):
    w = wreath_witness(a, d)
    for ell in list(range(1, 60)) + [200, 1000]:
        if (a * ell) % d:
            continue
        exact = math.log(wreath_order(d, a * ell // d))
        assert w.log_bound(ell) >= exact
