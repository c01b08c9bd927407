"""Property suites; derandomized through the ``fixed`` Hypothesis profile in conftest."""

from fractions import Fraction as F

from hypothesis import given
from hypothesis import strategies as st

from mixfair.instance import (
    Allocation,
    Instance,
    dumps_allocation,
    dumps_instance,
    dumps_utilities,
    parse_allocation,
    parse_instance,
    parse_utilities,
)
from mixfair.objective import ALL_OBJECTIVES, DECMIN, INCMAX, NASH_WELFARE, compare, power_sum
from mixfair.oracle import ThreeDM, check_exchange_axiom, dumps_3dm, parse_3dm
from mixfair.polymatroid import CoverageFn

rationals = st.fractions(min_value=0, max_value=6, max_denominator=12)
vectors = st.lists(rationals, min_size=1, max_size=6)
pairs = st.integers(1, 6).flatmap(lambda n: st.tuples(*[st.lists(rationals, min_size=n, max_size=n)] * 2))


@st.composite
def coverage_fns(draw, max_agents=4, max_items=5):
    n = draw(st.integers(1, max_agents))
    masks = draw(st.lists(st.integers(1, (1 << n) - 1), max_size=max_items))
    return CoverageFn(tuple(range(n)), tuple(frozenset(i for i in range(n) if m >> i & 1) for m in masks))


@st.composite
def instances(draw):
    n = draw(st.integers(1, 5))
    desire = st.lists(st.integers(0, n - 1), min_size=1, unique=True).map(lambda d: tuple(sorted(d)))
    names = draw(st.dictionaries(st.sampled_from([str(i) for i in range(n)]), st.text(max_size=5), max_size=n))
    return Instance(n, tuple(draw(st.lists(desire, max_size=4))), tuple(draw(st.lists(desire, max_size=4))), names)


@given(coverage_fns())
def test_exchange_axiom(f):
    rep = check_exchange_axiom(f)
    assert rep.ok, rep.violations[:3]


@given(vectors, st.integers(2, 5), st.data())
def test_transfer_improves_power_sum(u, p, data):
    i, j = data.draw(st.lists(st.integers(0, len(u)), min_size=2, max_size=2, unique=True))
    u = list(u) + [F(0)]
    gap = data.draw(st.fractions(min_value=F(1, 12), max_value=4, max_denominator=12))
    u[i] = u[j] + gap
    t = data.draw(st.fractions(min_value=F(1, 50), max_value=F(49, 50), max_denominator=50))
    v = list(u)
    v[i] -= t * gap
    v[j] += t * gap
    assert compare(power_sum(p), u, v) == 1


@given(vectors, st.randoms(use_true_random=False))
def test_comparators_are_symmetric(u, rng):
    v = list(u)
    rng.shuffle(v)
    for obj in ALL_OBJECTIVES:
        assert compare(obj, u, v) == 0


@given(pairs)
def test_compare_is_antisymmetric(pair):
    u, v = pair
    for obj in ALL_OBJECTIVES:
        assert compare(obj, u, v) == -compare(obj, v, u)


@given(pairs)
def test_lexicographic_equal_iff_same_sorted(pair):
    u, v = pair
    same = sorted(u) == sorted(v)
    assert (compare(DECMIN, u, v) == 0) == same
    assert (compare(INCMAX, u, v) == 0) == same


@given(vectors, st.fractions(min_value=F(1, 9), max_value=3, max_denominator=9), st.data())
def test_nash_rewards_lifting_a_zero(u, eps, data):
    k = data.draw(st.integers(0, len(u) - 1))
    u = list(u)
    u[k] = F(0)
    v = list(u)
    v[k] = eps
    assert compare(NASH_WELFARE, v, u) == -1


@given(instances())
def test_instance_roundtrip(inst):
    back = parse_instance(dumps_instance(inst))
    assert back == inst and dict(back.names) == dict(inst.names)


@given(st.dictionaries(
    st.tuples(st.integers(0, 5), st.sampled_from(["m0", "m1", "c0", "c3"])),
    st.fractions(min_value=0, max_value=1, max_denominator=30),
))
def test_allocation_roundtrip(shares):
    alloc = Allocation(shares, relaxed=True)
    assert parse_allocation(dumps_allocation(alloc)) == alloc


@given(st.lists(st.fractions(min_value=-5, max_value=5, max_denominator=40)))
def test_utilities_roundtrip(u):
    assert parse_utilities(dumps_utilities(u)) == tuple(u)


@given(st.integers(1, 3).flatmap(lambda n: st.tuples(
    st.just(n), st.sets(st.tuples(*[st.integers(0, n - 1)] * 3), max_size=6))))
def test_3dm_roundtrip(data):
    n, triples = data
    dm = ThreeDM(n, tuple(sorted(triples)))
    assert parse_3dm(dumps_3dm(dm)) == dm


def test_rational_strings_are_lowest_terms():
    assert dumps_utilities([F(6, 4)]) == '{"utilities": ["3/2"]}'


if __name__ == "__main__":
    import sys

    import pytest

    sys.exit(pytest.main([__file__, "-q"]))
