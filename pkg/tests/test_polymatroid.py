import random
from fractions import Fraction as F

import pytest

import bruteforce as bf
from mixfair.oracle import random_coverage
from mixfair.polymatroid import CoverageFn, contract, coverage, eval_fn, max_density, smallest_maximizer_excess


def test_eval_market(market3):
    f = coverage(market3)
    assert f({0, 1, 2, 3}) == 3
    assert f(set()) == 0
    assert f(range(5)) == 8
    assert coverage(market3, "indivisible")(range(5)) == 5
    with pytest.raises(ValueError):
        eval_fn(f, {7})


def test_excess_examples(market3, tiny):
    res = smallest_maximizer_excess(coverage(market3), 1)
    assert (res.value, res.argmax) == (3, frozenset(range(5)))
    res = smallest_maximizer_excess(coverage(tiny), 0)
    assert (res.value, res.argmax) == (2, frozenset(range(3)))
    res = smallest_maximizer_excess(coverage(market3), 9)
    assert (res.value, res.argmax) == (0, frozenset())
    with pytest.raises(ValueError):
        smallest_maximizer_excess(coverage(market3), -1)


def test_max_density_examples(market3, tiny):
    res = max_density(coverage(market3))
    assert (res.value, res.witness) == (F(8, 5), frozenset(range(5)))
    assert max_density(CoverageFn((4,), (frozenset({4}),) * 3)).value == 3
    res = max_density(coverage(tiny))
    assert (res.value, res.witness) == (F(2, 3), frozenset(range(3)))


def test_contract_examples(market3):
    f = coverage(market3)
    assert contract(f, set()) == f
    empty = contract(f, range(5))
    assert empty.ground == () and empty.items == ()
    g = contract(f, {4})
    assert len(g.items) == 8 and g.ground == (0, 1, 2, 3)
    assert g({0, 1, 2, 3}) == 8


@pytest.mark.parametrize("seed", range(60))
def test_excess_matches_enumeration(seed):
    rng = random.Random(seed)
    n = rng.randint(1, 7)
    f = random_coverage(rng, n, rng.randint(0, 9))
    items = [set(d) for d in f.items]
    beta = F(rng.randint(0, 12), rng.randint(1, 5))
    best, maximizers = bf.excess(items, f.ground, beta)
    res = smallest_maximizer_excess(f, beta)
    assert res.value == best
    # lattice: maximizers closed under union and intersection, argmax is the meet
    as_set = set(maximizers)
    for X in maximizers:
        for Y in maximizers:
            assert X | Y in as_set and X & Y in as_set
    assert res.argmax == frozenset.intersection(*maximizers)


def test_excess_matches_enumeration_twelve_agents():
    rng = random.Random(12)
    for _ in range(3):
        f = random_coverage(rng, 12, 14)
        beta = F(rng.randint(1, 6), rng.randint(1, 4))
        best, maximizers = bf.excess([set(d) for d in f.items], f.ground, beta)
        res = smallest_maximizer_excess(f, beta)
        assert (res.value, res.argmax) == (best, frozenset.intersection(*maximizers))


@pytest.mark.parametrize("seed", range(40))
def test_density_matches_enumeration(seed):
    rng = random.Random(1000 + seed)
    f = random_coverage(rng, rng.randint(1, 7), rng.randint(0, 10))
    res = max_density(f)
    assert res.value == bf.density([set(d) for d in f.items], f.ground)
    assert F(f(res.witness), len(res.witness)) == res.value
    assert res.value.denominator <= len(f.ground)


def test_supermodular_and_monotone():
    rng = random.Random(5)
    for _ in range(20):
        f = random_coverage(rng, 5, 6)
        subsets = list(bf.subsets(f.ground))
        assert f(set()) == 0
        for X in subsets:
            for Y in subsets:
                assert f(X) + f(Y) <= f(X | Y) + f(X & Y)
                if X <= Y:
                    assert f(X) <= f(Y)


def test_contract_matches_definition():
    rng = random.Random(9)
    for _ in range(20):
        f = random_coverage(rng, 5, 7)
        S = frozenset(i for i in f.ground if rng.random() < 0.4)
        g = contract(f, S)
        for X in bf.subsets(g.ground):
            assert g(X) == f(X | S) - f(S)
