import math
import random
from fractions import Fraction as F

import pytest

from mixfair import solver
from mixfair.objective import (
    ALL_OBJECTIVES,
    DECMIN,
    INCMAX,
    NASH_WELFARE,
    SQUARE_SUM,
    Objective,
    compare,
    evaluate_power_sum,
    objective_value,
    parse_objective,
    power_sum,
)
from mixfair.oracle import random_instance

DEC = (F(7, 4),) * 4 + (F(1),)
SQ = (F(3, 2),) * 4 + (F(2),)


def test_square_sum_against_dec_min():
    assert compare(SQUARE_SUM, DEC, SQ) == 1
    assert compare(DECMIN, DEC, SQ) == -1
    assert compare(INCMAX, DEC, SQ) == 1


def test_nash_examples():
    assert compare(NASH_WELFARE, (1, F(1, 2), F(1, 2)), (1, 1, 0)) == -1
    assert compare(NASH_WELFARE, (F(2, 3),) * 3, (1, F(1, 2), F(1, 2))) == -1


@pytest.mark.parametrize("obj", ALL_OBJECTIVES + (power_sum(3),))
def test_permutation_is_equal(obj):
    u = (F(1, 3), 2, 0, F(5, 2))
    assert compare(obj, u, tuple(reversed(u))) == 0


def test_length_mismatch():
    with pytest.raises(ValueError):
        compare(DECMIN, (1, 2), (1, 2, 3))


def test_power_sum_values():
    assert evaluate_power_sum(SQ, 2) == 13
    assert evaluate_power_sum((F(3, 2),) * 4 + (F(1),), 2) == 10
    assert evaluate_power_sum((0, 0, 0), 5) == 0
    assert evaluate_power_sum(DEC, 2) == F(53, 4)
    assert objective_value(DECMIN, DEC) is None
    with pytest.raises(ValueError):
        evaluate_power_sum(SQ, 1)


def test_parse_objective():
    assert parse_objective("square-sum") == SQUARE_SUM
    assert parse_objective("power:3") == Objective("power", 3)
    assert parse_objective("nash") == NASH_WELFARE
    assert str(parse_objective("power:2")) == "square-sum"
    for bad in ("power:1", "power:1.5", "power:x", "max", ""):
        with pytest.raises(ValueError):
            parse_objective(bad)
    with pytest.raises(ValueError):
        Objective("power", True)


def exact_phi(vectors, increasing=False):
    """The exponential function sum (2n)^(+-z_i/eps) with eps small enough to separate the vectors.

    eps is taken as 1/m with every z_i * m an integer, so the function is exact.
    """
    n = len(vectors[0])
    entries = {x for v in vectors for x in v}
    gaps = [abs(a - b) for a in entries for b in entries if a != b]
    eps = min(gaps) if gaps else F(1)
    lcm = math.lcm(*(x.denominator for x in entries))
    m = lcm * math.ceil(1 / (eps * lcm))
    sign = -1 if increasing else 1
    return lambda z: sum((F(2 * n) ** (sign * int(x * m)) for x in z), F(0))


def candidate_vectors(inst, sol):
    out = []
    for cand in sol.candidates:
        out.append(tuple(cand.utilities.get(i, sol.utilities[i]) for i in inst.agents))
    return out


@pytest.mark.parametrize("seed", range(30))
def test_exponential_phi_matches_lexicographic_orders(seed):
    rng = random.Random(seed)
    inst = random_instance(rng, rng.randint(2, 5), rng.randint(1, 5), rng.randint(1, 3), identical_divisible=True)
    for obj, increasing in ((DECMIN, False), (INCMAX, True)):
        sol = solver.solve(inst, obj)
        vectors = candidate_vectors(inst, sol) or [sol.utilities]
        phi = exact_phi(vectors, increasing)
        best_phi = min(phi(v) for v in vectors)
        by_phi = {tuple(sorted(v)) for v in vectors if phi(v) == best_phi}
        assert by_phi == {tuple(sorted(sol.utilities))}


def test_exponential_phi_on_market(market3):
    sol = solver.solve(market3, DECMIN)
    vectors = candidate_vectors(market3, sol)
    phi = exact_phi(vectors)
    assert min(vectors, key=phi) == sol.utilities == DEC
