"""Exhaustive reference computations, deliberately free of any flow code."""

import itertools
import math
from fractions import Fraction


def subsets(ground):
    ground = list(ground)
    for r in range(len(ground) + 1):
        yield from (frozenset(c) for c in itertools.combinations(ground, r))


def value(items, X):
    X = set(X)
    return sum(1 for d in items if set(d) <= X)


def excess(items, ground, beta):
    """(max value, all maximizers) of value(X) - beta |X|."""
    scored = [(value(items, X) - Fraction(beta) * len(X), X) for X in subsets(ground)]
    best = max(s for s, _ in scored)
    return best, [X for s, X in scored if s == best]


def density(items, ground):
    return max(Fraction(value(items, X), len(X)) for X in subsets(ground) if X)


def canonical(items, ground):
    """Blocks and essential values straight from the defining formula.

    beta_j is the largest ceil of the contracted density; N_j the smallest
    maximizer of the contracted function minus (beta_j - 1)|X|.
    """
    prior, rest = frozenset(), set(ground)
    blocks, betas = [], []
    while rest:
        def g(X):
            return value(items, X | prior) - value(items, prior)

        beta = max(math.ceil(Fraction(g(X), len(X))) for X in subsets(rest) if X)
        if beta >= 1:
            scores = {X: g(X) - (beta - 1) * len(X) for X in subsets(rest)}
            top = max(scores.values())
            block = frozenset.intersection(*[X for X, s in scores.items() if s == top])
        else:
            block = frozenset(rest)
        blocks.append(tuple(sorted(block)))
        betas.append(beta)
        prior |= block
        rest -= block
    return blocks, betas


def principal(items, ground):
    """Blocks (union of all max-density sets of the contraction) and critical values."""
    prior, rest = frozenset(), set(ground)
    blocks, lams = [], []
    while rest:
        def g(X):
            return value(items, X | prior) - value(items, prior)

        dens = {X: Fraction(g(X), len(X)) for X in subsets(rest) if X}
        lam = max(dens.values())
        block = frozenset().union(*[X for X, d in dens.items() if d == lam])
        blocks.append(tuple(sorted(block)))
        lams.append(lam)
        prior |= block
        rest -= block
    return blocks, lams


def block_counts(plus, minus, goods):
    """Every count vector (over plus + minus, in that order) reachable by a 0/1 assignment."""
    agents = list(plus) + list(minus)
    pos = {i: k for k, i in enumerate(agents)}
    out = set()
    for choice in itertools.product(*[agents_ for _, agents_ in goods]):
        counts = [0] * len(agents)
        for i in choice:
            counts[pos[i]] += 1
        out.add(tuple(counts))
    return out


def block_feasible(plus, minus, goods, k, ell, beta, counts=None):
    """Some 0/1 assignment of the goods meets the block conditions."""
    if counts is None:
        counts = block_counts(plus, minus, goods)
    p = len(plus)
    for c in counts:
        top, rest = c[:p], c[p:]
        if (
            sum(top) == ell
            and all(x <= beta for x in top)
            and sum(1 for x in top if x == beta) <= k
            and all(max(beta - 1, 0) <= x <= beta for x in rest)
        ):
            return True
    return False


def indivisible_utility_vectors(n, sets):
    out = set()
    for choice in itertools.product(*sets):
        z = [0] * n
        for i in choice:
            z[i] += 1
        out.add(tuple(z))
    return out


def smallest_maximizer(items, ground, lam):
    _, maximizers = excess(items, ground, lam)
    return frozenset.intersection(*maximizers)


def breakpoints(items, ground):
    """Critical values: the slopes of the upper concave envelope of k -> max_{|X|=k} value(X)."""
    ground = list(ground)
    top = [max(value(items, c) for c in itertools.combinations(ground, k)) for k in range(len(ground) + 1)]
    hull = [0]
    for k in range(1, len(top)):
        while len(hull) >= 2:
            a, b = hull[-2], hull[-1]
            if (top[b] - top[a]) * (k - b) <= (top[k] - top[b]) * (b - a):
                hull.pop()
            else:
                break
        hull.append(k)
    return [Fraction(top[b] - top[a], b - a) for a, b in zip(hull, hull[1:])]


def principal_by_definition(items, ground):
    lams = breakpoints(items, ground)
    blocks = []
    for j, lam in enumerate(lams):
        lower = lams[j + 1] if j + 1 < len(lams) else lam - 1
        mid = (lam + lower) / 2
        blocks.append(tuple(sorted(smallest_maximizer(items, ground, mid) - smallest_maximizer(items, ground, lam))))
    return blocks, lams


def canonical_by_definition(items, ground):
    blocks, betas = [], []
    for beta in range(len(items) + 1, -1, -1):
        diff = smallest_maximizer(items, ground, beta - 1) - smallest_maximizer(items, ground, beta)
        if diff:
            blocks.append(tuple(sorted(diff)))
            betas.append(beta)
    return blocks, betas
