"""Coverage supermodular functions ``f(X) = #{e : D(e) ⊆ X}`` and their cut-based primitives."""

from __future__ import annotations

from collections import Counter
from collections.abc import Iterable
from dataclasses import dataclass
from fractions import Fraction

from .flow import FlowNetwork, max_flow
from .instance import DIVISIBLE, INDIVISIBLE, Instance


@dataclass(frozen=True)
class CoverageFn:
    """``ground`` is a sorted tuple of agent labels; ``items`` a multiset of non-empty desire-sets."""

    ground: tuple[int, ...]
    items: tuple[frozenset[int], ...]

    def __post_init__(self):
        object.__setattr__(self, "ground", tuple(sorted(self.ground)))
        object.__setattr__(self, "items", tuple(frozenset(d) for d in self.items))
        g = set(self.ground)
        for d in self.items:
            if not d or not d <= g:
                raise ValueError(f"desire-set {sorted(d)} is empty or leaves the ground set")

    def __call__(self, X: Iterable[int]) -> int:
        return eval_fn(self, X)


def coverage(inst: Instance, kind: str | None = None) -> CoverageFn:
    """f_M (kind="indivisible"), f_C (kind="divisible") or f_E (kind=None)."""
    sets: list[tuple[int, ...]] = []
    if kind in (None, INDIVISIBLE):
        sets += inst.indivisible
    if kind in (None, DIVISIBLE):
        sets += inst.divisible
    return CoverageFn(tuple(inst.agents), tuple(frozenset(d) for d in sets))


def eval_fn(f: CoverageFn, X: Iterable[int]) -> int:
    X = frozenset(X)
    if not X <= set(f.ground):
        raise ValueError(f"{sorted(X - set(f.ground))} not in the ground set")
    return sum(1 for d in f.items if d <= X)


def contract(f: CoverageFn, S: Iterable[int]) -> CoverageFn:
    """``X -> f(X ∪ S) - f(S)`` on the ground set minus S."""
    S = frozenset(S)
    if not S <= set(f.ground):
        raise ValueError("contraction set leaves the ground set")
    return CoverageFn(
        tuple(i for i in f.ground if i not in S),
        tuple(d - S for d in f.items if not d <= S),
    )


@dataclass(frozen=True)
class ExcessResult:
    value: Fraction
    argmax: frozenset[int]


def excess_network(f: CoverageFn, beta: Fraction) -> FlowNetwork:
    """Project-selection network: each item earns 1, each agent costs beta (scaled by its denominator)."""
    beta = Fraction(beta)
    q, p = beta.denominator, beta.numerator
    net = FlowNetwork("s", "t", label=f"excess beta={beta}")
    groups = Counter(f.items)
    big = q * len(f.items) + 1
    for n, (d, count) in enumerate(sorted(groups.items(), key=lambda kv: sorted(kv[0]))):
        net.add_arc("s", ("item", n), count * q)
        for i in sorted(d):
            net.add_arc(("item", n), ("agent", i), big)
    for i in f.ground:
        net.add_arc(("agent", i), "t", p)
    return net


def smallest_maximizer_excess(f: CoverageFn, beta: Fraction | int) -> ExcessResult:
    """``max_X f(X) - beta|X|`` and its inclusion-wise smallest maximizer, via one min cut."""
    beta = Fraction(beta)
    if beta < 0:
        raise ValueError("beta must be non-negative")
    net = excess_network(f, beta)
    res = max_flow(net)
    argmax = frozenset(node[1] for node in res.source_side if isinstance(node, tuple) and node[0] == "agent")
    value = Fraction(len(f.items) * beta.denominator - res.value, beta.denominator)
    return ExcessResult(value, argmax)


@dataclass(frozen=True)
class DensityResult:
    value: Fraction
    witness: frozenset[int]


def max_density(f: CoverageFn) -> DensityResult:
    """``max f(X)/|X|`` over non-empty X, by Dinkelbach iteration on the excess cut."""
    if not f.ground:
        raise ValueError("max_density needs a non-empty ground set")
    witness = frozenset(f.ground)
    lam = Fraction(f(witness), len(witness))
    while True:
        res = smallest_maximizer_excess(f, lam)
        if res.value == 0:
            return DensityResult(lam, witness)
        witness = res.argmax
        lam = Fraction(f(witness), len(witness))
