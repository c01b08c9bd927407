"""Canonical and principal partitions of a coverage function, and the minimizers they describe."""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

from .flow import FlowNetwork, feasible_flow
from .polymatroid import CoverageFn, contract, max_density, smallest_maximizer_excess


@dataclass(frozen=True)
class CanonicalPartition:
    blocks: tuple[tuple[int, ...], ...]
    essential_values: tuple[int, ...]

    def block_of(self, agent: int) -> int:
        return next(j for j, b in enumerate(self.blocks) if agent in b)


@dataclass(frozen=True)
class PrincipalPartition:
    blocks: tuple[tuple[int, ...], ...]
    critical_values: tuple[Fraction, ...]


def canonical_partition(f: CoverageFn) -> CanonicalPartition:
    """Peel off blocks: beta_j = ceil(max density) of the contracted function, N_j the
    smallest maximizer of ``f'(X) - (beta_j - 1)|X|``."""
    if not f.ground:
        raise ValueError("canonical_partition needs a non-empty ground set")
    blocks, betas = [], []
    rest = f
    while rest.ground:
        beta = math.ceil(max_density(rest).value)
        # beta - 1 may be -1 when nothing is left to cover; every agent then joins the block
        block = smallest_maximizer_excess(rest, beta - 1).argmax if beta >= 1 else frozenset(rest.ground)
        blocks.append(tuple(sorted(block)))
        betas.append(beta)
        rest = contract(rest, block)
    return CanonicalPartition(tuple(blocks), tuple(betas))


def principal_partition(f: CoverageFn) -> PrincipalPartition:
    """Critical values as successive maximum densities of the contracted function.

    The block at lambda_k is L(lambda') for any lambda' strictly between
    lambda_k and the next critical value; critical values have denominators at
    most |ground|, so lambda_k - 1/(2 n^2) is such a point.
    """
    if not f.ground:
        raise ValueError("principal_partition needs a non-empty ground set")
    blocks, lams = [], []
    rest = f
    while rest.ground:
        lam = max_density(rest).value
        n = len(rest.ground)
        below = lam - Fraction(1, 2 * n * n)
        block = smallest_maximizer_excess(rest, below).argmax if below >= 0 else frozenset(rest.ground)
        blocks.append(tuple(sorted(block)))
        lams.append(lam)
        rest = contract(rest, block)
    return PrincipalPartition(tuple(blocks), tuple(lams))


def relaxed_minimizer(pp: PrincipalPartition) -> tuple[Fraction, ...]:
    """The unique minimizer over the base polyhedron: lambda_k on every agent of block k.

    Indexed by agent, assuming the blocks cover ``0..n-1``.
    """
    n = sum(len(b) for b in pp.blocks)
    z = [Fraction(0)] * n
    for block, lam in zip(pp.blocks, pp.critical_values):
        for i in block:
            z[i] = lam
    return tuple(z)


def _block_network(items, agents, bounds) -> FlowNetwork:
    net = FlowNetwork("s", "t", label="discrete-minimizer")
    for n, d in enumerate(items):
        net.add_arc("s", ("item", n), 1, lower=1)
        for i in sorted(d):
            net.add_arc(("item", n), ("agent", i), 1)
    for i in agents:
        lo, hi = bounds[i]
        net.add_arc(("agent", i), "t", hi, lower=lo)
    return net


class InfeasibleError(RuntimeError):
    """A structure guaranteed to exist could not be built; indicates a bug."""


def discrete_minimizer(f: CoverageFn, cp: CanonicalPartition) -> tuple[int, ...]:
    """An integral minimizer over the M-convex set of ``f``.

    On block N_j every agent gets beta_j - 1 or beta_j, with exactly
    ``f'(N_j) - (beta_j - 1)|N_j|`` at beta_j. Agents are promoted to beta_j in
    increasing index order whenever the block stays realizable.
    """
    z: dict[int, int] = {}
    prior: set[int] = set()
    for block, beta in zip(cp.blocks, cp.essential_values):
        rest = contract(f, prior)
        items = [d for d in rest.items if d <= set(block)]
        lo = max(beta - 1, 0)
        bounds = {i: (lo, max(beta, 0)) for i in block}
        for i in block:
            bounds[i] = (max(beta, 0), max(beta, 0))
            if not feasible_flow(_block_network(items, block, bounds)).feasible:
                bounds[i] = (lo, lo)
        if not feasible_flow(_block_network(items, block, bounds)).feasible:
            raise InfeasibleError(f"block {block} with beta={beta} is not realizable")
        z.update({i: bounds[i][0] for i in block})
        prior |= set(block)
    return tuple(z[i] for i in f.ground)
