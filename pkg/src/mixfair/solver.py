"""Fair allocation when the divisible goods are identical, plus the pure cases.

The essential block receives every divisible good. All other blocks get a
fixed integral assignment; inside the essential block we enumerate how many
indivisible goods go to the agents who want the divisible goods (``ell``) and
how many of them may sit at the block's top value (``k``), check each pair with
a lower-bounded flow, water-fill the divisible goods, and keep the fairest.
"""

from __future__ import annotations

import logging
from collections.abc import Sequence
from dataclasses import dataclass, field
from fractions import Fraction

from . import objective as objectives
from .flow import Block, BlockAssignment, assign_goods, feasible_block_assignment, realize_from_utilities
from .instance import (
    DIVISIBLE,
    INDIVISIBLE,
    Allocation,
    GoodsPartition,
    Instance,
    UtilityVector,
    good_id,
    goods_canonical_partition,
    goods_identical,
    utility_vector,
    validate_allocation,
)
from .objective import Objective
from .partition import (
    CanonicalPartition,
    InfeasibleError,
    canonical_partition,
    discrete_minimizer,
    principal_partition,
    relaxed_minimizer,
)
from .polymatroid import coverage

log = logging.getLogger(__name__)


class NotTractableError(ValueError):
    """Mixed instance with non-identical divisible goods; only the brute-force oracle applies."""


@dataclass(frozen=True)
class Candidate:
    k: int
    ell: int
    assignment: BlockAssignment
    utilities: dict[int, Fraction]
    """Block utilities, keyed by agent."""
    shares: dict[tuple[int, str], Fraction]
    """Divisible shares produced by water-filling."""


@dataclass
class Solution:
    allocation: Allocation
    utilities: UtilityVector
    candidates: list[Candidate] = field(default_factory=list)
    chosen: Candidate | None = None

    @property
    def candidates_examined(self) -> int:
        return len(self.candidates)


def water_fill(
    assignment: BlockAssignment,
    plus: Sequence[int],
    divisible: Sequence[str],
    ell: int,
    beta: int,
) -> tuple[Fraction, dict[tuple[int, str], Fraction]]:
    """Common level and divisible shares for the N+ agents below ``beta`` goods.

    Every such agent ends at ``beta - (|N+| beta - ell - |C|) / (|N+| - k')``,
    k' being the number of N+ agents holding ``beta`` goods; those agents and
    all N- agents get no divisible share.
    """
    c = len(divisible)
    if not c:
        return Fraction(beta), {}
    top = [i for i in plus if assignment.counts[i] >= beta]
    low = [i for i in plus if assignment.counts[i] < beta]
    if not low:
        raise ValueError("every N+ agent already holds beta goods; nobody can absorb the divisible goods")
    level = beta - Fraction(len(plus) * beta - ell - c, len(plus) - len(top))
    shares = {}
    for i in low:
        per_good = (level - assignment.counts[i]) / c
        if per_good < 0:
            raise ValueError(f"negative water-fill share for agent {i}")
        for gid in divisible:
            if per_good:
                shares[(i, gid)] = per_good
    return level, shares


def _fixed_blocks(inst: Instance, cp: CanonicalPartition, gp: GoodsPartition, zdot, skip: int):
    """Each non-essential block's indivisible goods, each agent receiving zdot_i of them."""
    shares: dict[tuple[int, str], Fraction] = {}
    for j, block in enumerate(cp.blocks):
        if j == skip:
            continue
        goods = [(good_id(INDIVISIBLE, g), [i for i in inst.indivisible[g] if i in block]) for g in gp.indivisible_blocks[j]]
        got = assign_goods(goods, {i: zdot[i] for i in block}, label=f"block-{j}")
        if got is None:
            raise InfeasibleError(f"block {j} cannot be assigned its discrete minimizer")
        shares.update(got)
    return shares


def solve_algorithm1(inst: Instance, obj: Objective) -> Solution:
    if not inst.divisible or not inst.indivisible:
        raise ValueError("solve_algorithm1 needs both indivisible and divisible goods")
    if not goods_identical(inst, DIVISIBLE):
        raise NotTractableError("divisible goods are not identical")
    f = coverage(inst)
    cp = canonical_partition(f)
    gp = goods_canonical_partition(inst, cp)
    zdot = discrete_minimizer(f, cp)
    jstar = next(j for j, cs in enumerate(gp.divisible_blocks) if cs)
    fixed = _fixed_blocks(inst, cp, gp, zdot, jstar)

    agents = cp.blocks[jstar]
    beta = cp.essential_values[jstar]
    wants_c = set(inst.divisible[0])
    plus = tuple(i for i in agents if i in wants_c)
    minus = tuple(i for i in agents if i not in wants_c)
    block_goods = tuple(
        (good_id(INDIVISIBLE, g), tuple(i for i in inst.indivisible[g] if i in agents))
        for g in gp.indivisible_blocks[jstar]
    )
    block = Block(plus, minus, block_goods)
    divisible = [good_id(DIVISIBLE, c) for c in range(len(inst.divisible))]
    n_c = len(divisible)
    log.debug("essential block %s, beta=%d, N+=%s, N-=%s", agents, beta, plus, minus)

    candidates: list[Candidate] = []
    for ell in range(len(block_goods) + 1):
        for k in range(len(plus) + 1):
            if k == len(plus) and n_c:
                continue
            if not len(plus) * (beta - 1) + k <= ell + n_c <= len(plus) * beta:
                continue
            assignment = feasible_block_assignment(block, k, ell, beta)
            if assignment is None:
                continue
            level, shares = water_fill(assignment, plus, divisible, ell, beta)
            util = {i: Fraction(assignment.counts[i]) for i in agents}
            for i in plus:
                if assignment.counts[i] < beta:
                    util[i] = level
            candidates.append(Candidate(k, ell, assignment, util, shares))
    if not candidates:
        raise InfeasibleError("no feasible candidate in the essential block")

    def full_vector(cand: Candidate) -> list[Fraction]:
        return [cand.utilities.get(i, Fraction(zdot[i])) for i in inst.agents]

    # equally fair candidates: smallest sorted vector, then first in (ell, k) order
    def rank(cand: Candidate):
        u = full_vector(cand)
        return objectives.key(obj, u), sorted(u)

    best = min(candidates, key=rank)

    shares = dict(fixed)
    shares.update({(i, gid): Fraction(1) for gid, i in best.assignment.assignment.items()})
    shares.update(best.shares)
    alloc = Allocation(shares)
    solution = Solution(alloc, utility_vector(inst, alloc), candidates, best)
    _check_solution(inst, solution, cp, gp)
    return solution


def solve_pure(inst: Instance, obj: Objective | None = None) -> Solution:
    """Single-kind instances: the optimum is objective-independent."""
    if inst.indivisible and inst.divisible:
        raise ValueError("solve_pure needs an instance with only one kind of goods")
    if not inst.indivisible:
        target = relaxed_minimizer(principal_partition(coverage(inst, DIVISIBLE)))
        kind = DIVISIBLE
    else:
        f = coverage(inst, INDIVISIBLE)
        target = tuple(Fraction(x) for x in discrete_minimizer(f, canonical_partition(f)))
        kind = INDIVISIBLE
    alloc = realize_from_utilities(inst, kind, target)
    if alloc is None:
        raise InfeasibleError("minimizer could not be realized")
    solution = Solution(alloc, utility_vector(inst, alloc))
    f = coverage(inst)
    cp = canonical_partition(f)
    _check_solution(inst, solution, cp, goods_canonical_partition(inst, cp))
    return solution


def solve(inst: Instance, obj: Objective) -> Solution:
    """A fair allocation for ``obj``; raises NotTractableError for mixed non-identical instances."""
    if inst.n_agents == 0 or not inst.indivisible or not inst.divisible:
        if inst.n_agents == 0:
            return Solution(Allocation({}), ())
        return solve_pure(inst, obj)
    return solve_algorithm1(inst, obj)


def _check_solution(inst: Instance, sol: Solution, cp: CanonicalPartition, gp: GoodsPartition) -> None:
    """Post-conditions every returned allocation must meet; a failure is a bug."""
    problems = validate_allocation(inst, sol.allocation)
    for j, block in enumerate(cp.blocks):
        for gid in gp.block_goods(j):
            inside = sum((s for (i, g), s in sol.allocation.shares.items() if g == gid and i in block), Fraction(0))
            if inside != 1:
                problems.append(f"good {gid} of block {j} leaks outside the block")
    zbar = relaxed_minimizer(principal_partition(coverage(inst)))
    for i, (z, zb) in enumerate(zip(sol.utilities, zbar)):
        if not zb.__floor__() <= z <= zb.__ceil__():
            problems.append(f"agent {i}: utility {z} outside [floor, ceil] of relaxed {zb}")
    eaters = {i for (i, g), s in sol.allocation.shares.items() if g.startswith("c") and s > 0}
    if goods_identical(inst, DIVISIBLE) and len({sol.utilities[i] for i in eaters}) > 1:
        problems.append("agents sharing divisible goods have unequal utilities")
    if problems:
        raise InfeasibleError("solution check failed: " + "; ".join(problems))
