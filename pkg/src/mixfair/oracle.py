"""Desk-scale ground truth: exhaustive solving, property checkers and hardness fixtures.

Nothing here is meant to scale; everything here is meant to be obviously right.
"""

from __future__ import annotations

import itertools
import json
import logging
import math
import random
from collections.abc import Sequence
from dataclasses import dataclass, field
from fractions import Fraction

from . import objective as objectives
from .flow import realize_from_utilities
from .instance import (
    DIVISIBLE,
    INDIVISIBLE,
    Allocation,
    Instance,
    InstanceError,
    UtilityVector,
    format_rational,
    good_id,
    goods_canonical_partition,
    goods_identical,
    utility_vector,
)
from .objective import Objective
from .partition import canonical_partition, principal_partition, relaxed_minimizer
from .polymatroid import CoverageFn, coverage

log = logging.getLogger(__name__)


class CapExceeded(ValueError):
    pass


class ConvergenceError(RuntimeError):
    pass


@dataclass(frozen=True)
class OracleCaps:
    agents: int = 6
    indivisible: int = 6
    divisible: int = 4
    assignments: int = 10**6


DEFAULT_CAPS = OracleCaps()
UNCAPPED = OracleCaps(agents=10**9, indivisible=10**9, divisible=10**9, assignments=10**6)


@dataclass
class Report:
    name: str
    ok: bool
    violations: list[str] = field(default_factory=list)
    details: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {"check": self.name, "pass": self.ok, "violations": self.violations, "details": self.details}


# ------------------------------------------------------------ enumeration


def _check_caps(inst: Instance, caps: OracleCaps) -> None:
    if inst.n_agents > caps.agents or len(inst.indivisible) > caps.indivisible or len(inst.divisible) > caps.divisible:
        raise CapExceeded(
            f"instance ({inst.n_agents} agents, {len(inst.indivisible)} indivisible, "
            f"{len(inst.divisible)} divisible) exceeds oracle caps {caps}"
        )
    count = math.prod(len(d) for d in inst.indivisible)
    if count > caps.assignments:
        raise CapExceeded(f"{count} indivisible assignments exceed the cap {caps.assignments}")


def indivisible_outcomes(inst: Instance, bound: Sequence[Fraction] | None = None) -> dict[tuple[int, ...], tuple[int, ...]]:
    """Every reachable count vector of the indivisible goods, with one witness assignment each.

    Assignments are explored good by good; two partial assignments with equal
    counts are interchangeable, so only the first (in lexicographic order) is
    kept. ``bound`` prunes count vectors exceeding it componentwise.
    """
    states: dict[tuple[int, ...], tuple[int, ...]] = {(0,) * inst.n_agents: ()}
    for d in inst.indivisible:
        nxt: dict[tuple[int, ...], tuple[int, ...]] = {}
        for counts, who in states.items():
            for i in d:
                c = list(counts)
                c[i] += 1
                if bound is not None and c[i] > bound[i]:
                    continue
                nxt.setdefault(tuple(c), who + (i,))
        states = nxt
    return states


def water_level(base: Sequence[Fraction], eaters: Sequence[int], mass: int) -> Fraction:
    """Level u with sum over eaters of max(0, u - base_i) equal to ``mass``."""
    levels = sorted(Fraction(base[i]) for i in eaters)
    acc = Fraction(0)
    for k, b in enumerate(levels, start=1):
        acc += b
        u = (mass + acc) / k
        if k == len(levels) or u <= levels[k]:
            return u
    raise ValueError("no eaters")


def _fill_identical(inst: Instance, x: Sequence[int]) -> tuple[Fraction, ...]:
    eaters = inst.divisible[0]
    u = water_level([Fraction(v) for v in x], eaters, len(inst.divisible))
    z = [Fraction(v) for v in x]
    for i in eaters:
        z[i] = max(z[i], u)
    return tuple(z)


class _ExhaustiveRelaxed:
    """Relaxed minimizer of ``X -> f_C(X) + x(X)`` by enumerating every agent subset."""

    def __init__(self, inst: Instance):
        self.n = inst.n_agents
        masks = [sum(1 << i for i in d) for d in inst.divisible]
        self.fc = [sum(1 for dm in masks if dm & ~m == 0) for m in range(1 << self.n)]

    def __call__(self, x: Sequence[int]) -> tuple[Fraction, ...]:
        n = self.n
        xs = [0] * (1 << n)
        for m in range(1, 1 << n):
            low = m & -m
            xs[m] = xs[m ^ low] + x[low.bit_length() - 1]
        F = [a + b for a, b in zip(self.fc, xs)]
        z = [Fraction(0)] * n
        done, rest = 0, (1 << n) - 1
        while rest:
            best_num, best_den, block = -1, 1, 0
            sub = rest
            while sub:
                num = F[sub | done] - F[done]
                den = sub.bit_count()
                if num * best_den > best_num * den:
                    best_num, best_den, block = num, den, sub
                elif num * best_den == best_num * den:
                    block |= sub
                sub = (sub - 1) & rest
            lam = Fraction(best_num, best_den)
            for i in range(n):
                if block >> i & 1:
                    z[i] = lam
            done |= block
            rest &= ~block
        return tuple(z)


def _relaxed_by_partition(inst: Instance, x: Sequence[int]) -> tuple[Fraction, ...]:
    """Same optimum via the cut-based principal partition, each x_i modelled as private goods."""
    private = [frozenset([i]) for i, v in enumerate(x) for _ in range(v)]
    f = CoverageFn(tuple(inst.agents), tuple(frozenset(d) for d in inst.divisible) + tuple(private))
    return relaxed_minimizer(principal_partition(f))


@dataclass(frozen=True)
class OracleResult:
    utilities: UtilityVector
    allocation: Allocation
    examined: int
    inner: str


def _inner_method(inst: Instance, obj: Objective, inner: str) -> str:
    if not inst.divisible:
        return "none"
    if inner != "auto":
        return inner
    if goods_identical(inst, DIVISIBLE):
        return "water-fill"
    return "exhaustive" if inst.n_agents <= 12 else "partition"


def brute_force_optimal(
    inst: Instance,
    obj: Objective,
    caps: OracleCaps = DEFAULT_CAPS,
    inner: str = "auto",
    tol: float = 1e-8,
) -> OracleResult:
    """Best utility vector over all indivisible assignments, each completed optimally with divisible goods.

    ``inner`` picks how the divisible part is optimized for a fixed indivisible
    assignment: ``water-fill`` (identical divisible goods), ``exhaustive``
    (subset enumeration), ``partition`` (cut-based), or ``continuous``
    (conditional gradient, power-sum only). ``auto`` chooses an exact one.
    """
    _check_caps(inst, caps)
    method = _inner_method(inst, obj, inner)
    if method == "continuous" and obj.kind != objectives.POWER:
        raise ValueError("the continuous inner solver only handles power-sum objectives")
    exhaustive = _ExhaustiveRelaxed(inst) if method == "exhaustive" else None
    fc = coverage(inst, DIVISIBLE)

    best = None
    outcomes = indivisible_outcomes(inst)
    for x, who in outcomes.items():
        if method == "none":
            z = tuple(Fraction(v) for v in x)
        elif method == "water-fill":
            z = _fill_identical(inst, x)
        elif method == "exhaustive":
            z = exhaustive(x)
        elif method == "partition":
            z = _relaxed_by_partition(inst, x)
        elif method == "continuous":
            res = continuous_min(fc, [Fraction(v) for v in x], obj.p, tol)
            z = tuple(Fraction(v) + y for v, y in zip(x, res.y))
        else:
            raise ValueError(f"unknown inner method {inner!r}")
        rank = (objectives.key(obj, z), tuple(sorted(z)), who)
        if best is None or rank < best[0]:
            best = (rank, z, x, who)
    _, z, x, who = best

    shares = {(i, good_id(INDIVISIBLE, g)): Fraction(1) for g, i in enumerate(who)}
    alloc = Allocation(shares)
    if inst.divisible:
        target = [zi - xi for zi, xi in zip(z, x)]
        part = realize_from_utilities(inst, DIVISIBLE, target)
        if part is None:
            raise RuntimeError("oracle optimum is not realizable by the divisible goods")
        alloc = alloc.merge(part)
    return OracleResult(utility_vector(inst, alloc), alloc, len(outcomes), method)


# ------------------------------------------------------- continuous solver


@dataclass(frozen=True)
class ContinuousResult:
    y: tuple[Fraction, ...]
    gap: float
    iterations: int


def greedy_vertex(f: CoverageFn, weights: Sequence[float]) -> tuple[int, ...]:
    """Vertex of the base polyhedron minimizing ``<weights, y>``: heaviest agents take the smallest increments."""
    order = sorted(range(len(f.ground)), key=lambda k: (-weights[k], k))
    y = [0] * len(f.ground)
    taken: set[int] = set()
    prev = 0
    for k in order:
        taken.add(f.ground[k])
        cur = f(taken)
        y[k] = cur - prev
        prev = cur
    return tuple(y)


def continuous_min(
    fC: CoverageFn,
    shift: Sequence[Fraction],
    p: int,
    tol: float = 1e-8,
    max_iter: int = 100_000,
) -> ContinuousResult:
    """Minimize ``sum (shift_i + y_i)^p`` over the base polyhedron of ``fC`` by pairwise conditional gradient.

    Iterates are kept as explicit convex combinations of greedy vertices, so
    the returned ``y`` (rebuilt from the weights in exact arithmetic) lies in
    the polytope exactly. ``gap`` is the final Frank-Wolfe duality gap, an
    upper bound on the suboptimality.
    """
    if p < 2:
        raise ValueError("p must be at least 2")
    n = len(fC.ground)
    s0 = [float(v) for v in shift]
    start = greedy_vertex(fC, s0)
    weights = {start: 1.0}
    y = [float(v) for v in start]
    gap = math.inf
    for it in range(1, max_iter + 1):
        grad = [p * (s0[i] + y[i]) ** (p - 1) for i in range(n)]
        fw = greedy_vertex(fC, grad)
        gap = sum(g * (yi - v) for g, yi, v in zip(grad, y, fw))
        if gap <= tol:
            break
        away = max(weights, key=lambda v: (sum(g * vi for g, vi in zip(grad, v)), v))
        d = [a - b for a, b in zip(fw, away)]
        gmax = weights[away]
        step = _line_search(s0, y, d, p, gmax)
        if step <= 0:
            # numerically stuck: the remaining gap is the certificate we report
            if gap <= 10 * tol:
                break
            raise ConvergenceError(f"line search stalled with gap {gap:.3e}")
        y = [yi + step * di for yi, di in zip(y, d)]
        weights[fw] = weights.get(fw, 0.0) + step
        if step >= gmax:
            del weights[away]
        else:
            weights[away] = gmax - step
    else:
        raise ConvergenceError(f"no convergence in {max_iter} iterations (gap {gap:.3e})")

    exact = {v: Fraction(w) for v, w in weights.items() if w > 0}
    total = sum(exact.values())
    y_exact = tuple(sum((w * v[i] for v, w in exact.items()), Fraction(0)) / total for i in range(n))
    return ContinuousResult(y_exact, gap, it)


def _line_search(shift, y, d, p, gmax) -> float:
    def slope(t):
        return sum(p * (s + yi + t * di) ** (p - 1) * di for s, yi, di in zip(shift, y, d))

    if slope(0.0) >= 0:
        return 0.0
    if slope(gmax) <= 0:
        return gmax
    if p == 2:
        dd = sum(di * di for di in d)
        return min(gmax, -slope(0.0) / (2 * dd))
    lo, hi = 0.0, gmax
    for _ in range(100):
        mid = (lo + hi) / 2
        if slope(mid) < 0:
            lo = mid
        else:
            hi = mid
    return lo


# ------------------------------------------------------------- checkers


def check_proximity(
    inst: Instance,
    obj: Objective,
    caps: OracleCaps = DEFAULT_CAPS,
    utilities: Sequence[Fraction] | None = None,
    inner: str = "auto",
    slack: Fraction = Fraction(1, 10**6),
) -> Report:
    """floor(zbar_i) <= z*_i <= ceil(zbar_i), zbar the all-divisible optimum.

    ``z*`` is the oracle optimum unless ``utilities`` is given. ``slack`` only
    applies when z* comes from the continuous solver, which is then run to a
    gap of slack**2 (a gap g bounds each coordinate error by sqrt(g) for p >= 2).
    """
    tolerance = Fraction(0)
    if utilities is None:
        res = brute_force_optimal(inst, obj, caps, inner=inner, tol=float(slack) ** 2)
        utilities = res.utilities
        if res.inner == "continuous":
            tolerance = slack
    zbar = relaxed_minimizer(principal_partition(coverage(inst)))
    violations = []
    for i, (z, zb) in enumerate(zip(utilities, zbar)):
        if not math.floor(zb) - tolerance <= z <= math.ceil(zb) + tolerance:
            violations.append(f"agent {i}: {z} outside [{math.floor(zb)}, {math.ceil(zb)}] (relaxed {zb})")
    return Report(
        "proximity",
        not violations,
        violations,
        {
            "utilities": [format_rational(v) for v in utilities],
            "relaxed": [format_rational(v) for v in zbar],
            "objective": str(obj),
        },
    )


def check_structure(inst: Instance, alloc: Allocation) -> Report:
    """Every good of canonical block j must be held entirely by agents of block j."""
    cp = canonical_partition(coverage(inst))
    gp = goods_canonical_partition(inst, cp)
    violations = []
    for j, block in enumerate(cp.blocks):
        for gid in gp.block_goods(j):
            inside = sum((s for (i, g), s in alloc.shares.items() if g == gid and i in block), Fraction(0))
            if inside != 1:
                violations.append(f"good {gid} of block {j} has only {inside} inside agents {list(block)}")
    return Report(
        "structure",
        not violations,
        violations,
        {"blocks": [list(b) for b in cp.blocks], "essential_values": list(cp.essential_values)},
    )


def m_convex_set(f: CoverageFn, cap: int = 100_000) -> list[tuple[int, ...]]:
    """Integer vectors x with x(ground) = f(ground) and x(X) >= f(X) for every X."""
    n, total = len(f.ground), f(f.ground)
    size = math.comb(total + n - 1, n - 1) if n else 1
    if size > cap:
        raise CapExceeded(f"{size} candidate vectors exceed the cap {cap}")
    subsets = [
        ([k for k in range(n) if m >> k & 1], f([f.ground[k] for k in range(n) if m >> k & 1]))
        for m in range(1, 1 << n)
    ]
    out = []
    for bars in itertools.combinations(range(total + n - 1), n - 1):
        x = [b - a - 1 for a, b in zip((-1,) + bars, bars + (total + n - 1,))]
        if all(sum(x[k] for k in ks) >= need for ks, need in subsets):
            out.append(tuple(x))
    return out


def check_exchange_axiom(f: CoverageFn, cap: int = 100_000) -> Report:
    """Integral exchange on every pair of the M-convex set, and transitivity of single exchanges."""
    points = m_convex_set(f, cap)
    members = set(points)
    n = len(f.ground)
    violations = []

    def moved(x, i, j):
        y = list(x)
        y[i] -= 1
        y[j] += 1
        return tuple(y)

    for x in points:
        for y in points:
            for i in range(n):
                if x[i] <= y[i]:
                    continue
                if not any(
                    x[j] < y[j] and moved(x, i, j) in members and moved(y, j, i) in members for j in range(n)
                ):
                    violations.append(f"exchange fails for x={x}, y={y}, i={i}")
    for x in points:
        for i, j, k in itertools.permutations(range(n), 3):
            if moved(x, i, j) in members and moved(x, j, k) in members and moved(x, i, k) not in members:
                violations.append(f"transitivity fails for x={x}, i={i}, j={j}, k={k}")
    return Report("exchange", not violations, violations, {"points": len(points)})


# ------------------------------------------------------ hardness fixtures


@dataclass(frozen=True)
class ThreeDM:
    n: int
    triples: tuple[tuple[int, int, int], ...]

    def __post_init__(self):
        object.__setattr__(self, "triples", tuple(tuple(t) for t in self.triples))
        if self.n < 0:
            raise InstanceError("n must be non-negative")
        if len(set(self.triples)) != len(self.triples):
            raise InstanceError("duplicate triples")
        for t in self.triples:
            if len(t) != 3 or not all(0 <= v < self.n for v in t):
                raise InstanceError(f"triple {t} out of range")

    def has_perfect_matching(self) -> bool:
        for chosen in itertools.combinations(self.triples, self.n):
            if all(len({t[axis] for t in chosen}) == self.n for axis in range(3)):
                return True
        return False


def parse_3dm(text) -> ThreeDM:
    data = json.loads(text)
    if not isinstance(data, dict) or "n" not in data or "triples" not in data:
        raise InstanceError("3DM JSON needs 'n' and 'triples'")
    return ThreeDM(data["n"], tuple(tuple(t) for t in data["triples"]))


def dumps_3dm(dm: ThreeDM) -> str:
    return json.dumps({"n": dm.n, "triples": [list(t) for t in dm.triples]})


def _require_triples(dm: ThreeDM) -> None:
    if dm.n and not dm.triples:
        raise InstanceError("3DM instance without triples: its indivisible goods would be desired by nobody")


def gen_3dm_hardness(dm: ThreeDM) -> Instance:
    """The identical-indivisible instance whose fair optimum reveals a perfect matching.

    Agents: x_i, y_i, z_i (3n), their twins x_i', y_i', z_i' (3n), then for
    every triple t the five agents t, t1..t4. Goods: n indivisible goods wanted
    by every t; c_s for each element s (wanted by s, s'); three goods per
    triple wanted by t, t1..t4 and the triple's three elements.
    """
    n, m = dm.n, len(dm.triples)
    _require_triples(dm)
    if m < n:
        log.warning("3DM instance has fewer triples than n; it is a trivial no-instance")
    elements = [f"{axis}{i}" for axis in "xyz" for i in range(n)]
    index = {s: k for k, s in enumerate(elements)}
    names = {str(k): s for k, s in enumerate(elements)}
    names.update({str(3 * n + k): s + "'" for k, s in enumerate(elements)})
    t_agent = {}
    for t in range(m):
        base = 6 * n + 5 * t
        t_agent[t] = base
        names[str(base)] = f"t{t}"
        for r in range(1, 5):
            names[str(base + r)] = f"t{t}^{r}"
    indivisible = [tuple(t_agent[t] for t in range(m))] * n
    divisible = []
    for k, s in enumerate(elements):
        names[good_id(DIVISIBLE, len(divisible))] = f"c_{s}"
        divisible.append((k, 3 * n + k))
    for t, (x, y, z) in enumerate(dm.triples):
        members = sorted([t_agent[t] + r for r in range(5)] + [index[f"x{x}"], index[f"y{y}"], index[f"z{z}"]])
        for r in range(1, 4):
            names[good_id(DIVISIBLE, len(divisible))] = f"c_t{t}^{r}"
            divisible.append(tuple(members))
    for g in range(n):
        names[good_id(INDIVISIBLE, g)] = f"g{g}"
    return Instance(6 * n + 5 * m, tuple(indivisible), tuple(divisible), names)


def find_3dm_profile(inst: Instance, n: int) -> Allocation | None:
    """An allocation with n agents at utility 1 and every other agent at 3/5, if one exists.

    An agent holding an indivisible good is already at 1, so those n holders
    are exactly the agents at 1; the divisible goods must then bring everyone
    else to 3/5 and give the holders nothing.
    """
    for x, who in indivisible_outcomes(inst, bound=[1] * inst.n_agents).items():
        target = [Fraction(1) if v else Fraction(3, 5) for v in x]
        part = _divisible_part(inst, x, target)
        if part is not None:
            return Allocation({(i, good_id(INDIVISIBLE, g)): 1 for g, i in enumerate(who)}).merge(part)
    return None


def gen_realization_hardness(dm: ThreeDM) -> tuple[Instance, UtilityVector]:
    """Agents x, y, z (3n) then one agent per triple; target 1 on triples, 1/3 on elements."""
    n, m = dm.n, len(dm.triples)
    _require_triples(dm)
    names = {str(k): f"{axis}{i}" for k, (axis, i) in enumerate((a, i) for a in "xyz" for i in range(n))}
    names.update({str(3 * n + t): f"t{t}" for t in range(m)})
    indivisible = [tuple(range(3 * n, 3 * n + m))] * n
    divisible = [tuple(sorted((x, n + y, 2 * n + z, 3 * n + t))) for t, (x, y, z) in enumerate(dm.triples)]
    target = tuple([Fraction(1, 3)] * (3 * n) + [Fraction(1)] * m)
    return Instance(3 * n + m, tuple(indivisible), tuple(divisible), names), target


def _divisible_part(inst: Instance, x: Sequence[int], target: Sequence[Fraction]) -> Allocation | None:
    rest = [t - v for t, v in zip(target, x)]
    if any(r < 0 for r in rest) or sum(rest) != len(inst.divisible):
        return None
    return realize_from_utilities(inst, DIVISIBLE, rest)


def realize_mixed_target(inst: Instance, target: Sequence[Fraction], caps: OracleCaps = UNCAPPED) -> Allocation | None:
    """An allocation with utility vector exactly ``target``, by enumerating indivisible outcomes.

    Exponential in general: this is the hard realization problem.
    """
    if len(target) != inst.n_agents:
        raise InstanceError("target length differs from the number of agents")
    _check_caps(inst, caps)
    if sum(target) != inst.n_goods:
        return None
    for x, who in indivisible_outcomes(inst, bound=target).items():
        part = _divisible_part(inst, x, target)
        if part is not None:
            return Allocation({(i, good_id(INDIVISIBLE, g)): 1 for g, i in enumerate(who)}).merge(part)
    return None


# ------------------------------------------------------ random instances


def random_instance(
    rng: random.Random,
    n_agents: int,
    n_indivisible: int,
    n_divisible: int,
    identical_divisible: bool = False,
) -> Instance:
    """Each desire-set drawn uniformly among the non-empty agent subsets."""

    def draw() -> tuple[int, ...]:
        mask = rng.randrange(1, 1 << n_agents)
        return tuple(i for i in range(n_agents) if mask >> i & 1)

    indivisible = [draw() for _ in range(n_indivisible)]
    if identical_divisible:
        d = draw()
        divisible = [d] * n_divisible
    else:
        divisible = [draw() for _ in range(n_divisible)]
    return Instance(n_agents, tuple(indivisible), tuple(divisible))


def random_coverage(rng: random.Random, n_agents: int, n_items: int) -> CoverageFn:
    items = [frozenset(i for i in range(n_agents) if rng.randrange(1, 1 << n_agents) >> i & 1) for _ in range(n_items)]
    return CoverageFn(tuple(range(n_agents)), tuple(d for d in items if d))
