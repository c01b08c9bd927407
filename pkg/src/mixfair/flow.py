"""Integral max-flow, flows with lower bounds, and the allocation networks built on them.

All capacities are Python ints. Rational targets are scaled to a common
denominator before a network is built.
"""

from __future__ import annotations

import contextlib
import contextvars
import math
from collections import deque
from collections.abc import Hashable, Iterable, Mapping, Sequence
from dataclasses import dataclass, field
from fractions import Fraction

from .instance import DIVISIBLE, INDIVISIBLE, Allocation, Instance, InstanceError

_recorded: contextvars.ContextVar[list | None] = contextvars.ContextVar("recorded_networks", default=None)


@contextlib.contextmanager
def recording():
    """Collect ``(label, network)`` for every network solved inside the block."""
    nets: list[tuple[str, FlowNetwork]] = []
    token = _recorded.set(nets)
    try:
        yield nets
    finally:
        _recorded.reset(token)


def _record(net: FlowNetwork) -> None:
    nets = _recorded.get()
    if nets is not None:
        nets.append((net.label, net))


@dataclass(frozen=True)
class Arc:
    tail: Hashable
    head: Hashable
    lower: int
    upper: int


@dataclass
class FlowNetwork:
    source: Hashable | None = None
    sink: Hashable | None = None
    label: str = "network"
    arcs: list[Arc] = field(default_factory=list)
    nodes: dict[Hashable, int] = field(default_factory=dict)

    def add_node(self, node: Hashable) -> None:
        self.nodes.setdefault(node, len(self.nodes))

    def add_arc(self, tail: Hashable, head: Hashable, upper: int, lower: int = 0) -> int:
        if not (isinstance(upper, int) and isinstance(lower, int)):
            raise TypeError("capacities must be integers")
        if not 0 <= lower <= upper:
            raise ValueError(f"bad bounds [{lower}, {upper}] on arc {tail!r}->{head!r}")
        self.add_node(tail)
        self.add_node(head)
        self.arcs.append(Arc(tail, head, lower, upper))
        return len(self.arcs) - 1

    def to_dot(self, flow: Sequence[int] | None = None) -> str:
        ids = {node: f"n{i}" for node, i in self.nodes.items()}
        lines = [f'digraph "{self.label}" {{']
        for node, name in ids.items():
            lines.append(f'  {name} [label="{node}"];')
        for a, arc in enumerate(self.arcs):
            bounds = f"[{arc.lower},{arc.upper}]" if arc.lower else str(arc.upper)
            text = bounds if flow is None else f"{flow[a]}/{bounds}"
            lines.append(f'  {ids[arc.tail]} -> {ids[arc.head]} [label="{text}"];')
        lines.append("}")
        return "\n".join(lines)


class _Dinic:
    def __init__(self, n: int):
        self.n = n
        self.head: list[list[int]] = [[] for _ in range(n)]
        self.to: list[int] = []
        self.cap: list[int] = []

    def add(self, u: int, v: int, c: int) -> int:
        self.head[u].append(len(self.to))
        self.to.append(v)
        self.cap.append(c)
        self.head[v].append(len(self.to))
        self.to.append(u)
        self.cap.append(0)
        return len(self.to) - 2

    def _levels(self, s: int, t: int) -> list[int] | None:
        level = [-1] * self.n
        level[s] = 0
        queue = deque([s])
        while queue:
            u = queue.popleft()
            for e in self.head[u]:
                if self.cap[e] > 0 and level[self.to[e]] < 0:
                    level[self.to[e]] = level[u] + 1
                    queue.append(self.to[e])
        return level if level[t] >= 0 else None

    def _push(self, u: int, t: int, pushed: int, level: list[int], it: list[int]) -> int:
        if u == t:
            return pushed
        edges = self.head[u]
        while it[u] < len(edges):
            e = edges[it[u]]
            v = self.to[e]
            if self.cap[e] > 0 and level[v] == level[u] + 1:
                got = self._push(v, t, min(pushed, self.cap[e]), level, it)
                if got:
                    self.cap[e] -= got
                    self.cap[e ^ 1] += got
                    return got
            it[u] += 1
        return 0

    def run(self, s: int, t: int) -> int:
        total = 0
        if s == t:
            return 0
        while (level := self._levels(s, t)) is not None:
            it = [0] * self.n
            while got := self._push(s, t, math.inf, level, it):
                total += got
        return total

    def reachable(self, s: int) -> set[int]:
        seen = {s}
        stack = [s]
        while stack:
            u = stack.pop()
            for e in self.head[u]:
                if self.cap[e] > 0 and self.to[e] not in seen:
                    seen.add(self.to[e])
                    stack.append(self.to[e])
        return seen

    def co_reachable(self, t: int) -> set[int]:
        """Nodes that can still reach ``t`` in the residual graph."""
        seen = {t}
        stack = [t]
        while stack:
            v = stack.pop()
            for e in self.head[v]:
                # e runs v -> u; its twin u -> v has residual cap[e ^ 1]
                u = self.to[e]
                if self.cap[e ^ 1] > 0 and u not in seen:
                    seen.add(u)
                    stack.append(u)
        return seen


@dataclass(frozen=True)
class FlowResult:
    value: int
    flow: tuple[int, ...]
    source_side: frozenset
    """Nodes reachable from the source in the final residual graph (the smallest min cut)."""
    sink_side: frozenset
    """Nodes that can reach the sink in the final residual graph (the largest min cut's complement)."""


def max_flow(net: FlowNetwork) -> FlowResult:
    """Maximum integral source-sink flow of a network without lower bounds."""
    if net.source is None or net.sink is None:
        raise ValueError("max_flow needs a source and a sink")
    if any(a.lower for a in net.arcs):
        raise ValueError("max_flow does not handle lower bounds; use feasible_flow")
    net.add_node(net.source)
    net.add_node(net.sink)
    _record(net)
    g = _Dinic(len(net.nodes))
    edge_of = [g.add(net.nodes[a.tail], net.nodes[a.head], a.upper) for a in net.arcs]
    s, t = net.nodes[net.source], net.nodes[net.sink]
    value = g.run(s, t)
    flow = tuple(a.upper - g.cap[e] for a, e in zip(net.arcs, edge_of))
    names = list(net.nodes)
    return FlowResult(
        value,
        flow,
        frozenset(names[i] for i in g.reachable(s)),
        frozenset(names[i] for i in g.co_reachable(t)),
    )


@dataclass(frozen=True)
class FeasibleFlow:
    feasible: bool
    flow: tuple[int, ...] | None = None
    cut: frozenset | None = None
    """On infeasibility: a node set whose forced inflow exceeds what can leave it."""


_SUPER_S = ("__super__", "s")
_SUPER_T = ("__super__", "t")


def feasible_flow(net: FlowNetwork) -> FeasibleFlow:
    """An integral flow within ``[lower, upper]`` on every arc, conserving at every node.

    With a designated source and sink, those two nodes are exempt from
    conservation (an unbounded return arc sink -> source is added).
    """
    inner = FlowNetwork(_SUPER_S, _SUPER_T, label=net.label)
    for node in net.nodes:
        inner.add_node(node)
    balance: dict[Hashable, int] = {node: 0 for node in net.nodes}
    for a in net.arcs:
        inner.add_arc(a.tail, a.head, a.upper - a.lower)
        balance[a.head] += a.lower
        balance[a.tail] -= a.lower
    if net.source is not None and net.sink is not None:
        inner.add_arc(net.sink, net.source, sum(a.upper for a in net.arcs) + 1)
    need = 0
    for node, b in balance.items():
        if b > 0:
            inner.add_arc(_SUPER_S, node, b)
            need += b
        elif b < 0:
            inner.add_arc(node, _SUPER_T, -b)
    res = max_flow(inner)
    if res.value < need:
        return FeasibleFlow(False, cut=frozenset(res.source_side - {_SUPER_S}))
    flow = tuple(a.lower + res.flow[i] for i, a in enumerate(net.arcs))
    return FeasibleFlow(True, flow=flow)


# ------------------------------------------------------- allocation networks


def assign_goods(
    goods: Sequence[tuple[str, Iterable[int]]],
    capacity: Mapping[int, Fraction | int],
    label: str = "assignment",
) -> dict[tuple[int, str], Fraction] | None:
    """Allocate every good to its desiring agents so that each agent gets exactly ``capacity``.

    Returns shares keyed by (agent, good id), or None when no such split exists.
    Integral capacities give 0/1 shares.
    """
    total = sum(Fraction(c) for c in capacity.values())
    if total != len(goods):
        return None
    scale = math.lcm(*(Fraction(c).denominator for c in capacity.values())) if capacity else 1
    net = FlowNetwork("s", "t", label=label)
    good_arcs = []
    for gid, agents in goods:
        net.add_arc("s", ("good", gid), scale)
        for i in agents:
            if i in capacity:
                good_arcs.append((net.add_arc(("good", gid), ("agent", i), scale), i, gid))
    for i, c in capacity.items():
        net.add_arc(("agent", i), "t", int(Fraction(c) * scale))
    res = max_flow(net)
    if res.value != len(goods) * scale:
        return None
    return {(i, gid): Fraction(res.flow[a], scale) for a, i, gid in good_arcs if res.flow[a]}


def realize_from_utilities(inst: Instance, kind: str, target: Sequence[Fraction]) -> Allocation | None:
    """An allocation of the goods of ``kind`` whose utility vector equals ``target``.

    Goods of the other kind are ignored (left unallocated). Returns None when
    the target is not achievable.
    """
    if len(target) != inst.n_agents:
        raise InstanceError("target length differs from the number of agents")
    goods = inst.goods(kind)
    if sum(Fraction(x) for x in target) != len(goods):
        raise InstanceError(f"target sums to {sum(target)}, expected {len(goods)} goods of kind {kind}")
    if any(x < 0 for x in target):
        return None
    if kind == INDIVISIBLE and any(Fraction(x).denominator != 1 for x in target):
        return None
    shares = assign_goods(goods, dict(enumerate(target)), label=f"realize-{kind}")
    if shares is None:
        return None
    return Allocation(shares, relaxed=False)


# ------------------------------------------------ essential-block gadget


@dataclass(frozen=True)
class Block:
    """The essential block: N+ (want the divisible goods), N- (do not), and its indivisible goods.

    ``goods`` holds (good id, desiring agents inside the block).
    """

    plus: tuple[int, ...]
    minus: tuple[int, ...]
    goods: tuple[tuple[str, tuple[int, ...]], ...]


@dataclass(frozen=True)
class BlockAssignment:
    counts: Mapping[int, int]
    assignment: Mapping[str, int]
    """good id -> receiving agent."""

    def at_least(self, beta: int, agents: Iterable[int]) -> int:
        return sum(1 for i in agents if self.counts[i] >= beta)


def block_network(block: Block, k: int, ell: int, beta: int) -> FlowNetwork:
    """Lower-bounded network whose feasible flows are the 0/1 assignments meeting the block conditions.

    Each N+ agent routes up to beta-1 goods on a base arc and at most one more
    through a shared overflow budget of capacity k; the N+ total is pinned to ell.
    """
    net = FlowNetwork("s", "t", label=f"block k={k} l={ell} beta={beta}")
    for gid, agents in block.goods:
        net.add_arc("s", ("good", gid), 1, lower=1)
        for i in agents:
            net.add_arc(("good", gid), ("agent", i), 1)
    for i in block.plus:
        net.add_arc(("agent", i), "plus", beta - 1)
        net.add_arc(("agent", i), "budget", 1)
    if block.plus:
        net.add_arc("budget", "plus", k)
        net.add_arc("plus", "t", ell, lower=ell)
    for i in block.minus:
        net.add_arc(("agent", i), "t", beta, lower=max(beta - 1, 0))
    return net


def feasible_block_assignment(block: Block, k: int, ell: int, beta: int) -> BlockAssignment | None:
    """A 0/1 assignment of the block's goods with

    (a) at most ``k`` N+ agents holding exactly ``beta`` goods,
    (b) every N+ agent holding at most ``beta``,
    (c) N+ holding ``ell`` goods in total,
    (d) every N- agent holding ``beta`` or ``beta - 1``;

    or None if none exists.
    """
    if beta < 1:
        raise ValueError("beta must be at least 1")
    if not block.plus and ell:
        return None  # nobody in N+ can hold the ell goods
    net = block_network(block, k, ell, beta)
    res = feasible_flow(net)
    if not res.feasible:
        return None
    assignment = {}
    for a, arc in enumerate(net.arcs):
        if res.flow[a] and isinstance(arc.tail, tuple) and arc.tail[0] == "good":
            assignment[arc.tail[1]] = arc.head[1]
    counts = {i: 0 for i in block.plus + block.minus}
    for i in assignment.values():
        counts[i] += 1
    return BlockAssignment(counts, assignment)
