"""Instances, allocations and utility vectors for binary-valuation fair division.

Agents and goods are 0-based indices in file order. A good is addressed by a
string id: ``"m<j>"`` for the j-th indivisible good and ``"c<j>"`` for the
j-th divisible good. Every share and utility is a :class:`fractions.Fraction`.
"""

from __future__ import annotations

import json
import re
from collections.abc import Iterable, Mapping, Sequence
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Union

INDIVISIBLE = "indivisible"
DIVISIBLE = "divisible"

UtilityVector = tuple[Fraction, ...]

_RATIONAL = re.compile(r"-?\d+(/\d+)?")
_GOOD_ID = re.compile(r"([mc])(\d+)")


class InstanceError(ValueError):
    """Raised for malformed instance, allocation or utility-vector input."""


def good_id(kind: str, index: int) -> str:
    return ("m" if kind == INDIVISIBLE else "c") + str(index)


def split_good_id(gid: str) -> tuple[str, int]:
    m = _GOOD_ID.fullmatch(gid)
    if m is None:
        raise InstanceError(f"bad good id {gid!r}")
    return (INDIVISIBLE if m.group(1) == "m" else DIVISIBLE), int(m.group(2))


def format_rational(x: Fraction | int) -> str:
    return str(Fraction(x))


def parse_rational(text: str) -> Fraction:
    """Parse a lowest-terms ``"p/q"`` (or integer ``"p"``) string."""
    if not isinstance(text, str) or not _RATIONAL.fullmatch(text):
        raise InstanceError(f"not a rational string: {text!r}")
    try:
        value = Fraction(text)
    except ZeroDivisionError:
        raise InstanceError(f"zero denominator in {text!r}") from None
    if str(value) != text:
        raise InstanceError(f"rational {text!r} is not in lowest terms")
    return value


@dataclass(frozen=True)
class Instance:
    """Agents ``0..n_agents-1`` and two ordered lists of desire-sets.

    ``indivisible[j]`` is the sorted tuple of agents that value good ``m<j>``;
    likewise ``divisible[j]`` for ``c<j>``.
    """

    n_agents: int
    indivisible: tuple[tuple[int, ...], ...] = ()
    divisible: tuple[tuple[int, ...], ...] = ()
    names: Mapping[str, str] = field(default_factory=dict, hash=False)

    def __post_init__(self):
        object.__setattr__(self, "indivisible", tuple(tuple(d) for d in self.indivisible))
        object.__setattr__(self, "divisible", tuple(tuple(d) for d in self.divisible))
        if self.n_agents < 0:
            raise InstanceError("n_agents must be non-negative")
        if self.n_agents == 0 and (self.indivisible or self.divisible):
            raise InstanceError("an instance with goods needs at least one agent")
        for kind, sets in ((INDIVISIBLE, self.indivisible), (DIVISIBLE, self.divisible)):
            for j, d in enumerate(sets):
                gid = good_id(kind, j)
                if not d:
                    raise InstanceError(f"good {gid} is desired by nobody")
                if list(d) != sorted(set(d)):
                    raise InstanceError(f"desire-set of {gid} must be sorted without duplicates")
                if d[0] < 0 or d[-1] >= self.n_agents:
                    raise InstanceError(f"desire-set of {gid} references an unknown agent")

    @property
    def agents(self) -> range:
        return range(self.n_agents)

    @property
    def n_goods(self) -> int:
        return len(self.indivisible) + len(self.divisible)

    def goods(self, kind: str | None = None) -> list[tuple[str, tuple[int, ...]]]:
        """(good id, desire-set) pairs, indivisible first."""
        out = []
        if kind in (None, INDIVISIBLE):
            out += [(good_id(INDIVISIBLE, j), d) for j, d in enumerate(self.indivisible)]
        if kind in (None, DIVISIBLE):
            out += [(good_id(DIVISIBLE, j), d) for j, d in enumerate(self.divisible)]
        return out

    def desire(self, gid: str) -> tuple[int, ...]:
        kind, j = split_good_id(gid)
        sets = self.indivisible if kind == INDIVISIBLE else self.divisible
        if j >= len(sets):
            raise InstanceError(f"unknown good {gid}")
        return sets[j]

    def restrict(self, kind: str) -> Instance:
        """The same agents with only the goods of one kind."""
        if kind == INDIVISIBLE:
            return Instance(self.n_agents, self.indivisible, (), dict(self.names))
        return Instance(self.n_agents, (), self.divisible, dict(self.names))


@dataclass(frozen=True)
class Allocation:
    """Shares keyed by ``(agent, good id)``; absent keys mean zero.

    ``relaxed`` allows fractional shares of indivisible goods.
    """

    shares: Mapping[tuple[int, str], Fraction] = field(default_factory=dict, hash=False)
    relaxed: bool = False

    def __post_init__(self):
        cleaned = {}
        for (agent, gid), share in self.shares.items():
            share = Fraction(share)
            if share != 0:
                cleaned[(agent, gid)] = share
        object.__setattr__(self, "shares", dict(sorted(cleaned.items(), key=_share_order)))

    def share(self, agent: int, gid: str) -> Fraction:
        return self.shares.get((agent, gid), Fraction(0))

    def merge(self, other: Allocation) -> Allocation:
        """Union of two allocations over disjoint goods."""
        overlap = {g for _, g in self.shares} & {g for _, g in other.shares}
        if overlap:
            raise InstanceError(f"allocations overlap on goods {sorted(overlap)}")
        return Allocation({**self.shares, **other.shares}, self.relaxed or other.relaxed)


def _share_order(item):
    (agent, gid), _ = item
    kind, j = split_good_id(gid)
    return (kind != INDIVISIBLE, j, agent)


@dataclass(frozen=True)
class GoodsPartition:
    """Block-wise partition of the indivisible and divisible goods (indices)."""

    indivisible_blocks: tuple[tuple[int, ...], ...]
    divisible_blocks: tuple[tuple[int, ...], ...]

    def block_goods(self, j: int) -> list[str]:
        return [good_id(INDIVISIBLE, g) for g in self.indivisible_blocks[j]] + [
            good_id(DIVISIBLE, c) for c in self.divisible_blocks[j]
        ]


# ---------------------------------------------------------------- JSON I/O


def _load(text: Union[bytes, str]):
    if isinstance(text, bytes):
        text = text.decode("utf-8")
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise InstanceError(f"malformed JSON: {exc}") from exc


def _desire_sets(raw, what: str) -> tuple[tuple[int, ...], ...]:
    if not isinstance(raw, list):
        raise InstanceError(f"{what!r} must be a list of desire-sets")
    out = []
    for j, d in enumerate(raw):
        if not isinstance(d, list) or not all(isinstance(i, int) and not isinstance(i, bool) for i in d):
            raise InstanceError(f"{what}[{j}] must be a list of agent indices")
        if len(set(d)) != len(d):
            raise InstanceError(f"{what}[{j}] has duplicate agents")
        out.append(tuple(sorted(d)))
    return tuple(out)


def instance_from_dict(data) -> Instance:
    if not isinstance(data, dict) or "agents" not in data:
        raise InstanceError("instance JSON must be an object with an 'agents' field")
    n = data["agents"]
    if not isinstance(n, int) or isinstance(n, bool) or n < 1:
        raise InstanceError("'agents' must be a positive integer")
    names = data.get("names", {})
    if not isinstance(names, dict) or not all(isinstance(v, str) for v in names.values()):
        raise InstanceError("'names' must map ids to strings")
    return Instance(
        n,
        _desire_sets(data.get("indivisible", []), "indivisible"),
        _desire_sets(data.get("divisible", []), "divisible"),
        {str(k): v for k, v in names.items()},
    )


def parse_instance(text: Union[bytes, str]) -> Instance:
    """Parse and validate instance JSON.

    >>> parse_instance('{"agents": 3, "indivisible": [[0,1,2]], "divisible": [[0,1,2]]}').n_goods
    2
    """
    return instance_from_dict(_load(text))


def instance_to_dict(inst: Instance) -> dict:
    data = {
        "agents": inst.n_agents,
        "indivisible": [list(d) for d in inst.indivisible],
        "divisible": [list(d) for d in inst.divisible],
    }
    if inst.names:
        data["names"] = dict(inst.names)
    return data


def dumps_instance(inst: Instance) -> str:
    return json.dumps(instance_to_dict(inst), indent=2)


def allocation_to_dict(alloc: Allocation) -> dict:
    return {
        "relaxed": alloc.relaxed,
        "shares": [
            {"agent": agent, "good": gid, "share": format_rational(s)}
            for (agent, gid), s in alloc.shares.items()
        ],
    }


def allocation_from_dict(data) -> Allocation:
    if not isinstance(data, dict) or not isinstance(data.get("shares"), list):
        raise InstanceError("allocation JSON must have a 'shares' list")
    relaxed = data.get("relaxed", False)
    if not isinstance(relaxed, bool):
        raise InstanceError("'relaxed' must be a boolean")
    shares: dict[tuple[int, str], Fraction] = {}
    for entry in data["shares"]:
        try:
            agent, gid, share = entry["agent"], entry["good"], entry["share"]
        except (KeyError, TypeError) as exc:
            raise InstanceError(f"bad share entry {entry!r}") from exc
        if not isinstance(agent, int) or isinstance(agent, bool):
            raise InstanceError(f"bad agent in share entry {entry!r}")
        split_good_id(gid)
        if (agent, gid) in shares:
            raise InstanceError(f"duplicate share for agent {agent}, good {gid}")
        shares[(agent, gid)] = parse_rational(share)
    return Allocation(shares, relaxed)


def parse_allocation(text: Union[bytes, str]) -> Allocation:
    return allocation_from_dict(_load(text))


def dumps_allocation(alloc: Allocation) -> str:
    return json.dumps(allocation_to_dict(alloc), indent=2)


def utilities_to_dict(u: Sequence[Fraction]) -> dict:
    return {"utilities": [format_rational(x) for x in u]}


def utilities_from_dict(data) -> UtilityVector:
    if not isinstance(data, dict) or not isinstance(data.get("utilities"), list):
        raise InstanceError("utility JSON must have a 'utilities' list")
    return tuple(parse_rational(x) for x in data["utilities"])


def parse_utilities(text: Union[bytes, str]) -> UtilityVector:
    return utilities_from_dict(_load(text))


def dumps_utilities(u: Sequence[Fraction]) -> str:
    return json.dumps(utilities_to_dict(u))


# ---------------------------------------------------------------- semantics


def utility_vector(inst: Instance, alloc: Allocation) -> UtilityVector:
    """Per-agent sum of received shares (binary valuations)."""
    u = [Fraction(0)] * inst.n_agents
    for (agent, gid), share in alloc.shares.items():
        if not 0 <= agent < inst.n_agents:
            raise InstanceError(f"allocation names unknown agent {agent}")
        if agent in inst.desire(gid):
            u[agent] += share
    return tuple(u)


def validate_allocation(inst: Instance, alloc: Allocation) -> list[str]:
    """Every violated allocation invariant, as human-readable messages."""
    problems = []
    totals: dict[str, Fraction] = {gid: Fraction(0) for gid, _ in inst.goods()}
    for (agent, gid), share in alloc.shares.items():
        if gid not in totals:
            problems.append(f"unknown good {gid}")
            continue
        if not 0 <= agent < inst.n_agents:
            problems.append(f"unknown agent {agent} for good {gid}")
            continue
        if not 0 <= share <= 1:
            problems.append(f"share {share} of {gid} to agent {agent} outside [0, 1]")
        if agent not in inst.desire(gid):
            problems.append(f"agent {agent} receives {gid} without desiring it")
        if gid.startswith("m") and not alloc.relaxed and share not in (0, 1):
            problems.append(f"indivisible {gid} split: agent {agent} holds {share}")
        totals[gid] += share
    for gid, total in totals.items():
        if total != 1:
            problems.append(f"good {gid} allocated {total} in total, expected 1")
    return problems


def goods_identical(inst: Instance, kind: str) -> bool:
    sets = inst.indivisible if kind == INDIVISIBLE else inst.divisible
    return len(set(sets)) <= 1


def goods_canonical_partition(inst: Instance, cp) -> GoodsPartition:
    """Assign each good to the first agent block whose cumulative union covers its desire-set."""
    blocks = [set(b) for b in cp.blocks]
    union = set().union(*blocks) if blocks else set()
    if union != set(inst.agents) or sum(len(b) for b in blocks) != inst.n_agents:
        raise InstanceError("canonical partition blocks do not partition the agents")
    cumulative: list[set[int]] = []
    acc: set[int] = set()
    for b in blocks:
        acc = acc | b
        cumulative.append(acc)

    def place(sets: Iterable[tuple[int, ...]]) -> tuple[tuple[int, ...], ...]:
        out: list[list[int]] = [[] for _ in blocks]
        for g, d in enumerate(sets):
            j = next(j for j, u in enumerate(cumulative) if set(d) <= u)
            out[j].append(g)
        return tuple(tuple(x) for x in out)

    return GoodsPartition(place(inst.indivisible), place(inst.divisible))
