"""Exhaustive enumeration of set partitions and subsets, and the brute-force optimum.

Partitions are produced in lexicographic restricted-growth-string order. That
order is also the tie-break order wherever a search picks "the first" result.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Iterator, Sequence

from .model import Instance, Partition, coalition_cost

DEFAULT_MAX_PLAYERS = 12
BUDGET_ENV = "FEDGAME_BUDGET"


class BudgetError(RuntimeError):
    """An exhaustive operation was asked to run on too many players."""

    def __init__(self, n: int, limit: int, what: str = "partitions"):
        self.n = n
        self.limit = limit
        if what == "partitions":
            count = f"Bell({n}) = {bell_number(n):,} partitions"
        else:
            count = f"2^{n} = {2**n:,} subsets"
        super().__init__(f"{n} players exceeds the enumeration budget of {limit} ({count})")


@dataclass(frozen=True)
class EnumerationBudget:
    max_players: int = DEFAULT_MAX_PLAYERS

    def __post_init__(self) -> None:
        if self.max_players < 1:
            raise ValueError("max_players must be >= 1")

    @classmethod
    def from_env(cls) -> EnumerationBudget:
        raw = os.environ.get(BUDGET_ENV)
        return cls(int(raw)) if raw else cls()

    def check(self, n: int, what: str = "partitions") -> None:
        if n > self.max_players:
            raise BudgetError(n, self.max_players, what)


def resolve_budget(budget: EnumerationBudget | int | None) -> EnumerationBudget:
    if budget is None:
        return EnumerationBudget.from_env()
    if isinstance(budget, int):
        return EnumerationBudget(budget)
    return budget


def bell_number(n: int) -> int:
    """Bell number via the Bell triangle."""
    if n < 0:
        raise ValueError("n must be non-negative")
    row = [1]
    for _ in range(n):
        nxt = [row[-1]]
        for x in row:
            nxt.append(nxt[-1] + x)
        row = nxt
    return row[0]


def iter_rgs(n: int) -> Iterator[tuple[int, ...]]:
    """Restricted growth strings of length ``n`` in lexicographic order."""
    if n < 1:
        raise ValueError("n must be >= 1")
    codes = [0] * n
    # prefix_max[i] = max(codes[0..i])
    prefix_max = [0] * n
    while True:
        yield tuple(codes)
        i = n - 1
        while i > 0 and codes[i] > prefix_max[i - 1]:
            i -= 1
        if i == 0:
            return
        codes[i] += 1
        prefix_max[i] = max(prefix_max[i - 1], codes[i])
        for k in range(i + 1, n):
            codes[k] = 0
            prefix_max[k] = prefix_max[i]


def rgs_to_masks(codes: Sequence[int]) -> tuple[int, ...]:
    blocks = [0] * (max(codes) + 1)
    for player, block in enumerate(codes):
        blocks[block] |= 1 << player
    return tuple(blocks)


def iter_partition_masks(n: int) -> Iterator[tuple[int, ...]]:
    """Partitions as tuples of bitmasks, same order as :func:`iter_partitions`.

    Blocks come out ordered by smallest member, i.e. already canonical.
    """
    for codes in iter_rgs(n):
        yield rgs_to_masks(codes)


def mask_members(mask: int) -> tuple[int, ...]:
    out = []
    i = 0
    while mask:
        if mask & 1:
            out.append(i)
        mask >>= 1
        i += 1
    return tuple(out)


def masks_to_partition(inst: Instance, masks: Iterable[int]) -> Partition:
    return Partition(tuple(inst.coalition(mask_members(m)) for m in masks))


def partition_to_masks(partition: Partition) -> tuple[int, ...]:
    return tuple(sum(1 << j for j in c.members) for c in partition)


def iter_partitions(
    n: int | Instance, budget: EnumerationBudget | int | None = None
) -> Iterator[Partition]:
    """Every set partition of the players, each exactly once.

    Given an int, coalitions carry unit sizes; pass an :class:`Instance` to get
    coalitions carrying the real sample counts.
    """
    inst = n if isinstance(n, Instance) else Instance.from_sizes(1, 1, [1] * n)
    resolve_budget(budget).check(inst.n_players)
    for masks in iter_partition_masks(inst.n_players):
        yield masks_to_partition(inst, masks)


def iter_subsets(items: Iterable[int], budget: EnumerationBudget | int | None = None) -> Iterator[frozenset[int]]:
    """All subsets of ``items`` (empty set first), in bitmask order over the sorted items."""
    ordered = sorted(set(items))
    resolve_budget(budget).check(len(ordered), "subsets")
    for mask in range(1 << len(ordered)):
        yield frozenset(ordered[i] for i in range(len(ordered)) if mask >> i & 1)


class GameTable:
    """Per-subset quantities for one instance, indexed by bitmask.

    ``cost_int[mask]`` is the coalition cost scaled by a common denominator so
    partition costs can be summed and compared as plain integers.
    ``err_rank[j][mask]`` is the rank of ``err_j(mask)`` among all error values
    of the instance: rank comparisons agree exactly with Fraction comparisons.
    """

    def __init__(self, inst: Instance, budget: EnumerationBudget | int | None = None):
        resolve_budget(budget).check(inst.n_players)
        self.inst = inst
        n = inst.n_players
        self.n = n
        sizes = inst.sizes
        mu, s2 = inst.params.mu_e, inst.params.sigma2
        full = 1 << n
        mass = [0] * full
        sumsq = [0] * full
        for mask in range(1, full):
            low = mask & -mask
            j = low.bit_length() - 1
            mass[mask] = mass[mask ^ low] + sizes[j]
            sumsq[mask] = sumsq[mask ^ low] + sizes[j] ** 2
        self.mass = mass
        self.sumsq = sumsq

        cost = [Fraction(0)] * full
        for mask in range(1, full):
            cost[mask] = mu + s2 * mass[mask] - s2 * Fraction(sumsq[mask], mass[mask])
        self.cost = cost
        denom = math.lcm(*(c.denominator for c in cost[1:]))
        self.cost_scale = denom
        self.cost_int = [c.numerator * (denom // c.denominator) for c in cost]

        err: list[dict[int, Fraction]] = [dict() for _ in range(n)]
        for mask in range(1, full):
            t = mass[mask]
            base = mu / t
            for j in range(n):
                if mask >> j & 1:
                    nj = sizes[j]
                    err[j][mask] = base + s2 * Fraction(sumsq[mask] - nj * nj + (t - nj) ** 2, t * t)
        self.err = err
        distinct = sorted({v for row in err for v in row.values()})
        rank_of = {v: r for r, v in enumerate(distinct)}
        self.err_rank = [{m: rank_of[v] for m, v in row.items()} for row in err]

    def partition_cost(self, masks: Iterable[int]) -> Fraction:
        return sum((self.cost[m] for m in masks), Fraction(0))

    def scaled_cost(self, masks: Iterable[int]) -> int:
        return sum(self.cost_int[m] for m in masks)

    def unscale(self, value: int) -> Fraction:
        return Fraction(value, self.cost_scale)


def brute_force_optimal(
    inst: Instance, budget: EnumerationBudget | int | None = None
) -> tuple[Partition, Fraction]:
    """Minimum-cost partition by exhaustive scan; ties go to the first in canonical order."""
    table = GameTable(inst, budget)
    best_masks: tuple[int, ...] | None = None
    best = 0
    cost_int = table.cost_int
    for masks in iter_partition_masks(inst.n_players):
        value = 0
        for m in masks:
            value += cost_int[m]
        if best_masks is None or value < best:
            best, best_masks = value, masks
    assert best_masks is not None
    partition = masks_to_partition(inst, best_masks)
    cost = table.unscale(best)
    # the scaled scan must agree with the closed form on the winner
    assert cost == sum((coalition_cost(c, inst.params) for c in partition), Fraction(0))
    return partition, cost
