"""Individual and core stability, with deviation witnesses.

Individual stability: no player can strictly lower its error by moving into
another existing coalition whose members all weakly accept it, or by going
alone. Core stability: no group of players can all strictly lower their
errors by forming a coalition of their own.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from fractions import Fraction

from .enumeration import (
    EnumerationBudget,
    GameTable,
    iter_partition_masks,
    masks_to_partition,
    partition_to_masks,
    resolve_budget,
)
from .model import Coalition, Instance, Partition, err_player

DEFAULT_MAX_STEPS = 1000


class DeviationKind(enum.Enum):
    JOIN_COALITION = "join"
    GO_ALONE = "alone"
    BLOCKING_COALITION = "block"


@dataclass(frozen=True)
class Deviation:
    kind: DeviationKind
    player: int | None
    target: tuple[int, ...]

    def __post_init__(self) -> None:
        if self.kind is DeviationKind.BLOCKING_COALITION:
            if self.player is not None or not self.target:
                raise ValueError("a blocking deviation carries a non-empty player set and no single player")
        elif self.player is None:
            raise ValueError(f"{self.kind.value} deviation needs a player")
        elif self.kind is DeviationKind.GO_ALONE and self.target:
            raise ValueError("go-alone deviation has an empty target")

    def describe(self) -> str:
        if self.kind is DeviationKind.JOIN_COALITION:
            return f"player {self.player} → coalition {{{','.join(map(str, self.target))}}}"
        if self.kind is DeviationKind.GO_ALONE:
            return f"player {self.player} → alone"
        return f"blocking coalition {{{','.join(map(str, self.target))}}}"


def find_is_deviation(partition: Partition, inst: Instance) -> Deviation | None:
    """First IS deviation in scan order: players ascending, targets canonical, alone last."""
    params = inst.params
    for j in range(inst.n_players):
        current = partition.coalition_of(j)
        now = err_player(j, current, params)
        n_j = inst.players[j].n
        for target in partition:
            if target is current:
                continue
            joined = target.with_player(j, n_j)
            if err_player(j, joined, params) >= now:
                continue
            if all(err_player(k, joined, params) <= err_player(k, target, params) for k in target):
                return Deviation(DeviationKind.JOIN_COALITION, j, target.members)
        if len(current) > 1 and params.mu_e / n_j < now:
            return Deviation(DeviationKind.GO_ALONE, j, ())
    return None


def is_individually_stable(partition: Partition, inst: Instance) -> tuple[bool, Deviation | None]:
    witness = find_is_deviation(partition, inst)
    return witness is None, witness


def is_core_stable(
    partition: Partition, inst: Instance, budget: EnumerationBudget | int | None = None
) -> tuple[bool, Deviation | None]:
    """Subset scan for a blocking coalition; witness is the lexicographically first one."""
    n = inst.n_players
    resolve_budget(budget).check(n, "subsets")
    table = GameTable(inst, budget)
    current = {}
    for mask in partition_to_masks(partition):
        for j in range(n):
            if mask >> j & 1:
                current[j] = table.err_rank[j][mask]
    blocking = []
    for mask in range(1, 1 << n):
        members = [j for j in range(n) if mask >> j & 1]
        if all(table.err_rank[j][mask] < current[j] for j in members):
            blocking.append(tuple(members))
    if not blocking:
        return True, None
    return False, Deviation(DeviationKind.BLOCKING_COALITION, None, min(blocking))


def _is_stable_masks(masks: tuple[int, ...], table: GameTable) -> bool:
    rank = table.err_rank
    n = table.n
    bits = [1 << j for j in range(n)]
    for cm in masks:
        for j in range(n):
            bit = bits[j]
            if not cm & bit:
                continue
            row = rank[j]
            now = row[cm]
            for target in masks:
                if target == cm:
                    continue
                joined = target | bit
                if row[joined] >= now:
                    continue
                t = target
                accepted = True
                while t:
                    low = t & -t
                    k = low.bit_length() - 1
                    if rank[k][joined] > rank[k][target]:
                        accepted = False
                        break
                    t ^= low
                if accepted:
                    return False
            if cm != bit and row[bit] < now:
                return False
    return True


def iter_is_masks(inst: Instance, table: GameTable | None = None, budget=None):
    table = table or GameTable(inst, budget)
    for masks in iter_partition_masks(inst.n_players):
        if _is_stable_masks(masks, table):
            yield masks


def all_is_partitions(inst: Instance, budget: EnumerationBudget | int | None = None) -> list[Partition]:
    """Every individually stable partition, in canonical enumeration order."""
    table = GameTable(inst, budget)
    return [masks_to_partition(inst, m) for m in iter_is_masks(inst, table)]


def apply_deviation(partition: Partition, inst: Instance, deviation: Deviation) -> Partition:
    if deviation.kind is DeviationKind.BLOCKING_COALITION:
        movers = set(deviation.target)
        groups = [[i for i in c if i not in movers] for c in partition]
        groups = [g for g in groups if g] + [sorted(movers)]
        return Partition.from_groups(inst, groups)
    j = deviation.player
    groups = []
    for c in partition:
        members = [i for i in c if i != j]
        if c.members == deviation.target:
            members.append(j)
        if members:
            groups.append(members)
    if deviation.kind is DeviationKind.GO_ALONE:
        groups.append([j])
    return Partition.from_groups(inst, groups)


def deviation_dynamics(
    start: Partition, inst: Instance, max_steps: int = DEFAULT_MAX_STEPS
) -> tuple[Partition, int, bool]:
    """Apply the IS witness deviation repeatedly until none is left or ``max_steps`` runs out."""
    if max_steps < 1:
        raise ValueError("max_steps must be >= 1")
    current = start
    for step in range(max_steps + 1):
        witness = find_is_deviation(current, inst)
        if witness is None:
            return current, step, True
        if step == max_steps:
            break
        current = apply_deviation(current, inst, witness)
    return current, max_steps, False


def partner_mass(j: int, coalition: Coalition) -> int:
    return coalition.total_mass - coalition.size_of(j)


def errors_under(partition: Partition, inst: Instance) -> dict[int, Fraction]:
    return {j: err_player(j, c, inst.params) for c in partition for j in c}
