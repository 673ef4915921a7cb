"""Greedy construction of a minimum-cost partition.

Players are sorted by sample count and absorbed one at a time into a single
growing coalition, stopping at the first player whose error would go up by
joining. Everyone not absorbed learns locally.
"""

from __future__ import annotations

import enum
from fractions import Fraction

from .model import Coalition, GameParams, Instance, MembershipError, Partition, err_player


class SizeClass(enum.Enum):
    SMALL = "small"
    CRITICAL = "critical"
    LARGE = "large"


def classify(n: int, params: GameParams) -> SizeClass:
    threshold = params.critical_size
    if n < threshold:
        return SizeClass.SMALL
    if n == threshold:
        return SizeClass.CRITICAL
    return SizeClass.LARGE


def local_error(n: int, params: GameParams) -> Fraction:
    return params.mu_e / n


def wants_to_join(j: int, target: Coalition, inst: Instance) -> bool:
    """Weak preference: joining must not raise ``j``'s error above local learning."""
    if j in target:
        raise MembershipError(f"player {j} is already in {set(target.members)}")
    n_j = inst.players[j].n
    joined = target.with_player(j, n_j)
    return err_player(j, joined, inst.params) <= local_error(n_j, inst.params)


def wants_to_leave(j: int, coalition: Coalition, inst: Instance) -> bool:
    """Strict preference for local learning over staying in ``coalition``."""
    if j not in coalition:
        raise MembershipError(f"player {j} is not in {set(coalition.members)}")
    if len(coalition) == 1:
        return False
    n_j = coalition.size_of(j)
    return err_player(j, coalition, inst.params) > local_error(n_j, inst.params)


def ascending_order(inst: Instance) -> list[int]:
    return sorted(range(inst.n_players), key=lambda i: (inst.players[i].n, i))


def greedy_sweep(inst: Instance) -> tuple[list[int], list[tuple[int, bool]]]:
    """Run the sweep and return the absorbed prefix plus each join decision made."""
    order = ascending_order(inst)
    grown = inst.coalition([order[0]])
    absorbed = [order[0]]
    decisions: list[tuple[int, bool]] = []
    for j in order[1:]:
        ok = wants_to_join(j, grown, inst)
        decisions.append((j, ok))
        if not ok:
            break
        grown = grown.with_player(j, inst.players[j].n)
        absorbed.append(j)
    return absorbed, decisions


def optimal_partition(inst: Instance) -> Partition:
    absorbed, _ = greedy_sweep(inst)
    chosen = set(absorbed)
    groups = [absorbed] + [[i] for i in range(inst.n_players) if i not in chosen]
    partition = Partition.from_groups(inst, groups)
    assert sum(1 for c in partition if len(c) > 1) <= 1
    return partition
