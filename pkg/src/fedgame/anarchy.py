"""Price of Anarchy / Stability and the per-player bounds behind the factor-9 bound."""

from __future__ import annotations

import enum
import random
from dataclasses import dataclass
from fractions import Fraction

from .enumeration import GameTable, iter_partition_masks, masks_to_partition
from .model import Coalition, GameParams, Instance, Partition, err_player
from .reports import CheckReport, ReportBuilder, instance_to_dict
from .stability import _is_stable_masks, is_individually_stable

POA_BOUND = 9
SMALL_PLAYER_CONSTANT = Fraction(29, 4)  # 7.25: per-player bound for small players with heavy partners
SMALL_PLAYER_SLACK = Fraction(15, 2)  # 7.5: looser constant that still yields the factor-9 bound


class PlayerType(enum.Enum):
    T0 = "T0"
    T1 = "T1"
    T2 = "T2"
    T3 = "T3"


@dataclass(frozen=True)
class PoAReport:
    poa: Fraction
    pos: Fraction
    worst_is: Partition
    best_is: Partition
    opt: Partition
    opt_cost: Fraction
    worst_cost: Fraction
    best_cost: Fraction
    n_stable: int
    stability: str = "is"

    def __post_init__(self) -> None:
        if self.poa < 1 or self.pos < 1:
            raise ValueError("price ratios below 1 mean the optimum is wrong")


def large_threshold(params: GameParams) -> Fraction:
    """(mu_e + sigma2) / (2 sigma2): at or above it a player is type T0."""
    return (params.mu_e + params.sigma2) / (2 * params.sigma2)


def tiny_threshold(params: GameParams) -> Fraction:
    """mu_e / (9 sigma2): below it a player is type T2 or T3."""
    return params.mu_e / (9 * params.sigma2)


def partner_threshold(params: GameParams) -> Fraction:
    """mu_e / (3 sigma2): the partner mass separating T2 from T3."""
    return params.mu_e / (3 * params.sigma2)


def _core_stable_masks(masks: tuple[int, ...], table: GameTable) -> bool:
    n = table.n
    current = [0] * n
    for m in masks:
        for j in range(n):
            if m >> j & 1:
                current[j] = table.err_rank[j][m]
    for s in range(1, 1 << n):
        blocked = True
        t = s
        while t:
            low = t & -t
            j = low.bit_length() - 1
            if table.err_rank[j][s] >= current[j]:
                blocked = False
                break
            t ^= low
        if blocked:
            return False
    return True


def price_of_anarchy(inst: Instance, stability: str = "is", budget=None) -> PoAReport:
    """Exact PoA and PoS by full enumeration.

    PoA always uses individually stable partitions. ``stability="core"`` switches
    only the PoS numerator to the best core-stable partition.
    """
    if stability not in ("is", "core"):
        raise ValueError(f"unknown stability notion {stability!r}")
    table = GameTable(inst, budget)
    cost_int = table.cost_int
    opt = worst = best = None
    opt_v = worst_v = best_v = 0
    n_stable = 0
    for masks in iter_partition_masks(inst.n_players):
        v = sum(cost_int[m] for m in masks)
        if opt is None or v < opt_v:
            opt, opt_v = masks, v
        if not _is_stable_masks(masks, table):
            continue
        n_stable += 1
        if worst is None or v > worst_v:
            worst, worst_v = masks, v
        if stability == "is" and (best is None or v < best_v):
            best, best_v = masks, v
    if worst is None:
        raise ValueError("instance has no individually stable partition")
    if stability == "core":
        for masks in iter_partition_masks(inst.n_players):
            v = sum(cost_int[m] for m in masks)
            if (best is None or v < best_v) and _core_stable_masks(masks, table):
                best, best_v = masks, v
        if best is None:
            raise ValueError("instance has no core-stable partition")
    opt_cost = table.unscale(opt_v)
    return PoAReport(
        poa=Fraction(worst_v, opt_v),
        pos=Fraction(best_v, opt_v),
        worst_is=masks_to_partition(inst, worst),
        best_is=masks_to_partition(inst, best),
        opt=masks_to_partition(inst, opt),
        opt_cost=opt_cost,
        worst_cost=table.unscale(worst_v),
        best_cost=table.unscale(best_v),
        n_stable=n_stable,
        stability=stability,
    )


def verify_poa_bound(inst: Instance, budget=None) -> tuple[Fraction, bool]:
    poa = price_of_anarchy(inst, budget=budget).poa
    return poa, poa <= POA_BOUND


def player_type(n: int, mass_of_partners: int, params: GameParams) -> PlayerType:
    if n >= large_threshold(params):
        return PlayerType.T0
    if n >= tiny_threshold(params):
        return PlayerType.T1
    if mass_of_partners >= partner_threshold(params):
        return PlayerType.T2
    return PlayerType.T3


def classify_types(reference: Partition, inst: Instance) -> dict[int, PlayerType]:
    out = {}
    for c in reference:
        for j in c:
            n = c.size_of(j)
            out[j] = player_type(n, c.total_mass - n, inst.params)
    return out


def err_lower_bound(n: int, params: GameParams) -> Fraction:
    """Smallest error a player of size ``n`` can reach in any coalition."""
    if n >= large_threshold(params):
        return params.mu_e / (2 * n)
    return params.sigma2


def check_err_upper_bound_is(partition: Partition, inst: Instance) -> CheckReport:
    """In an IS partition nobody does worse than learning alone."""
    stable, witness = is_individually_stable(partition, inst)
    if not stable:
        raise ValueError(f"partition is not individually stable ({witness.describe()})")
    report = ReportBuilder("err_upper_bound_is")
    for c in partition:
        for j in c:
            e = err_player(j, c, inst.params)
            bound = inst.params.mu_e / c.size_of(j)
            report.record(
                e <= bound,
                {"instance": instance_to_dict(inst), "groups": partition.groups(), "player": j},
            )
    return report.build()


def _random_subset(rng: random.Random, pool: list[int]) -> list[int]:
    return [i for i in pool if rng.random() < 0.5]


def check_err_lower_bound(inst: Instance, samples: int, seed: int = 0) -> CheckReport:
    rng = random.Random(f"err_lower_bound:{seed}")
    report = ReportBuilder("err_lower_bound")
    for _ in range(samples):
        j = rng.randrange(inst.n_players)
        partners = _random_subset(rng, [i for i in range(inst.n_players) if i != j])
        e = err_player(j, inst.coalition(partners + [j]), inst.params)
        report.record(
            e >= err_lower_bound(inst.players[j].n, inst.params),
            {"instance": instance_to_dict(inst), "player": j, "partners": partners},
        )
    return report.build()


def small_player_case_ok(j: int, partners: list[int], inst: Instance) -> tuple[bool, Fraction]:
    """Returns (bound holds, err / sigma2) for player ``j`` joining ``partners``."""
    e = err_player(j, inst.coalition(partners + [j]), inst.params)
    ratio = e / inst.params.sigma2
    return ratio <= SMALL_PLAYER_CONSTANT, ratio


def check_small_player_upper(inst: Instance, samples: int, seed: int = 0, attempts: int = 64) -> CheckReport:
    """Error stays below 7.25 sigma2 whenever the partners' mass reaches mu_e/(3 sigma2).

    Draws that miss the mass condition are retried up to ``attempts`` times and
    are not counted as trials. ``details`` records the largest err/sigma2 seen
    and whether the looser 7.5 constant also holds.
    """
    rng = random.Random(f"small_player_upper:{seed}")
    threshold = partner_threshold(inst.params)
    report = ReportBuilder("small_player_upper")
    worst = Fraction(0)
    for _ in range(samples):
        for _ in range(attempts):
            j = rng.randrange(inst.n_players)
            partners = _random_subset(rng, [i for i in range(inst.n_players) if i != j])
            if sum(inst.players[i].n for i in partners) >= threshold:
                break
        else:
            continue
        ok, ratio = small_player_case_ok(j, partners, inst)
        worst = max(worst, ratio)
        report.record(ok, {"instance": instance_to_dict(inst), "player": j, "partners": partners})
    report.details.update(max_ratio=worst, holds_7_25=worst <= SMALL_PLAYER_CONSTANT, holds_7_5=worst <= SMALL_PLAYER_SLACK)
    return report.build()


def relaxed_violation(partition: Partition, inst: Instance) -> bool:
    """True if a multi-coalition partition has a player with light partners."""
    if len(partition) < 2:
        return False
    threshold = partner_threshold(inst.params)
    return any(c.total_mass - c.size_of(j) <= threshold for c in partition for j in c)


def check_relaxed_structure(inst: Instance, budget=None) -> CheckReport:
    """All players at most mu_e/(3 sigma2): any IS partition where someone's partners
    weigh at most mu_e/(3 sigma2) must be the grand coalition."""
    threshold = partner_threshold(inst.params)
    if any(n > threshold for n in inst.sizes):
        raise ValueError(f"every player must have at most {threshold} samples")
    table = GameTable(inst, budget)
    report = ReportBuilder("relaxed_structure")
    for masks in iter_partition_masks(inst.n_players):
        if not _is_stable_masks(masks, table):
            continue
        partition = masks_to_partition(inst, masks)
        report.record(
            not relaxed_violation(partition, inst),
            {"instance": instance_to_dict(inst), "groups": partition.groups()},
        )
    return report.build()


def t3_clusters(partition: Partition, inst: Instance) -> list[Coalition]:
    types = classify_types(partition, inst)
    return [c for c in partition if any(types[j] is PlayerType.T3 for j in c)]


def check_t3_clusters(partition: Partition, inst: Instance) -> bool:
    """An IS partition keeps all of its T3 players in at most one coalition."""
    return len(t3_clusters(partition, inst)) <= 1
