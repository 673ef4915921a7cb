"""Randomized property checks for the structural lemmas of the game.

Every check is a pair of functions: ``generate(rng, cfg)`` builds a JSON-ready
case (an instance plus whatever ids the check needs) and ``verify(case)``
decides it with exact rational arithmetic. Cases are regenerated from
``(seed, check name, trial index)`` alone, so a report is reproducible and any
counterexample can be replayed with :func:`replay`.
"""

from __future__ import annotations

import enum
import math
import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Any, Callable, Iterable

from . import anarchy
from .enumeration import GameTable, brute_force_optimal, iter_partition_masks, masks_to_partition
from .model import Coalition, GameParams, Instance, Partition, Player, coalition_cost, err_gap_same_coalition, err_player, partition_cost
from .optimal import wants_to_leave
from .reports import CheckReport, ReportBuilder, instance_from_dict, instance_to_dict
from .stability import _is_stable_masks, is_core_stable, is_individually_stable


class SizeRegime(enum.Enum):
    ANY = "any"
    ALL_SMALL = "all_small"  # n <= mu_e / sigma2
    ALL_LARGE = "all_large"  # n >= mu_e / sigma2
    MIXED = "mixed"  # at least one strictly on each side (ratios above 1 only)
    RELAXED = "relaxed"  # n <= mu_e / (3 sigma2)


@dataclass(frozen=True)
class RandomInstanceConfig:
    """How random instances are drawn.

    ``mu_e`` is set to ``ratio * sigma2`` with ``ratio`` taken from
    ``ratio_grid``; ``sigma2`` is ``randint(*sigma2_numerator) / choice(sigma2_denominators)``.
    Sample counts are log-uniform over ``[1, size_factor * ratio]`` (clipped to
    the regime), and with probability ``boundary_prob`` a size is put exactly
    on the regime's threshold when that threshold is an integer.
    """

    n_players: tuple[int, int] = (1, 8)
    enum_players: tuple[int, int] = (1, 6)
    ratio_grid: tuple[int, ...] = (1, 10, 100)
    relaxed_ratio_grid: tuple[int, ...] = (3, 10, 30, 100)
    sigma2_numerator: tuple[int, int] = (1, 5)
    sigma2_denominators: tuple[int, ...] = (1, 2, 3)
    size_factor: int = 10
    boundary_prob: float = 0.1
    seed: int = 0
    regime: SizeRegime = SizeRegime.ANY

    def __post_init__(self) -> None:
        for lo, hi in (self.n_players, self.enum_players, self.sigma2_numerator):
            if not 1 <= lo <= hi:
                raise ValueError(f"bad range ({lo}, {hi})")
        if not self.ratio_grid or min(self.ratio_grid) < 1:
            raise ValueError("ratio grid must be non-empty with entries >= 1")
        if not self.relaxed_ratio_grid or min(self.relaxed_ratio_grid) < 3:
            raise ValueError("relaxed ratios must be >= 3 so that a size-1 player qualifies")


def _log_uniform(rng: random.Random, lo: int, hi: int) -> int:
    if hi <= lo:
        return lo
    value = int(math.exp(rng.uniform(math.log(lo), math.log(hi + 1))))
    return min(hi, max(lo, value))


def draw_params(rng: random.Random, cfg: RandomInstanceConfig, regime: SizeRegime | None = None) -> GameParams:
    regime = regime or cfg.regime
    grid = cfg.relaxed_ratio_grid if regime is SizeRegime.RELAXED else cfg.ratio_grid
    if regime is SizeRegime.MIXED:
        # a ratio of 1 leaves no integer size strictly below the threshold
        grid = [r for r in grid if r > 1]
        if not grid:
            raise ValueError("the mixed regime needs a ratio above 1")
    ratio = rng.choice(grid)
    sigma2 = Fraction(rng.randint(*cfg.sigma2_numerator), rng.choice(cfg.sigma2_denominators))
    return GameParams(ratio * sigma2, sigma2)


def size_bounds(params: GameParams, cfg: RandomInstanceConfig, regime: SizeRegime) -> tuple[int, int, Fraction]:
    """Inclusive integer range for sizes under ``regime`` plus its threshold."""
    critical = params.critical_size
    top = max(1, math.floor(cfg.size_factor * critical))
    if regime is SizeRegime.ALL_SMALL:
        return 1, max(1, math.floor(critical)), critical
    if regime is SizeRegime.ALL_LARGE:
        return max(1, math.ceil(critical)), max(top, math.ceil(critical)), critical
    if regime is SizeRegime.RELAXED:
        tiny = critical / 3
        return 1, max(1, math.floor(tiny)), tiny
    return 1, top, critical


def draw_sizes(rng: random.Random, params: GameParams, cfg: RandomInstanceConfig, count: int, regime: SizeRegime | None = None) -> list[int]:
    regime = regime or cfg.regime
    lo, hi, threshold = size_bounds(params, cfg, regime)
    on_threshold = threshold.denominator == 1 and lo <= threshold <= hi
    sizes = []
    for _ in range(count):
        if on_threshold and rng.random() < cfg.boundary_prob:
            sizes.append(int(threshold))
        else:
            sizes.append(_log_uniform(rng, lo, hi))
    critical = params.critical_size
    if regime is SizeRegime.MIXED and count >= 2:
        if not (any(n < critical for n in sizes) and any(n > critical for n in sizes)):
            small, large = rng.sample(range(count), 2)
            sizes[small] = _log_uniform(rng, 1, math.ceil(critical) - 1)
            sizes[large] = _log_uniform(rng, math.floor(critical) + 1, max(hi, math.floor(critical) + 1))
    return sizes


def random_instance(
    rng: random.Random,
    cfg: RandomInstanceConfig,
    n_players: tuple[int, int] | None = None,
    regime: SizeRegime | None = None,
) -> Instance:
    regime = regime or cfg.regime
    lo, hi = n_players or cfg.n_players
    params = draw_params(rng, cfg, regime)
    sizes = draw_sizes(rng, params, cfg, rng.randint(lo, hi), regime)
    return Instance(params, tuple(_players(sizes)))


def _players(sizes: Iterable[int]) -> list[Player]:
    return [Player(i, n) for i, n in enumerate(sizes)]


def _with_sizes(params: GameParams, sizes: list[int]) -> Instance:
    return Instance(params, tuple(_players(sizes)))


def _case(inst: Instance, **context: Any) -> dict[str, Any]:
    return {"instance": instance_to_dict(inst), **context}


def _nonempty_subset(rng: random.Random, pool: list[int]) -> list[int]:
    while True:
        subset = [i for i in pool if rng.random() < 0.5]
        if subset or not pool:
            return subset


# ---------------------------------------------------------------------------
# joining from local learning: player preference matches the cost change


def _gen_addminsame(rng, cfg):
    inst = random_instance(rng, cfg, (2, cfg.n_players[1] if cfg.n_players[1] >= 2 else 2))
    if rng.random() < cfg.boundary_prob and inst.params.critical_size.denominator == 1:
        # all players exactly critical: both sides of the equivalence are equalities
        inst = _with_sizes(inst.params, [int(inst.params.critical_size)] * inst.n_players)
    j = rng.randrange(inst.n_players)
    q = _nonempty_subset(rng, [i for i in range(inst.n_players) if i != j])
    return _case(inst, player=j, others=q)


def _addminsame_sides(case) -> tuple[bool, bool]:
    inst = instance_from_dict(case["instance"])
    j, q = case["player"], case["others"]
    params = inst.params
    alone = inst.coalition([j])
    group = inst.coalition(q)
    joined = inst.coalition(q + [j])
    cost_side = coalition_cost(alone, params) + coalition_cost(group, params) >= coalition_cost(joined, params)
    err_side = err_player(j, alone, params) >= err_player(j, joined, params)
    return cost_side, err_side


def _verify_addminsame(case) -> bool:
    cost_side, err_side = _addminsame_sides(case)
    return cost_side == err_side


def _verify_flipped(case) -> bool:
    cost_side, err_side = _addminsame_sides(case)
    return cost_side != err_side


# ---------------------------------------------------------------------------
# swapping a larger member out for a smaller loner lowers total cost


def _gen_swap(rng, cfg):
    params = draw_params(rng, cfg)
    q = draw_sizes(rng, params, cfg, rng.randint(1, max(1, cfg.n_players[1] - 2)))
    while True:
        big, small = draw_sizes(rng, params, cfg, 2)
        if big != small:
            break
    big, small = max(big, small), min(big, small)
    inst = _with_sizes(params, q + [big, small])
    return _case(inst, others=list(range(len(q))), larger=len(q), smaller=len(q) + 1)


def _verify_swap(case) -> bool:
    inst = instance_from_dict(case["instance"])
    q, j, k = case["others"], case["larger"], case["smaller"]
    if not inst.players[j].n > inst.players[k].n:
        raise ValueError("swap case needs n_larger > n_smaller")
    p = inst.params
    with_big = coalition_cost(inst.coalition(q + [j]), p) + coalition_cost(inst.coalition([k]), p)
    with_small = coalition_cost(inst.coalition(q + [k]), p) + coalition_cost(inst.coalition([j]), p)
    return with_big > with_small


# ---------------------------------------------------------------------------
# joining is monotone in the joiner's size


def _err_joining(n: int, group: list[int], params: GameParams) -> Fraction:
    sizes = group + [n]
    members = tuple(range(len(sizes)))
    return err_player(len(group), Coalition(members, tuple(sizes)), params)


def _gen_monotone_join(rng, cfg):
    params = draw_params(rng, cfg)
    q = draw_sizes(rng, params, cfg, rng.randint(1, max(1, cfg.n_players[1] - 1)))
    a, b = draw_sizes(rng, params, cfg, 2)
    if rng.random() < 0.1:
        b = a
    inst = _with_sizes(params, q + [min(a, b), max(a, b)])
    return _case(inst, others=list(range(len(q))), smaller=len(q), larger=len(q) + 1)


def _verify_monotone_join(case) -> bool:
    inst = instance_from_dict(case["instance"])
    p = inst.params
    group = [inst.players[i].n for i in case["others"]]
    n_small = inst.players[case["smaller"]].n
    n_large = inst.players[case["larger"]].n
    e_small, e_large = _err_joining(n_small, group, p), _err_joining(n_large, group, p)
    alone_small, alone_large = p.mu_e / n_small, p.mu_e / n_large
    refusal_up = not (e_small >= alone_small) or e_large >= alone_large
    desire_down = not (e_large <= alone_large) or e_small <= alone_small
    same = n_small != n_large or (e_small >= alone_small) == (e_large >= alone_large)
    return refusal_up and desire_down and same


# ---------------------------------------------------------------------------
# leaving is monotone in the leaver's size


def _gen_monotone_leave(rng, cfg):
    inst = random_instance(rng, cfg, (2, max(2, cfg.n_players[1])))
    return _case(inst)


def _verify_monotone_leave(case) -> bool:
    inst = instance_from_dict(case["instance"])
    p = inst.params
    whole = inst.coalition(range(inst.n_players))
    sizes = inst.sizes
    weak_leave = {j: err_player(j, whole, p) >= p.mu_e / sizes[j] for j in whole}
    weak_stay = {j: err_player(j, whole, p) <= p.mu_e / sizes[j] for j in whole}
    strict_leave = {j: wants_to_leave(j, whole, inst) for j in whole}
    for j in whole:
        for k in whole:
            if sizes[k] >= sizes[j]:
                if weak_leave[j] and not weak_leave[k]:
                    return False
                if strict_leave[j] and not strict_leave[k]:
                    return False
            if sizes[k] <= sizes[j] and weak_stay[j] and not weak_stay[k]:
                return False
    return True


# ---------------------------------------------------------------------------
# merging two groups, then shedding the largest players who prefer to leave


def merge_groups(first: Coalition, second: Coalition, inst: Instance) -> tuple[Coalition, list[int]]:
    """Merge two disjoint groups and pop players, largest first, while they want to leave.

    Returns the remaining coalition and the removed players in removal order.
    """
    if set(first.members) & set(second.members):
        raise ValueError("groups must be disjoint")
    merged = inst.coalition(first.members + second.members)
    removed: list[int] = []
    while len(merged) > 1:
        largest = max(merged.members, key=lambda i: (inst.players[i].n, i))
        if not wants_to_leave(largest, merged, inst):
            break
        removed.append(largest)
        merged = merged.without_player(largest)
    return merged, removed


def merge_costs(first: Coalition, second: Coalition, inst: Instance) -> tuple[Fraction, Fraction, Coalition, list[int]]:
    """(cost before, cost after, remaining coalition, removed) for :func:`merge_groups`."""
    p = inst.params
    kept, removed = merge_groups(first, second, inst)
    before = coalition_cost(first, p) + coalition_cost(second, p)
    after = coalition_cost(kept, p) + len(removed) * p.mu_e
    return before, after, kept, removed


def _structure(groups: Iterable[Iterable[int]], sizes) -> list[tuple[int, ...]]:
    return sorted(tuple(sorted(sizes[i] for i in g)) for g in groups)


def _gen_merge(rng, cfg):
    inst = random_instance(rng, cfg, (2, max(2, cfg.n_players[1])))
    ids = list(range(inst.n_players))
    rng.shuffle(ids)
    cut = rng.randint(1, len(ids) - 1)
    first = sorted(ids[:cut])
    second = sorted(ids[cut : rng.randint(cut + 1, len(ids))])
    return _case(inst, first=first, second=second)


def _verify_merge(case) -> bool:
    inst = instance_from_dict(case["instance"])
    first, second = inst.coalition(case["first"]), inst.coalition(case["second"])
    before, after, kept, removed = merge_costs(first, second, inst)
    if before < after:
        return False
    sizes = inst.sizes
    involved = [sizes[i] for i in case["first"] + case["second"]]
    distinct = len(set(involved)) == len(involved)
    changed = _structure([first, second], sizes) != _structure([kept] + [[i] for i in removed], sizes)
    if distinct and changed and not stops_on_indifference(kept, inst):
        return before > after
    return True


def stops_on_indifference(kept: Coalition, inst: Instance) -> bool:
    """True when the player that ended the removals is exactly indifferent to leaving.

    Such a player stays (leaving needs a strict gain), and its staying leaves the
    total cost unchanged, so the merge can end with equal cost even when sizes differ.
    """
    if len(kept) < 2:
        return False
    largest = max(kept.members, key=lambda i: (inst.players[i].n, i))
    return err_player(largest, kept, inst.params) == inst.params.mu_e / inst.players[largest].n


# ---------------------------------------------------------------------------
# small groups welcome small newcomers


def _gen_welcome(rng, cfg):
    inst = random_instance(rng, cfg, (2, max(2, cfg.n_players[1])), SizeRegime.RELAXED)
    return _case(inst, newcomer=inst.n_players - 1)


def _verify_welcome(case) -> bool:
    inst = instance_from_dict(case["instance"])
    k = case["newcomer"]
    threshold = anarchy.partner_threshold(inst.params)
    if any(n > threshold for n in inst.sizes):
        raise ValueError("welcome case needs every size <= mu_e / (3 sigma2)")
    group = inst.coalition([i for i in range(inst.n_players) if i != k])
    joined = group.with_player(k, inst.players[k].n)
    p = inst.params
    return all(err_player(j, joined, p) < err_player(j, group, p) for j in group)


# ---------------------------------------------------------------------------
# two small clusters: the case analysis used for the relaxed-structure result


def _pair_claims(inst: Instance, a_group: list[int], b_group: list[int]) -> list[tuple[str, bool]]:
    """Every applicable (claim, holds) from the two-cluster case lemmas."""
    p = inst.params
    sizes = inst.sizes
    group_a, group_b = inst.coalition(a_group), inst.coalition(b_group)
    t_a, t_b = group_a.total_mass, group_b.total_mass
    threshold = anarchy.partner_threshold(p)

    def prefers(j: int, home: Coalition, away: Coalition) -> bool:
        return err_player(j, away.with_player(j, sizes[j]), p) < err_player(j, home, p)

    claims = []
    for a in a_group:
        for b in b_group:
            equal = sizes[a] == sizes[b]
            ordered = sizes[a] > sizes[b] and t_a - sizes[a] >= t_b - sizes[b]
            mirrored = sizes[b] > sizes[a] and t_b - sizes[b] >= t_a - sizes[a]
            if equal or ordered or mirrored:
                claims.append(("case12", prefers(a, group_a, group_b) or prefers(b, group_b, group_a)))
    top_a = max(a_group, key=lambda i: sizes[i])
    top_b = max(b_group, key=lambda i: sizes[i])
    for x, gx, tx, y, gy, ty in (
        (top_a, group_a, t_a, top_b, group_b, t_b),
        (top_b, group_b, t_b, top_a, group_a, t_a),
    ):
        if sizes[x] > sizes[y] and tx - sizes[x] < ty - sizes[y] and tx - sizes[x] <= threshold:
            claims.append(("case3", prefers(x, gx, gy)))
    return claims


def _gen_case_lemmas(rng, cfg):
    while True:
        inst = random_instance(rng, cfg, (2, max(2, cfg.n_players[1])), SizeRegime.RELAXED)
        ids = list(range(inst.n_players))
        rng.shuffle(ids)
        cut = rng.randint(1, len(ids) - 1)
        a_group, b_group = sorted(ids[:cut]), sorted(ids[cut:])
        if _pair_claims(inst, a_group, b_group):
            return _case(inst, first=a_group, second=b_group)


def _verify_case_lemmas(case) -> bool:
    inst = instance_from_dict(case["instance"])
    claims = _pair_claims(inst, case["first"], case["second"])
    if not all(ok for _, ok in claims):
        return False
    partition = Partition((inst.coalition(case["first"]), inst.coalition(case["second"])))
    stable, _ = is_individually_stable(partition, inst)
    return not stable


# ---------------------------------------------------------------------------
# the closed-form error gap between two members of one coalition


def _gen_err_gap(rng, cfg):
    inst = random_instance(rng, cfg, (1, cfg.n_players[1]))
    return _case(inst, first=rng.randrange(inst.n_players), second=rng.randrange(inst.n_players))


def _verify_err_gap(case) -> bool:
    inst = instance_from_dict(case["instance"])
    whole = inst.coalition(range(inst.n_players))
    j, k = case["first"], case["second"]
    p = inst.params
    gap = err_gap_same_coalition(j, k, whole, p)
    return gap == err_player(j, whole, p) - err_player(k, whole, p)


# ---------------------------------------------------------------------------
# per-player bounds used for the PoA argument


def _gen_err_upper_bound_is(rng, cfg):
    inst = random_instance(rng, cfg, cfg.enum_players)
    table = GameTable(inst)
    stable = [m for m in iter_partition_masks(inst.n_players) if _is_stable_masks(m, table)]
    if not stable:
        return _case(inst, groups=None)
    partition = masks_to_partition(inst, rng.choice(stable))
    return _case(inst, groups=[list(g) for g in partition.groups()])


def _verify_err_upper_bound_is(case) -> bool:
    inst = instance_from_dict(case["instance"])
    if case["groups"] is None:
        # an instance without any IS partition is a failure of its own
        return False
    partition = Partition.from_groups(inst, case["groups"])
    return anarchy.check_err_upper_bound_is(partition, inst).ok


def _gen_err_lower_bound(rng, cfg):
    inst = random_instance(rng, cfg, (1, cfg.n_players[1]))
    j = rng.randrange(inst.n_players)
    partners = [i for i in range(inst.n_players) if i != j and rng.random() < 0.5]
    return _case(inst, player=j, partners=partners)


def _verify_err_lower_bound(case) -> bool:
    inst = instance_from_dict(case["instance"])
    j, partners = case["player"], case["partners"]
    e = err_player(j, inst.coalition(partners + [j]), inst.params)
    return e >= anarchy.err_lower_bound(inst.players[j].n, inst.params)


def _gen_small_player_upper(rng, cfg):
    params = draw_params(rng, cfg)
    threshold = anarchy.partner_threshold(params)
    j_size = draw_sizes(rng, params, cfg, 1)[0]
    if rng.random() < 0.5:
        # partners drawn from the tiny range so the mass lands near the threshold
        lo, hi = 1, max(1, math.floor(threshold))
    else:
        lo, hi, _ = size_bounds(params, cfg, SizeRegime.ANY)
    partners = []
    while sum(partners) < threshold:
        partners.append(_log_uniform(rng, lo, hi))
    inst = _with_sizes(params, partners + [j_size])
    return _case(inst, player=len(partners), partners=list(range(len(partners))))


def _verify_small_player_upper(case) -> bool:
    inst = instance_from_dict(case["instance"])
    if sum(inst.players[i].n for i in case["partners"]) < anarchy.partner_threshold(inst.params):
        raise ValueError("partner mass below mu_e / (3 sigma2)")
    ok, _ = anarchy.small_player_case_ok(case["player"], case["partners"], inst)
    return ok


def _measure_small_player_upper(case) -> Fraction:
    inst = instance_from_dict(case["instance"])
    return anarchy.small_player_case_ok(case["player"], case["partners"], inst)[1]


def _gen_relaxed_structure(rng, cfg):
    return _case(random_instance(rng, cfg, cfg.enum_players, SizeRegime.RELAXED))


def _verify_relaxed_structure(case) -> bool:
    return anarchy.check_relaxed_structure(instance_from_dict(case["instance"])).ok


def _gen_t3_clusters(rng, cfg):
    return _case(random_instance(rng, cfg, cfg.enum_players))


def _verify_t3_clusters(case) -> bool:
    inst = instance_from_dict(case["instance"])
    table = GameTable(inst)
    for masks in iter_partition_masks(inst.n_players):
        if _is_stable_masks(masks, table) and not anarchy.check_t3_clusters(masks_to_partition(inst, masks), inst):
            return False
    return True


# ---------------------------------------------------------------------------
# regime results: small players and the grand coalition, large players and PoA 1


def _gen_grand_core(rng, cfg):
    return _case(random_instance(rng, cfg, cfg.n_players, SizeRegime.ALL_SMALL))


def _verify_grand_core(case) -> bool:
    inst = instance_from_dict(case["instance"])
    return is_core_stable(inst.grand_coalition(), inst)[0]


def _gen_all_large(rng, cfg):
    return _case(random_instance(rng, cfg, cfg.enum_players, SizeRegime.ALL_LARGE))


def _verify_all_large(case) -> bool:
    inst = instance_from_dict(case["instance"])
    return anarchy.price_of_anarchy(inst).poa == 1


# ---------------------------------------------------------------------------
# adversarial constructions


def _ceil_int(x: Fraction) -> int:
    return -((-x.numerator) // x.denominator)


def construct_alone_bad(rho, base_mu_e: int = 100) -> Instance:
    """Identical players for whom local learning costs more than ``rho`` times the optimum.

    Uses ``ceil(rho) + 1`` players, ``sigma2 = 1`` and the largest integer size
    strictly below ``(N / rho - 1) * mu_e / (N - 1)``; ``mu_e`` starts at
    ``base_mu_e`` and is multiplied by 10 until that window holds an integer >= 1.
    """
    rho = Fraction(rho)
    if rho <= 1:
        raise ValueError("rho must exceed 1")
    n_players = _ceil_int(rho) + 1
    mu_e = Fraction(base_mu_e)
    while True:
        bound = (Fraction(n_players) / rho - 1) * mu_e / (n_players - 1)
        size = _ceil_int(bound) - 1
        if size >= 1:
            return Instance.from_sizes(mu_e, 1, [size] * n_players)
        mu_e *= 10


def alone_bad_ratio(inst: Instance) -> Fraction:
    """Closed-form cost(all alone) / cost(grand) for identical players."""
    n, size = inst.n_players, inst.sizes[0]
    mu, s2 = inst.params.mu_e, inst.params.sigma2
    return n * mu / (mu + s2 * (n - 1) * size)


def construct_grand_bad(rho, mu_e: int = 1) -> Instance:
    """Identical players for whom the grand coalition costs more than ``rho`` times the optimum.

    Uses ``ceil(rho) + 1`` players, ``sigma2 = 1`` and the smallest integer size
    strictly above ``max(mu_e (rho N - 1) / (N - 1), mu_e)``.
    """
    rho = Fraction(rho)
    if rho <= 1:
        raise ValueError("rho must exceed 1")
    n_players = _ceil_int(rho) + 1
    mu = Fraction(mu_e)
    bound = max(mu * (rho * n_players - 1) / (n_players - 1), mu)
    size = math.floor(bound) + 1
    return Instance.from_sizes(mu, 1, [size] * n_players)


def grand_bad_ratio(inst: Instance) -> Fraction:
    return 1 / alone_bad_ratio(inst)


@dataclass
class ConstructionCheck:
    rho: Fraction
    instance: Instance
    closed_form_ratio: Fraction
    measured_ratio: Fraction
    brute_force_ratio: Fraction | None

    @property
    def ok(self) -> bool:
        ratios = [self.closed_form_ratio, self.measured_ratio]
        if self.brute_force_ratio is not None:
            ratios.append(self.brute_force_ratio)
        return all(r > self.rho for r in ratios)


def verify_construction(kind: str, rho, brute_force_limit: int | None = 12) -> ConstructionCheck:
    """Check a construction by closed form, by direct cost evaluation and by brute force.

    ``brute_force_limit`` caps the player count for the exhaustive check; None skips it.
    """
    rho = Fraction(rho)
    if kind == "alone":
        inst = construct_alone_bad(rho)
        closed = alone_bad_ratio(inst)
        bad, reference = inst.singletons(), inst.grand_coalition()
    elif kind == "grand":
        inst = construct_grand_bad(rho)
        closed = grand_bad_ratio(inst)
        bad, reference = inst.grand_coalition(), inst.singletons()
    else:
        raise ValueError(f"unknown construction {kind!r}")
    bad_cost = partition_cost(bad, inst.params)
    measured = bad_cost / partition_cost(reference, inst.params)
    brute = None
    if brute_force_limit is not None and inst.n_players <= brute_force_limit:
        _, opt_cost = brute_force_optimal(inst, budget=brute_force_limit)
        brute = bad_cost / opt_cost
    return ConstructionCheck(rho, inst, closed, measured, brute)


def _gen_constructions(rng, cfg):
    rho = Fraction(rng.randint(101, 1000), 100)
    return {"rho": str(rho), "kind": rng.choice(["alone", "grand"])}


def _verify_constructions(case) -> bool:
    return verify_construction(case["kind"], Fraction(case["rho"]), brute_force_limit=8).ok


# ---------------------------------------------------------------------------
# registry and drivers


@dataclass(frozen=True)
class Check:
    name: str
    generate: Callable[[random.Random, RandomInstanceConfig], dict[str, Any]]
    verify: Callable[[dict[str, Any]], bool]
    measure: Callable[[dict[str, Any]], Fraction] | None = None


CHECKS: dict[str, Check] = {
    c.name: c
    for c in [
        Check("addminsame", _gen_addminsame, _verify_addminsame),
        Check("swap", _gen_swap, _verify_swap),
        Check("monotone_join", _gen_monotone_join, _verify_monotone_join),
        Check("monotone_leave", _gen_monotone_leave, _verify_monotone_leave),
        Check("merge", _gen_merge, _verify_merge),
        Check("welcome", _gen_welcome, _verify_welcome),
        Check("case_lemmas", _gen_case_lemmas, _verify_case_lemmas),
        Check("err_gap", _gen_err_gap, _verify_err_gap),
        Check("err_upper_bound_is", _gen_err_upper_bound_is, _verify_err_upper_bound_is),
        Check("err_lower_bound", _gen_err_lower_bound, _verify_err_lower_bound),
        Check("small_player_upper", _gen_small_player_upper, _verify_small_player_upper, _measure_small_player_upper),
        Check("relaxed_structure", _gen_relaxed_structure, _verify_relaxed_structure),
        Check("t3_clusters", _gen_t3_clusters, _verify_t3_clusters),
        Check("grand_core", _gen_grand_core, _verify_grand_core),
        Check("all_large", _gen_all_large, _verify_all_large),
        Check("constructions", _gen_constructions, _verify_constructions),
    ]
}

# deliberately inverted check used to prove the harness reports failures
INJECTED = Check("injected_flip", _gen_addminsame, _verify_flipped)


def trial_rng(seed: int, name: str, trial: int) -> random.Random:
    return random.Random(f"{seed}:{name}:{trial}")


def run_check(check: Check | str, cfg: RandomInstanceConfig, trials: int) -> CheckReport:
    if isinstance(check, str):
        check = INJECTED if check == INJECTED.name else CHECKS[check]
    builder = ReportBuilder(check.name)
    worst: Fraction | None = None
    for t in range(trials):
        case = check.generate(trial_rng(cfg.seed, check.name, t), cfg)
        builder.record(check.verify(case), {**case, "trial": t})
        if check.measure is not None:
            value = check.measure(case)
            worst = value if worst is None else max(worst, value)
    if worst is not None:
        builder.details["max_measure"] = worst
    if check.name == "small_player_upper" and worst is not None:
        builder.details["holds_7_25"] = worst <= anarchy.SMALL_PLAYER_CONSTANT
        builder.details["holds_7_5"] = worst <= anarchy.SMALL_PLAYER_SLACK
    builder.details["seed"] = cfg.seed
    return builder.build()


def replay(report: CheckReport) -> bool:
    """Re-run the verifier on a report's counterexample; True means it now passes."""
    if report.counterexample is None:
        raise ValueError("report has no counterexample")
    check = INJECTED if report.name == INJECTED.name else CHECKS[report.name]
    case = {k: v for k, v in report.counterexample.items() if k != "trial"}
    return check.verify(case)


def check_addminsame(cfg: RandomInstanceConfig, trials: int) -> CheckReport:
    return run_check("addminsame", cfg, trials)


def check_swap(cfg: RandomInstanceConfig, trials: int) -> CheckReport:
    return run_check("swap", cfg, trials)


def check_monotone_join(cfg: RandomInstanceConfig, trials: int) -> CheckReport:
    return run_check("monotone_join", cfg, trials)


def check_monotone_leave(cfg: RandomInstanceConfig, trials: int) -> CheckReport:
    return run_check("monotone_leave", cfg, trials)


def check_merge(cfg: RandomInstanceConfig, trials: int) -> CheckReport:
    return run_check("merge", cfg, trials)


def check_welcome(cfg: RandomInstanceConfig, trials: int) -> CheckReport:
    return run_check("welcome", cfg, trials)


def check_case_lemmas(cfg: RandomInstanceConfig, trials: int) -> CheckReport:
    return run_check("case_lemmas", cfg, trials)


def run_suite(
    cfg: RandomInstanceConfig | None = None,
    trials: int = 1000,
    names: Iterable[str] | None = None,
    inject_failure: bool = False,
) -> list[CheckReport]:
    cfg = cfg or RandomInstanceConfig()
    selected = list(names) if names is not None else list(CHECKS)
    unknown = [n for n in selected if n not in CHECKS and n != INJECTED.name]
    if unknown:
        raise KeyError(f"unknown checks: {', '.join(unknown)}")
    reports = [run_check(n, cfg, trials) for n in selected]
    if inject_failure:
        reports.append(run_check(INJECTED, cfg, trials))
    return reports
