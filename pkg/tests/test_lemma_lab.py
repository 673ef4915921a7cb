from __future__ import annotations

from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fedgame import lemma_lab as L
from fedgame.enumeration import brute_force_optimal
from fedgame.model import Instance, partition_cost
from fedgame.reports import CheckReport

CFG = L.RandomInstanceConfig(seed=11)


@pytest.mark.parametrize("name", list(L.CHECKS))
def test_every_check_passes_small_run(name):
    report = L.run_check(name, CFG, 150)
    assert report.ok, report.counterexample
    assert report.trials == 150


def test_named_wrappers():
    for fn in (
        L.check_addminsame,
        L.check_swap,
        L.check_monotone_join,
        L.check_monotone_leave,
        L.check_merge,
        L.check_welcome,
        L.check_case_lemmas,
    ):
        assert fn(CFG, 50).ok


def test_reports_are_reproducible():
    a = L.run_suite(CFG, 40, ["addminsame", "small_player_upper"])
    b = L.run_suite(CFG, 40, ["addminsame", "small_player_upper"])
    assert [r.to_dict() for r in a] == [r.to_dict() for r in b]


def test_injected_failure_is_caught_and_replays():
    reports = L.run_suite(CFG, 30, ["swap"], inject_failure=True)
    assert [r.name for r in reports] == ["swap", "injected_flip"]
    flipped = reports[-1]
    assert not flipped.ok and flipped.counterexample is not None
    assert L.replay(flipped) is False
    # the same case satisfies the true statement
    case = {k: v for k, v in flipped.counterexample.items() if k != "trial"}
    assert L.CHECKS["addminsame"].verify(case)


def test_replay_requires_counterexample():
    with pytest.raises(ValueError):
        L.replay(L.run_check("swap", CFG, 3))


def test_unknown_check_name():
    with pytest.raises(KeyError):
        L.run_suite(CFG, 1, ["nope"])


def test_check_report_invariants():
    with pytest.raises(ValueError):
        CheckReport("x", 3, 2)
    with pytest.raises(ValueError):
        CheckReport("x", 3, 4)
    assert CheckReport("x", 2, 2).line() == "PASS x: 2/2"


def test_config_validation():
    with pytest.raises(ValueError):
        L.RandomInstanceConfig(n_players=(0, 3))
    with pytest.raises(ValueError):
        L.RandomInstanceConfig(ratio_grid=())
    with pytest.raises(ValueError):
        L.RandomInstanceConfig(relaxed_ratio_grid=(2,))


@settings(max_examples=80, deadline=None)
@given(st.integers(0, 10_000), st.sampled_from(list(L.SizeRegime)))
def test_regimes_respect_their_bounds(seed, regime):
    cfg = L.RandomInstanceConfig(seed=seed, regime=regime)
    inst = L.random_instance(L.trial_rng(seed, "regime", 0), cfg)
    critical = inst.params.critical_size
    sizes = inst.sizes
    assert cfg.n_players[0] <= len(sizes) <= cfg.n_players[1]
    if regime is L.SizeRegime.ALL_SMALL:
        assert all(n <= critical for n in sizes)
    elif regime is L.SizeRegime.ALL_LARGE:
        assert all(n >= critical for n in sizes)
    elif regime is L.SizeRegime.RELAXED:
        assert all(n <= critical / 3 for n in sizes)
    elif regime is L.SizeRegime.MIXED and len(sizes) >= 2:
        assert any(n < critical for n in sizes) and any(n > critical for n in sizes)
    else:
        assert all(1 <= n <= 10 * critical for n in sizes)


def test_merge_table1_pair():
    inst = Instance.from_sizes(10, 1, [1, 8, 15])
    before, after, kept, removed = L.merge_costs(inst.coalition([0]), inst.coalition([1]), inst)
    assert kept.members == (0, 1) and removed == []
    assert before == 20 and after == Fraction(106, 9)


def test_merge_removes_largest_first():
    inst = Instance.from_sizes(10, 1, [1, 8, 15])
    kept, removed = L.merge_groups(inst.coalition([0, 1]), inst.coalition([2]), inst)
    assert removed == [2] and kept.members == (0, 1)


def test_merge_equal_critical_players_keep_cost():
    inst = Instance.from_sizes(10, 1, [10, 10])
    before, after, kept, removed = L.merge_costs(inst.coalition([0]), inst.coalition([1]), inst)
    assert removed == [] and before == after == 20


def test_merge_can_tie_with_distinct_sizes():
    # the size-30 player ends exactly indifferent between staying and leaving
    inst = Instance.from_sizes(20, 2, [6, 30])
    before, after, kept, removed = L.merge_costs(inst.coalition([0]), inst.coalition([1]), inst)
    assert removed == [] and kept.members == (0, 1)
    assert before == after == 40
    assert L.stops_on_indifference(kept, inst)


def test_merge_rejects_overlap():
    inst = Instance.from_sizes(10, 1, [1, 8, 15])
    with pytest.raises(ValueError):
        L.merge_groups(inst.coalition([0, 1]), inst.coalition([1]), inst)


@pytest.mark.parametrize(
    "rho, n_players, size, mu_e",
    [(2, 3, 24, 100), (5, 6, 3, 100), (10, 11, 9, 1000)],
)
def test_alone_bad_construction(rho, n_players, size, mu_e):
    inst = L.construct_alone_bad(rho)
    assert inst.n_players == n_players and set(inst.sizes) == {size} and inst.params.mu_e == mu_e
    assert L.alone_bad_ratio(inst) > rho


@pytest.mark.parametrize("rho, n_players, size", [(2, 3, 3), (5, 6, 6), (10, 11, 11)])
def test_grand_bad_construction(rho, n_players, size):
    inst = L.construct_grand_bad(rho)
    assert inst.n_players == n_players and set(inst.sizes) == {size}
    assert L.grand_bad_ratio(inst) > rho


@pytest.mark.parametrize("kind", ["alone", "grand"])
@pytest.mark.parametrize("rho", [Fraction(3, 2), 2, 5])
def test_constructions_against_brute_force(kind, rho):
    check = L.verify_construction(kind, rho)
    assert check.ok
    assert check.closed_form_ratio == check.measured_ratio == check.brute_force_ratio


def test_construction_rejects_small_rho():
    with pytest.raises(ValueError):
        L.construct_alone_bad(1)
    with pytest.raises(ValueError):
        L.construct_grand_bad(Fraction(1, 2))
    with pytest.raises(ValueError):
        L.verify_construction("other", 2)


def test_grand_bad_optimum_is_local_learning():
    inst = L.construct_grand_bad(2)
    best, cost = brute_force_optimal(inst)
    assert best.groups() == ((0,), (1,), (2,))
    assert cost == partition_cost(inst.singletons(), inst.params)
