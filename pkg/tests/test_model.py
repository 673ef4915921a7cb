from __future__ import annotations

from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fedgame.model import (
    Coalition,
    GameParams,
    Instance,
    MembershipError,
    Partition,
    WeightVector,
    arbitrary_weight_cost,
    as_rational,
    coalition_cost,
    err_gap_same_coalition,
    err_player,
    format_rational,
    partition_cost,
    player_errors,
    unweighted_cost,
)

TABLE1 = Instance.from_sizes(10, 1, [1, 8, 15])


def variance_oracle(j: int, sizes: list[int], mu_e: Fraction, sigma2: Fraction) -> Fraction:
    """Error of the weighted average, from the variance of its independent parts.

    estimate - theta_j = sum_i w_i noise_i + sum_{i != j} w_i theta_i - (1 - w_j) theta_j
    with noise variance mu_e / n_i and true-mean variance sigma2.
    """
    total = sum(sizes)
    w = [Fraction(n, total) for n in sizes]
    noise = sum(wi * wi * mu_e / n for wi, n in zip(w, sizes))
    spread = sum(wi * wi for i, wi in enumerate(w) if i != j) + (1 - w[j]) ** 2
    return noise + sigma2 * spread


sizes_st = st.lists(st.integers(1, 60), min_size=1, max_size=7)
rational_st = st.fractions(min_value=Fraction(1, 10), max_value=50).filter(lambda x: x > 0)


@settings(max_examples=200, deadline=None)
@given(sizes_st, rational_st, rational_st)
def test_error_matches_variance_oracle(sizes, mu_e, sigma2):
    inst = Instance.from_sizes(mu_e, sigma2, sizes)
    whole = inst.coalition(range(len(sizes)))
    for j in whole:
        assert err_player(j, whole, inst.params) == variance_oracle(j, sizes, mu_e, sigma2)


@settings(max_examples=200, deadline=None)
@given(sizes_st, rational_st, rational_st)
def test_cost_closed_form_is_weighted_sum_of_errors(sizes, mu_e, sigma2):
    inst = Instance.from_sizes(mu_e, sigma2, sizes)
    whole = inst.coalition(range(len(sizes)))
    direct = sum(n * err_player(j, whole, inst.params) for j, n in zip(whole, sizes))
    assert coalition_cost(whole, inst.params) == direct


@settings(max_examples=100, deadline=None)
@given(sizes_st, rational_st, rational_st)
def test_error_gap_formula(sizes, mu_e, sigma2):
    inst = Instance.from_sizes(mu_e, sigma2, sizes)
    whole = inst.coalition(range(len(sizes)))
    for j in whole:
        for k in whole:
            gap = err_gap_same_coalition(j, k, whole, inst.params)
            assert gap == err_player(j, whole, inst.params) - err_player(k, whole, inst.params)


def test_singleton_error_is_local_variance():
    assert err_player(0, TABLE1.coalition([0]), TABLE1.params) == 10
    assert err_player(2, TABLE1.coalition([2]), TABLE1.params) == Fraction(2, 3)


@pytest.mark.parametrize(
    "groups, expected",
    [
        ([[0, 1, 2]], {0: Fraction(529, 288), 1: Fraction(361, 288), 2: Fraction(193, 288)}),
        ([[0, 2], [1]], {0: Fraction(305, 128), 1: Fraction(5, 4), 2: Fraction(81, 128)}),
        ([[0, 1], [2]], {0: Fraction(218, 81), 1: Fraction(92, 81), 2: Fraction(2, 3)}),
        ([[0], [1, 2]], {0: Fraction(10), 1: Fraction(680, 529), 2: Fraction(358, 529)}),
    ],
)
def test_three_player_example_errors(groups, expected):
    p = Partition.from_groups(TABLE1, groups)
    assert player_errors(p, TABLE1.params) == expected


def test_three_player_example_costs():
    cost = lambda groups: partition_cost(Partition.from_groups(TABLE1, groups), TABLE1.params)
    assert cost([[0], [1], [2]]) == 30
    assert cost([[0], [1, 2]]) == Fraction(700, 23)
    assert cost([[0, 2], [1]]) == Fraction(175, 8)
    assert cost([[0, 1], [2]]) == Fraction(196, 9)
    assert cost([[0, 1, 2]]) == Fraction(263, 12)


def test_unweighted_and_arbitrary_weight_costs():
    p = Partition.from_groups(TABLE1, [[0, 2], [1]])
    errs = player_errors(p, TABLE1.params)
    assert unweighted_cost(p, TABLE1.params) == sum(errs.values())
    uniform = WeightVector.uniform(3)
    assert arbitrary_weight_cost(p, TABLE1.params, uniform) == sum(errs.values()) / 3
    proportional = WeightVector.proportional(TABLE1)
    assert arbitrary_weight_cost(p, TABLE1.params, proportional) == partition_cost(p, TABLE1.params) / 24
    with pytest.raises(ValueError):
        arbitrary_weight_cost(p, TABLE1.params, WeightVector.uniform(2))


def test_weight_vector_validation():
    with pytest.raises(ValueError):
        WeightVector((Fraction(1, 2), Fraction(1, 3)))
    with pytest.raises(ValueError):
        WeightVector((Fraction(3, 2), Fraction(-1, 2)))


def test_params_and_player_validation():
    with pytest.raises(ValueError):
        GameParams(0, 1)
    with pytest.raises(ValueError):
        GameParams(1, -1)
    with pytest.raises(TypeError):
        as_rational(0.1)
    with pytest.raises(ValueError):
        Instance.from_sizes(1, 1, [0])
    with pytest.raises(ValueError):
        Instance.from_sizes(1, 1, [])
    assert GameParams("10/3", 2).critical_size == Fraction(5, 3)


def test_coalition_operations():
    c = TABLE1.coalition([2, 0])
    assert c.members == (0, 2) and c.sizes == (1, 15)
    assert c.total_mass == 16 and c.sum_squares() == 226
    grown = c.with_player(1, 8)
    assert grown.members == (0, 1, 2)
    assert grown.without_player(2) == TABLE1.coalition([0, 1])
    with pytest.raises(MembershipError):
        c.with_player(0, 1)
    with pytest.raises(MembershipError):
        c.without_player(1)
    with pytest.raises(MembershipError):
        c.size_of(1)
    with pytest.raises(MembershipError):
        TABLE1.coalition([3])


def test_partition_validation_and_canonical_order():
    p = Partition.from_groups(TABLE1, [[1], [2, 0]])
    assert p.groups() == ((0, 2), (1,))
    assert p.coalition_of(2).members == (0, 2)
    with pytest.raises(ValueError):
        Partition.from_groups(TABLE1, [[0, 1], [1, 2]])
    with pytest.raises(ValueError):
        Partition.from_groups(TABLE1, [[0, 1]])
    with pytest.raises(ValueError):
        Partition((Coalition((0, 1), (1, 8)), Coalition((1,), (8,))))


@pytest.mark.parametrize(
    "value, places, text",
    [
        (Fraction(305, 128), 3, "2.383"),
        (Fraction(529, 288), 3, "1.837"),
        (Fraction(1, 2000), 3, "0.001"),
        (Fraction(-1, 2000), 3, "-0.001"),
        (Fraction(-1, 3000), 3, "0.000"),
        (Fraction(225, 224), 4, "1.0045"),
        (Fraction(30), 3, "30.000"),
        (Fraction(7, 2), 0, "4"),
    ],
)
def test_format_rational_rounds_half_away_from_zero(value, places, text):
    assert format_rational(value, places) == text


def test_format_rational_exact():
    assert format_rational(Fraction(196, 9), exact=True) == "196/9"
