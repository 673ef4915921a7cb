"""Exact analysis of coalition formation in federated mean estimation."""

from .model import (
    Coalition,
    GameParams,
    Instance,
    MembershipError,
    Partition,
    Player,
    Rational,
    WeightVector,
    coalition_cost,
    err_player,
    partition_cost,
)

__all__ = [
    "Coalition",
    "GameParams",
    "Instance",
    "MembershipError",
    "Partition",
    "Player",
    "Rational",
    "WeightVector",
    "coalition_cost",
    "err_player",
    "partition_cost",
]
