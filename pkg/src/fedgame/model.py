"""Exact error and cost model for federated mean estimation.

Every player ``j`` holds ``n_j`` samples. A coalition averages local means
weighted by sample count; the expected squared error player ``j`` sees in a
coalition ``C`` with total mass ``T`` is

    err_j(C) = mu_e / T + sigma2 * (sum_{i in C, i != j} n_i**2 + (T - n_j)**2) / T**2

All values are :class:`fractions.Fraction`, so preference and tie comparisons
are exact. Nothing in this module rounds.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

Rational = Fraction


class MembershipError(ValueError):
    """A player was expected to be in (or out of) a coalition and was not."""


def as_rational(value: int | str | Fraction) -> Fraction:
    if isinstance(value, float):
        raise TypeError("floats are not accepted; pass an int, str or Fraction")
    return Fraction(value)


@dataclass(frozen=True)
class GameParams:
    mu_e: Fraction
    sigma2: Fraction

    def __post_init__(self) -> None:
        object.__setattr__(self, "mu_e", as_rational(self.mu_e))
        object.__setattr__(self, "sigma2", as_rational(self.sigma2))
        if self.mu_e <= 0 or self.sigma2 <= 0:
            raise ValueError(f"mu_e and sigma2 must be positive, got {self.mu_e}, {self.sigma2}")

    @property
    def critical_size(self) -> Fraction:
        """The threshold mu_e / sigma2 separating small from large players."""
        return self.mu_e / self.sigma2


@dataclass(frozen=True)
class Player:
    id: int
    n: int

    def __post_init__(self) -> None:
        if int(self.n) != self.n or self.n < 1:
            raise ValueError(f"player {self.id}: sample count must be a positive integer, got {self.n}")


@dataclass(frozen=True)
class Coalition:
    """Sorted member ids with their sample counts and the cached total mass."""

    members: tuple[int, ...]
    sizes: tuple[int, ...]
    total_mass: int = field(default=-1)

    def __post_init__(self) -> None:
        if not self.members:
            raise ValueError("a coalition must be non-empty")
        if len(self.members) != len(self.sizes):
            raise ValueError("members and sizes differ in length")
        if any(a >= b for a, b in zip(self.members, self.members[1:])):
            raise ValueError(f"members must be strictly increasing: {self.members}")
        mass = sum(self.sizes)
        if self.total_mass == -1:
            object.__setattr__(self, "total_mass", mass)
        elif self.total_mass != mass:
            raise ValueError(f"cached total mass {self.total_mass} != {mass}")

    @classmethod
    def of(cls, sizes_by_id: dict[int, int] | Sequence[int], ids: Iterable[int]) -> Coalition:
        """Build a coalition from a size lookup (instance sizes list or dict)."""
        members = tuple(sorted(set(ids)))
        return cls(members, tuple(sizes_by_id[i] for i in members))

    def size_of(self, j: int) -> int:
        try:
            return self.sizes[self.members.index(j)]
        except ValueError:
            raise MembershipError(f"player {j} is not in coalition {set(self.members)}") from None

    def __contains__(self, j: object) -> bool:
        return j in self.members

    def __len__(self) -> int:
        return len(self.members)

    def __iter__(self):
        return iter(self.members)

    def sum_squares(self) -> int:
        return sum(n * n for n in self.sizes)

    def with_player(self, j: int, n: int) -> Coalition:
        if j in self.members:
            raise MembershipError(f"player {j} is already in coalition {set(self.members)}")
        pairs = sorted(zip(self.members + (j,), self.sizes + (n,)))
        return Coalition(tuple(p[0] for p in pairs), tuple(p[1] for p in pairs))

    def without_player(self, j: int) -> Coalition:
        if j not in self.members:
            raise MembershipError(f"player {j} is not in coalition {set(self.members)}")
        keep = [(m, n) for m, n in zip(self.members, self.sizes) if m != j]
        return Coalition(tuple(m for m, _ in keep), tuple(n for _, n in keep))


@dataclass(frozen=True)
class Partition:
    """Disjoint cover of players ``0..N-1``, stored in canonical order.

    Canonical order: members sorted inside each coalition, coalitions sorted
    by their smallest member.
    """

    coalitions: tuple[Coalition, ...]

    def __post_init__(self) -> None:
        ordered = tuple(sorted(self.coalitions, key=lambda c: c.members[0]))
        object.__setattr__(self, "coalitions", ordered)
        seen: set[int] = set()
        for c in ordered:
            if seen.intersection(c.members):
                raise ValueError("coalitions overlap")
            seen.update(c.members)
        if seen != set(range(len(seen))):
            raise ValueError(f"partition does not cover players 0..{len(seen) - 1}")

    @classmethod
    def from_groups(cls, inst: Instance, groups: Iterable[Iterable[int]]) -> Partition:
        groups = [list(g) for g in groups]
        flat = [i for g in groups for i in g]
        if sorted(flat) != list(range(inst.n_players)):
            raise ValueError(f"groups {groups} do not partition players 0..{inst.n_players - 1}")
        return cls(tuple(inst.coalition(g) for g in groups))

    @property
    def n_players(self) -> int:
        return sum(len(c) for c in self.coalitions)

    def coalition_of(self, j: int) -> Coalition:
        for c in self.coalitions:
            if j in c:
                return c
        raise MembershipError(f"player {j} is not in the partition")

    def groups(self) -> tuple[tuple[int, ...], ...]:
        return tuple(c.members for c in self.coalitions)

    def __len__(self) -> int:
        return len(self.coalitions)

    def __iter__(self):
        return iter(self.coalitions)


@dataclass(frozen=True)
class Instance:
    params: GameParams
    players: tuple[Player, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "players", tuple(self.players))
        if not self.players:
            raise ValueError("an instance needs at least one player")
        if [p.id for p in self.players] != list(range(len(self.players))):
            raise ValueError("player ids must be 0..N-1 in order")

    @classmethod
    def from_sizes(cls, mu_e, sigma2, sizes: Iterable[int]) -> Instance:
        return cls(GameParams(mu_e, sigma2), tuple(Player(i, int(n)) for i, n in enumerate(sizes)))

    @property
    def n_players(self) -> int:
        return len(self.players)

    @property
    def sizes(self) -> tuple[int, ...]:
        return tuple(p.n for p in self.players)

    @property
    def total_mass(self) -> int:
        return sum(self.sizes)

    def coalition(self, ids: Iterable[int]) -> Coalition:
        ids = list(ids)
        for i in ids:
            if not 0 <= i < self.n_players:
                raise MembershipError(f"unknown player id {i}")
        return Coalition.of(self.sizes, ids)

    def singletons(self) -> Partition:
        return Partition(tuple(self.coalition([i]) for i in range(self.n_players)))

    def grand_coalition(self) -> Partition:
        return Partition((self.coalition(range(self.n_players)),))


@dataclass(frozen=True)
class WeightVector:
    weights: tuple[Fraction, ...]

    def __post_init__(self) -> None:
        w = tuple(as_rational(x) for x in self.weights)
        object.__setattr__(self, "weights", w)
        if any(x <= 0 for x in w):
            raise ValueError("weights must be positive")
        if sum(w) != 1:
            raise ValueError(f"weights must sum to 1, got {sum(w)}")

    @classmethod
    def proportional(cls, inst: Instance) -> WeightVector:
        total = inst.total_mass
        return cls(tuple(Fraction(n, total) for n in inst.sizes))

    @classmethod
    def uniform(cls, n_players: int) -> WeightVector:
        return cls(tuple(Fraction(1, n_players) for _ in range(n_players)))

    def __len__(self) -> int:
        return len(self.weights)


def err_player(j: int, coalition: Coalition, params: GameParams) -> Fraction:
    """Expected squared error of player ``j`` inside ``coalition``."""
    n_j = coalition.size_of(j)
    total = coalition.total_mass
    others_sq = coalition.sum_squares() - n_j * n_j
    spread = Fraction(others_sq + (total - n_j) ** 2, total * total)
    return params.mu_e / total + params.sigma2 * spread


def err_gap_same_coalition(j: int, k: int, coalition: Coalition, params: GameParams) -> Fraction:
    """``err_j(C) - err_k(C)``, which collapses to ``2 sigma2 (n_k - n_j) / T_C``."""
    n_j = coalition.size_of(j)
    n_k = coalition.size_of(k)
    return 2 * params.sigma2 * Fraction(n_k - n_j, coalition.total_mass)


def coalition_cost(coalition: Coalition, params: GameParams) -> Fraction:
    """Size-weighted error of one coalition, ``sum_j n_j err_j(C)``, in closed form."""
    total = coalition.total_mass
    return params.mu_e + params.sigma2 * total - params.sigma2 * Fraction(coalition.sum_squares(), total)


def partition_cost(partition: Partition, params: GameParams) -> Fraction:
    return sum((coalition_cost(c, params) for c in partition), Fraction(0))


def unweighted_cost(partition: Partition, params: GameParams) -> Fraction:
    return sum((err_player(j, c, params) for c in partition for j in c), Fraction(0))


def arbitrary_weight_cost(partition: Partition, params: GameParams, weights: WeightVector) -> Fraction:
    if len(weights) != partition.n_players:
        raise ValueError(f"{len(weights)} weights for {partition.n_players} players")
    return sum(
        (weights.weights[j] * err_player(j, c, params) for c in partition for j in c),
        Fraction(0),
    )


def player_errors(partition: Partition, params: GameParams) -> dict[int, Fraction]:
    """Error of every player under ``partition``, keyed by player id."""
    return {j: err_player(j, c, params) for c in partition for j in c}


def format_rational(value: Fraction, places: int = 3, exact: bool = False) -> str:
    """Decimal rendering rounded half away from zero; ``exact`` gives ``p/q``."""
    value = Fraction(value)
    if exact:
        return str(value)
    scale = 10**places
    magnitude = (abs(value) * scale * 2 + 1) // 2
    sign = "-" if value < 0 and magnitude else ""
    whole, frac = divmod(int(magnitude), scale)
    if places == 0:
        return f"{sign}{whole}"
    return f"{sign}{whole}.{frac:0{places}d}"
