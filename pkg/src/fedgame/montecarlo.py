"""Simulation of the generative model behind the closed-form error.

Each trial draws a true mean ``theta_i ~ Normal(M, sigma2)`` per player, lets
player ``i`` observe ``n_i`` samples with noise variance ``eps_i``, and forms the
coalition's estimate as the sample-count-weighted average of the local means.
The squared distance from that estimate to each member's own ``theta_j`` is the
per-trial loss whose mean should match :func:`fedgame.model.err_player`.

Trials are split into fixed-size chunks with one counter-based random stream
per (seed, coalition, chunk), so results do not depend on the worker count.
Chunk statistics are merged in chunk order.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Iterator

import numpy as np

from .model import Coalition, Instance, Partition, coalition_cost, err_player

CHUNK_TRIALS = 10_000


@dataclass(frozen=True)
class GenerativeConfig:
    """Distribution of player parameters and simulation controls.

    With ``random_noise`` each player's noise variance is drawn per trial from
    ``Uniform(0, 2 mu_e)`` (mean ``mu_e``) instead of being fixed at ``mu_e``.
    ``literal_samples`` draws every individual sample rather than the local
    mean's exact Gaussian law; it is slower and gives the same distribution.
    """

    mu_e: float
    sigma2: float
    meta_mean: float = 0.0
    family: str = "gaussian"
    seed: int = 0
    trials: int = 100_000
    random_noise: bool = False
    literal_samples: bool = False
    workers: int = 1

    def __post_init__(self) -> None:
        if not self.sigma2 > 0 or not self.mu_e > 0:
            raise ValueError("mu_e and sigma2 must be positive")
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if self.family != "gaussian":
            raise ValueError(f"unsupported distribution family {self.family!r}")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must fit in 64 unsigned bits")
        if self.workers < 1:
            raise ValueError("workers must be >= 1")

    @classmethod
    def for_instance(cls, inst: Instance, **kwargs) -> GenerativeConfig:
        return cls(mu_e=float(inst.params.mu_e), sigma2=float(inst.params.sigma2), **kwargs)


@dataclass(frozen=True)
class McResult:
    player: int
    coalition: tuple[int, ...]
    mse: float
    stderr: float
    theory: float
    z: float
    trials: int


@dataclass(frozen=True)
class AggregateResult:
    """Weighted cost of a whole partition: simulated mean against the closed form."""

    mean: float
    stderr: float
    theory: float
    z: float
    trials: int

    @property
    def within_3_stderr(self) -> bool:
        return abs(self.z) <= 3


@dataclass(frozen=True)
class PartitionValidation:
    """Per-player results (iterable like a list) plus the weighted-cost aggregate."""

    players: tuple[McResult, ...]
    aggregate: AggregateResult

    def __iter__(self) -> Iterator[McResult]:
        return iter(self.players)

    def __len__(self) -> int:
        return len(self.players)

    def __getitem__(self, i: int) -> McResult:
        return self.players[i]


@dataclass(frozen=True)
class _Moments:
    count: int
    mean: np.ndarray
    m2: np.ndarray

    def merge(self, other: _Moments) -> _Moments:
        # Chan et al. pairwise update of mean and sum of squared deviations
        n = self.count + other.count
        delta = other.mean - self.mean
        mean = self.mean + delta * (other.count / n)
        m2 = self.m2 + other.m2 + delta**2 * (self.count * other.count / n)
        return _Moments(n, mean, m2)


def _stream(seed: int, coalition: Coalition, chunk: int) -> np.random.Generator:
    key = (len(coalition), *coalition.members, chunk)
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=key))


def _chunk_losses(coalition: Coalition, gen: GenerativeConfig, chunk: int, size: int) -> np.ndarray:
    """Per-trial losses: one column per member, then the sample-weighted total."""
    rng = _stream(gen.seed, coalition, chunk)
    sizes = np.asarray(coalition.sizes, dtype=float)
    m = len(sizes)
    theta = rng.normal(gen.meta_mean, math.sqrt(gen.sigma2), size=(size, m))
    if gen.random_noise:
        eps = rng.uniform(0.0, 2.0 * gen.mu_e, size=(size, m))
    else:
        eps = np.full((size, m), gen.mu_e)
    if gen.literal_samples:
        local = np.empty((size, m))
        for col, n in enumerate(coalition.sizes):
            draws = rng.standard_normal((size, n)) * np.sqrt(eps[:, col : col + 1])
            local[:, col] = theta[:, col] + draws.mean(axis=1)
    else:
        local = theta + rng.standard_normal((size, m)) * np.sqrt(eps / sizes)
    estimate = local @ sizes / sizes.sum()
    losses = (estimate[:, None] - theta) ** 2
    weighted = losses @ sizes
    return np.column_stack([losses, weighted])


def _chunk_moments(coalition: Coalition, gen: GenerativeConfig, chunk: int, size: int) -> _Moments:
    data = _chunk_losses(coalition, gen, chunk, size)
    mean = data.mean(axis=0)
    return _Moments(size, mean, ((data - mean) ** 2).sum(axis=0))


def _simulate(coalition: Coalition, gen: GenerativeConfig) -> _Moments:
    if len(coalition) == 0:
        raise ValueError("cannot simulate an empty coalition")
    chunks = [
        (c, min(CHUNK_TRIALS, gen.trials - c * CHUNK_TRIALS))
        for c in range(math.ceil(gen.trials / CHUNK_TRIALS))
    ]
    if gen.workers > 1 and len(chunks) > 1:
        with ThreadPoolExecutor(gen.workers) as pool:
            parts = list(pool.map(lambda cs: _chunk_moments(coalition, gen, *cs), chunks))
    else:
        parts = [_chunk_moments(coalition, gen, *cs) for cs in chunks]
    total = parts[0]
    for part in parts[1:]:
        total = total.merge(part)
    return total


def _stderr(moments: _Moments) -> np.ndarray:
    if moments.count < 2:
        return np.full_like(moments.mean, math.nan)
    return np.sqrt(moments.m2 / (moments.count - 1) / moments.count)


def _z(mean: float, theory: float, stderr: float) -> float:
    if not stderr > 0:
        return math.nan
    return (mean - theory) / stderr


def _player_results(coalition: Coalition, inst: Instance, moments: _Moments) -> list[McResult]:
    se = _stderr(moments)
    out = []
    for col, j in enumerate(coalition.members):
        theory = float(err_player(j, coalition, inst.params))
        mean = float(moments.mean[col])
        out.append(McResult(j, coalition.members, mean, float(se[col]), theory, _z(mean, theory, float(se[col])), moments.count))
    return out


def simulate_coalition(coalition: Coalition, inst: Instance, gen: GenerativeConfig) -> list[McResult]:
    """Empirical per-member MSE of the coalition's weighted-average estimate."""
    return _player_results(coalition, inst, _simulate(coalition, gen))


def validate_partition(partition: Partition, inst: Instance, gen: GenerativeConfig) -> PartitionValidation:
    """Simulate every coalition and compare the total weighted loss with the closed-form cost.

    Coalitions use independent streams, so the aggregate's variance is the sum
    of the per-coalition variances of their weighted losses.
    """
    players: list[McResult] = []
    mean = var = theory = 0.0
    for coalition in partition:
        moments = _simulate(coalition, gen)
        players.extend(_player_results(coalition, inst, moments))
        mean += float(moments.mean[-1])
        var += float(_stderr(moments)[-1]) ** 2
        theory += float(coalition_cost(coalition, inst.params))
    stderr = math.sqrt(var)
    players.sort(key=lambda r: r.player)
    aggregate = AggregateResult(mean, stderr, theory, _z(mean, theory, stderr), gen.trials)
    return PartitionValidation(tuple(players), aggregate)
