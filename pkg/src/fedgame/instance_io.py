"""Instance files, partition specs and human-readable rendering."""

from __future__ import annotations

import json
import string
from fractions import Fraction
from pathlib import Path
from typing import Any

from .model import Coalition, Instance, Partition


class InputError(ValueError):
    """Malformed user input: exit status 2 at the command line."""


def parse_rational(text: Any, field: str = "value") -> Fraction:
    """Parse "10", "10/3" or an int; floats are refused because they are not exact."""
    if isinstance(text, bool) or isinstance(text, float):
        raise InputError(f"{field}: give an integer or a rational string, not {text!r}")
    if isinstance(text, int):
        return Fraction(text)
    if not isinstance(text, str):
        raise InputError(f"{field}: expected a rational string, got {type(text).__name__}")
    try:
        return Fraction(text.strip())
    except ZeroDivisionError:
        raise InputError(f"{field}: zero denominator in {text!r}") from None
    except ValueError:
        raise InputError(f"{field}: not a rational number: {text!r}") from None


def instance_from_json(data: Any) -> Instance:
    if not isinstance(data, dict):
        raise InputError("instance file must hold a JSON object")
    missing = {"mu_e", "sigma2", "players"} - set(data)
    if missing:
        raise InputError(f"instance file lacks {', '.join(sorted(missing))}")
    players = data["players"]
    if not isinstance(players, list) or not all(type(n) is int for n in players):
        raise InputError("players must be a list of integers")
    try:
        return Instance.from_sizes(
            parse_rational(data["mu_e"], "mu_e"), parse_rational(data["sigma2"], "sigma2"), players
        )
    except InputError:
        raise
    except ValueError as exc:
        raise InputError(str(exc)) from None


def parse_instance(text: str) -> Instance:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"instance file is not valid JSON: {exc}") from None
    return instance_from_json(data)


def load_instance(path: str | Path) -> Instance:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from None
    return parse_instance(text)


def render_instance(inst: Instance) -> str:
    data = {
        "mu_e": str(inst.params.mu_e),
        "sigma2": str(inst.params.sigma2),
        "players": list(inst.sizes),
    }
    return json.dumps(data)


def parse_partition(spec: str, inst: Instance) -> Partition:
    """Parse ``"0,1;2"``: groups split by ';', zero-based player ids split by ','."""
    groups = []
    for chunk in spec.split(";"):
        try:
            groups.append([int(tok) for tok in chunk.split(",")])
        except ValueError:
            raise InputError(f"malformed partition spec {spec!r}") from None
    seen = [j for g in groups for j in g]
    if any(not 0 <= j < inst.n_players for j in seen):
        raise InputError(f"partition spec names a player outside 0..{inst.n_players - 1}")
    if len(seen) != len(set(seen)) or len(seen) != inst.n_players:
        raise InputError(f"{spec!r} is not a partition of all {inst.n_players} players")
    return Partition.from_groups(inst, groups)


def player_label(j: int, n_players: int) -> str:
    return string.ascii_lowercase[j] if n_players <= 26 else str(j)


def coalition_label(c: Coalition, n_players: int) -> str:
    return "{" + ",".join(player_label(j, n_players) for j in c) + "}"


def partition_label(p: Partition, sep: str = " | ") -> str:
    n = p.n_players
    return sep.join(coalition_label(c, n) for c in p)
