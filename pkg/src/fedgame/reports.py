from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any

from .model import Instance


def instance_to_dict(inst: Instance) -> dict[str, Any]:
    return {
        "mu_e": str(inst.params.mu_e),
        "sigma2": str(inst.params.sigma2),
        "players": list(inst.sizes),
    }


def instance_from_dict(data: dict[str, Any]) -> Instance:
    return Instance.from_sizes(Fraction(data["mu_e"]), Fraction(data["sigma2"]), data["players"])


def jsonable(value: Any) -> Any:
    if isinstance(value, Fraction):
        return str(value)
    if isinstance(value, Instance):
        return instance_to_dict(value)
    if isinstance(value, dict):
        return {str(k): jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple, set, frozenset)):
        return [jsonable(v) for v in value]
    return value


@dataclass
class CheckReport:
    """Outcome of a randomized or exhaustive property check.

    ``counterexample`` holds the first failing case in a JSON-ready form
    (instance plus whatever context the check needs to replay it).
    ``details`` carries summary statistics such as the worst ratio seen.
    """

    name: str
    trials: int
    passed: int
    counterexample: dict[str, Any] | None = None
    details: dict[str, Any] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if not 0 <= self.passed <= self.trials:
            raise ValueError(f"passed={self.passed} outside 0..{self.trials}")
        if (self.counterexample is not None) != (self.passed < self.trials):
            raise ValueError("a counterexample is present exactly when some trial failed")

    @property
    def ok(self) -> bool:
        return self.passed == self.trials

    def line(self) -> str:
        verdict = "PASS" if self.ok else "FAIL"
        return f"{verdict} {self.name}: {self.passed}/{self.trials}"

    def to_dict(self) -> dict[str, Any]:
        return {
            "name": self.name,
            "trials": self.trials,
            "passed": self.passed,
            "ok": self.ok,
            "counterexample": jsonable(self.counterexample),
            "details": jsonable(self.details),
        }


class ReportBuilder:
    def __init__(self, name: str):
        self.name = name
        self.trials = 0
        self.passed = 0
        self.counterexample: dict[str, Any] | None = None
        self.details: dict[str, Any] = {}

    def record(self, ok: bool, case: dict[str, Any] | None = None) -> None:
        self.trials += 1
        if ok:
            self.passed += 1
        elif self.counterexample is None:
            self.counterexample = jsonable(case or {})

    def build(self) -> CheckReport:
        return CheckReport(self.name, self.trials, self.passed, self.counterexample, self.details)
