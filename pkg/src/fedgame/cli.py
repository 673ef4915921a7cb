"""Command-line driver: ``fedgame <command> [options]``.

Exit status: 0 success, 1 a check failed, 2 bad usage or input, 3 the
instance is too large for exhaustive enumeration.

CSV columns per command (stable):

* optimal: partition, cost, avg_err, oracle_cost, oracle_agrees
* stability: partition, notion, stable, witness
* poa: trial, n_players, poa, pos, opt_cost, worst_cost, best_cost, n_stable, bound_ok
* lemmas: name, trials, passed, ok, max_measure
* montecarlo: player, coalition, mse, stderr, theory, z, trials
* reproduce-table1: partition, err_a, err_b, err_c, cost, avg_err, individually_stable
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Callable

from . import anarchy, lemma_lab, montecarlo
from .enumeration import BudgetError, EnumerationBudget, brute_force_optimal
from .instance_io import InputError, coalition_label, load_instance, parse_partition, partition_label, player_label
from .model import Instance, Partition, format_rational, partition_cost, player_errors
from .optimal import optimal_partition
from .stability import all_is_partitions, is_core_stable, is_individually_stable

EXIT_OK, EXIT_CHECK_FAILED, EXIT_USAGE, EXIT_BUDGET = 0, 1, 2, 3

TABLE1 = Instance.from_sizes(10, 1, [1, 8, 15])
TABLE1_ROWS = ([[0], [1], [2]], [[0], [1, 2]], [[0, 2], [1]], [[0, 1], [2]], [[0, 1, 2]])


@dataclass
class Output:
    """A command's result: rows for CSV/JSON, a summary, and human text for tables."""

    columns: list[str]
    rows: list[dict[str, Any]]
    summary: dict[str, Any] = field(default_factory=dict)
    text: Callable[[Callable[[Any, str], str]], list[str]] | None = None
    places: dict[str, int] = field(default_factory=dict)
    code: int = EXIT_OK


class Formatter:
    def __init__(self, exact: bool, places: dict[str, int]):
        self.exact = exact
        self.places = places

    def __call__(self, value: Any, column: str = "") -> str:
        if isinstance(value, bool):
            return "yes" if value else "no"
        if isinstance(value, Fraction):
            return format_rational(value, self.places.get(column, 3), self.exact)
        if isinstance(value, float):
            return f"{value:.{self.places.get(column, 4)}f}"
        if value is None:
            return ""
        return str(value)

    def json_value(self, value: Any) -> Any:
        if isinstance(value, Fraction):
            return str(value) if self.exact else float(value)
        if isinstance(value, dict):
            return {k: self.json_value(v) for k, v in value.items()}
        if isinstance(value, (list, tuple)):
            return [self.json_value(v) for v in value]
        return value


def render(out: Output, fmt: str, exact: bool) -> str:
    f = Formatter(exact, out.places)
    if fmt == "json":
        payload = {"rows": f.json_value(out.rows), **f.json_value(out.summary)}
        return json.dumps(payload, indent=2)
    if fmt == "csv":
        buf = io.StringIO()
        writer = csv.DictWriter(buf, out.columns, lineterminator="\n")
        writer.writeheader()
        for row in out.rows:
            writer.writerow({c: f(row.get(c), c) for c in out.columns})
        return buf.getvalue().rstrip("\n")
    if out.text is not None:
        return "\n".join(out.text(f))
    cells = [[f(row.get(c), c) for c in out.columns] for row in out.rows]
    widths = [max([len(c)] + [len(r[i]) for r in cells]) for i, c in enumerate(out.columns)]
    lines = ["  ".join(c.ljust(w) for c, w in zip(out.columns, widths))]
    lines += ["  ".join(v.ljust(w) for v, w in zip(r, widths)) for r in cells]
    lines += [f"{k}: {f(v, k)}" for k, v in out.summary.items()]
    return "\n".join(lines)


def _avg_err(cost: Fraction, inst: Instance) -> Fraction:
    return cost / inst.total_mass


def _budget(args) -> EnumerationBudget:
    if args.budget is not None:
        return EnumerationBudget(args.budget)
    try:
        return EnumerationBudget.from_env()
    except ValueError:
        raise InputError("FEDGAME_BUDGET must be a positive integer") from None


def cmd_optimal(args) -> Output:
    inst = load_instance(args.instance)
    best = optimal_partition(inst)
    cost = partition_cost(best, inst.params)
    row = {"partition": partition_label(best), "cost": cost, "avg_err": _avg_err(cost, inst)}
    code = EXIT_OK
    if args.oracle:
        _, oracle_cost = brute_force_optimal(inst, _budget(args))
        row.update(oracle_cost=oracle_cost, oracle_agrees=oracle_cost == cost)
        if oracle_cost != cost:
            code = EXIT_CHECK_FAILED

    def text(f):
        lines = [f"{row['partition']} cost={f(cost, 'cost')}"]
        if args.oracle:
            verdict = "agrees" if row["oracle_agrees"] else "DISAGREES"
            lines.append(f"brute force cost={f(row['oracle_cost'], 'cost')} ({verdict})")
        return lines

    columns = ["partition", "cost", "avg_err", "oracle_cost", "oracle_agrees"]
    return Output(columns, [row], text=text, code=code)


def cmd_stability(args) -> Output:
    inst = load_instance(args.instance)
    partition = parse_partition(args.partition, inst)
    label = partition_label(partition)
    rows = []
    stable, witness = is_individually_stable(partition, inst)
    rows.append({"partition": label, "notion": "IS", "stable": stable, "witness": witness.describe() if witness else ""})
    if args.core:
        stable, witness = is_core_stable(partition, inst, _budget(args))
        rows.append({"partition": label, "notion": "core", "stable": stable, "witness": witness.describe() if witness else ""})

    def text(f):
        lines = [label]
        for r in rows:
            verdict = "stable" if r["stable"] else f"unstable, witness {r['witness']}"
            lines.append(f"{r['notion']}: {verdict}")
        return lines

    return Output(["partition", "notion", "stable", "witness"], rows, text=text)


def _poa_row(inst: Instance, stability: str, budget: EnumerationBudget, trial: int | None = None) -> tuple[dict, anarchy.PoAReport]:
    report = anarchy.price_of_anarchy(inst, stability, budget)
    row = {
        "trial": trial,
        "n_players": inst.n_players,
        "poa": report.poa,
        "pos": report.pos,
        "opt_cost": report.opt_cost,
        "worst_cost": report.worst_cost,
        "best_cost": report.best_cost,
        "n_stable": report.n_stable,
        "bound_ok": report.poa <= anarchy.POA_BOUND,
    }
    return row, report


POA_COLUMNS = ["trial", "n_players", "poa", "pos", "opt_cost", "worst_cost", "best_cost", "n_stable", "bound_ok"]


def cmd_poa(args) -> Output:
    budget = _budget(args)
    places = {"poa": 4, "pos": 4}
    if args.sweep:
        cfg = lemma_lab.RandomInstanceConfig(n_players=(1, args.max_players), seed=args.seed)
        rows = []
        for t in range(args.sweep):
            inst = lemma_lab.random_instance(lemma_lab.trial_rng(args.seed, "poa_sweep", t), cfg)
            rows.append(_poa_row(inst, args.stability, budget, t)[0])
        worst = max(r["poa"] for r in rows)
        ok = all(r["bound_ok"] for r in rows)
        summary = {"instances": len(rows), "max_poa": worst, "bound_holds": ok}
        places["max_poa"] = 6

        def sweep_text(f):
            return [f"instances={len(rows)} max PoA={f(worst, 'max_poa')} bound<={anarchy.POA_BOUND}: {'holds' if ok else 'VIOLATED'}"]

        return Output(POA_COLUMNS, rows, summary, sweep_text, places, EXIT_OK if ok else EXIT_CHECK_FAILED)
    if args.instance is None:
        raise InputError("poa needs --instance or --sweep")
    inst = load_instance(args.instance)
    row, report = _poa_row(inst, args.stability, budget)
    summary = {
        "worst_is": partition_label(report.worst_is),
        "best_stable": partition_label(report.best_is),
        "optimal": partition_label(report.opt),
    }

    def text(f):
        notion = "IS" if args.stability == "is" else "core"
        return [
            f"PoA={f(report.poa, 'poa')} PoS({notion})={f(report.pos, 'pos')} bound<={anarchy.POA_BOUND}: {'holds' if row['bound_ok'] else 'VIOLATED'}",
            f"worst IS: {summary['worst_is']} cost={f(report.worst_cost, 'cost')}",
            f"best {notion}: {summary['best_stable']} cost={f(report.best_cost, 'cost')}",
            f"optimal: {summary['optimal']} cost={f(report.opt_cost, 'cost')}",
            f"stable partitions: {report.n_stable}",
        ]

    return Output(POA_COLUMNS, [row], summary, text, places, EXIT_OK if row["bound_ok"] else EXIT_CHECK_FAILED)


def cmd_lemmas(args) -> Output:
    names = None
    if args.suite:
        names = [n.strip() for n in args.suite.split(",") if n.strip()]
    cfg = lemma_lab.RandomInstanceConfig(seed=args.seed)
    try:
        reports = lemma_lab.run_suite(cfg, args.trials, names, inject_failure=args.self_test)
    except KeyError as exc:
        raise InputError(f"{exc.args[0]}; known: {', '.join(lemma_lab.CHECKS)}") from None
    rows = [
        {"name": r.name, "trials": r.trials, "passed": r.passed, "ok": r.ok, "max_measure": r.details.get("max_measure")}
        for r in reports
    ]
    failed = [r for r in reports if not r.ok]
    summary = {"checks": len(reports), "failed": len(failed)}
    if failed:
        summary["first_counterexample"] = {"check": failed[0].name, "case": failed[0].counterexample}

    def text(f):
        lines = []
        for r in reports:
            line = r.line()
            if "max_measure" in r.details:
                line += f" (max {f(r.details['max_measure'], 'max_measure')})"
            lines.append(line)
            if not r.ok:
                lines.append(f"  counterexample: {json.dumps(r.counterexample)}")
        return lines

    return Output(["name", "trials", "passed", "ok", "max_measure"], rows, summary, text, code=EXIT_CHECK_FAILED if failed else EXIT_OK)


def cmd_montecarlo(args) -> Output:
    inst = load_instance(args.instance)
    partition = parse_partition(args.partition, inst) if args.partition else inst.grand_coalition()
    try:
        gen = montecarlo.GenerativeConfig.for_instance(
            inst, seed=args.seed, trials=args.trials, random_noise=args.random_noise, workers=args.workers
        )
    except ValueError as exc:
        raise InputError(str(exc)) from None
    result = montecarlo.validate_partition(partition, inst, gen)
    n = inst.n_players
    rows = [
        {
            "player": player_label(r.player, n),
            "coalition": coalition_label(inst.coalition(r.coalition), n),
            "mse": r.mse,
            "stderr": r.stderr,
            "theory": r.theory,
            "z": r.z,
            "trials": r.trials,
        }
        for r in result
    ]
    agg = result.aggregate
    summary = {"cost_mean": agg.mean, "cost_stderr": agg.stderr, "cost_theory": agg.theory, "cost_z": agg.z}

    def text(f):
        header = f"{'player':<7}{'coalition':<14}{'mse':>10}{'stderr':>10}{'theory':>10}{'z':>8}"
        lines = [f"{partition_label(partition)}  trials={gen.trials} seed={gen.seed}", header]
        for r in rows:
            lines.append(
                f"{r['player']:<7}{r['coalition']:<14}{r['mse']:>10.4f}{r['stderr']:>10.4f}{r['theory']:>10.4f}{r['z']:>8.2f}"
            )
        lines.append(f"weighted cost {agg.mean:.4f} ± {agg.stderr:.4f} vs {agg.theory:.4f} (z={agg.z:.2f})")
        return lines

    return Output(["player", "coalition", "mse", "stderr", "theory", "z", "trials"], rows, summary, text)


def table1_report() -> tuple[list[dict[str, Any]], dict[str, Any]]:
    """Every row of the three-player worked example plus its stability summary."""
    inst = TABLE1
    rows = []
    for groups in TABLE1_ROWS:
        p = Partition.from_groups(inst, groups)
        errs = player_errors(p, inst.params)
        cost = partition_cost(p, inst.params)
        rows.append(
            {
                "partition": partition_label(p, ","),
                "err_a": errs[0],
                "err_b": errs[1],
                "err_c": errs[2],
                "cost": cost,
                "avg_err": _avg_err(cost, inst),
                "individually_stable": is_individually_stable(p, inst)[0],
            }
        )
    report = anarchy.price_of_anarchy(inst)
    stable = all_is_partitions(inst)
    summary = {
        "is_partitions": [partition_label(p, ",") for p in stable],
        "optimal": partition_label(report.opt, ","),
        "optimal_cost": report.opt_cost,
        "worst_is_cost": report.worst_cost,
        "poa": report.poa,
    }
    return rows, summary


def cmd_reproduce_table1(args) -> Output:
    rows, summary = table1_report()
    columns = ["partition", "err_a", "err_b", "err_c", "cost", "avg_err", "individually_stable"]

    def text(f):
        header = f"{'partition':<16}{'err_a':>8}{'err_b':>8}{'err_c':>8}{'cost':>9}{'avg_err':>9}  IS"
        lines = [f"mu_e={TABLE1.params.mu_e} sigma2={TABLE1.params.sigma2} sizes a=1 b=8 c=15", header]
        for r in rows:
            lines.append(
                f"{r['partition']:<16}" + "".join(f"{f(r[c], c):>8}" for c in ("err_a", "err_b", "err_c"))
                + f"{f(r['cost'], 'cost'):>9}{f(r['avg_err'], 'avg_err'):>9}  {f(r['individually_stable'])}"
            )
        lines.append(f"individually stable: {' ; '.join(summary['is_partitions'])}")
        lines.append(f"optimal: {summary['optimal']}")
        lines.append(
            f"PoA = {f(summary['worst_is_cost'], 'cost')}/{f(summary['optimal_cost'], 'cost')} = {f(summary['poa'], 'poa')}"
        )
        return lines

    return Output(columns, rows, summary, text, {"poa": 4})


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=["table", "csv", "json"], default="table")
    common.add_argument("--exact", action="store_true", help="print rationals as p/q")
    common.add_argument("--budget", type=int, help="max players for exhaustive enumeration (overrides FEDGAME_BUDGET)")

    parser = argparse.ArgumentParser(prog="fedgame", description="Coalition analysis for federated mean estimation.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("optimal", parents=[common], help="minimum-cost partition")
    p.add_argument("--instance", required=True)
    p.add_argument("--oracle", action="store_true", help="confirm the cost by brute force")
    p.set_defaults(handler=cmd_optimal)

    p = sub.add_parser("stability", parents=[common], help="individual (and core) stability of a partition")
    p.add_argument("--instance", required=True)
    p.add_argument("--partition", required=True, help='groups of zero-based ids, e.g. "0,1;2"')
    p.add_argument("--core", action="store_true", help="also scan every subset for a blocking coalition")
    p.set_defaults(handler=cmd_stability)

    p = sub.add_parser("poa", parents=[common], help="price of anarchy and stability by enumeration")
    p.add_argument("--instance")
    p.add_argument("--stability", choices=["is", "core"], default="is", help="notion used for the best stable partition")
    p.add_argument("--sweep", type=int, default=0, help="instead of --instance, draw this many random instances")
    p.add_argument("--max-players", type=int, default=8)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(handler=cmd_poa)

    p = sub.add_parser("lemmas", parents=[common], help="randomized property checks")
    p.add_argument("--suite", help="comma-separated check names (default: all)")
    p.add_argument("--trials", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--self-test", action="store_true", help="add a deliberately false check that must fail")
    p.set_defaults(handler=cmd_lemmas)

    p = sub.add_parser("montecarlo", parents=[common], help="simulated errors against the closed form")
    p.add_argument("--instance", required=True)
    p.add_argument("--partition", help="default: the grand coalition")
    p.add_argument("--trials", type=int, default=100_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--random-noise", action="store_true", help="draw each player's noise variance uniformly around mu_e")
    p.add_argument("--workers", type=int, default=1)
    p.set_defaults(handler=cmd_montecarlo)

    p = sub.add_parser("reproduce-table1", parents=[common], help="the three-player worked example")
    p.set_defaults(handler=cmd_reproduce_table1)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    try:
        out = args.handler(args)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except BudgetError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    print(render(out, args.format, args.exact))
    return out.code


if __name__ == "__main__":
    sys.exit(main())
