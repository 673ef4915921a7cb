from __future__ import annotations

import json
from pathlib import Path

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fedgame import cli
from fedgame.instance_io import (
    InputError,
    load_instance,
    parse_instance,
    parse_partition,
    parse_rational,
    partition_label,
    render_instance,
)
from fedgame.model import Instance


def run(capsys, *argv: str) -> tuple[int, str]:
    code = cli.main(list(argv))
    out = capsys.readouterr()
    return code, out.out + out.err


def write(tmp_path: Path, data: dict) -> str:
    path = tmp_path / "inst.json"
    path.write_text(json.dumps(data))
    return str(path)


def test_reproduce_table1_table(capsys):
    code, out = run(capsys, "reproduce-table1")
    assert code == 0
    assert "{a,c},{b}" in out and "PoA = 21.875/21.778 = 1.0045" in out
    assert "individually stable: {a,c},{b}" in out
    assert "optimal: {a,b},{c}" in out


def test_reproduce_table1_csv_columns(capsys):
    code, out = run(capsys, "reproduce-table1", "--format", "csv")
    lines = out.strip().splitlines()
    assert lines[0] == "partition,err_a,err_b,err_c,cost,avg_err,individually_stable"
    assert lines[1] == '"{a},{b},{c}",10.000,1.250,0.667,30.000,1.250,no'
    assert len(lines) == 6


def test_reproduce_table1_json_exact(capsys):
    code, out = run(capsys, "reproduce-table1", "--format", "json", "--exact")
    data = json.loads(out)
    assert data["poa"] == "225/224"
    assert data["rows"][4]["err_a"] == "529/288"


def test_optimal_with_oracle(capsys, table1_file):
    code, out = run(capsys, "optimal", "--instance", str(table1_file), "--oracle")
    assert code == 0
    assert out.splitlines()[0] == "{a,b} | {c} cost=21.778"
    assert "agrees" in out


def test_optimal_single_player(capsys, tmp_path):
    code, out = run(capsys, "optimal", "--instance", write(tmp_path, {"mu_e": "7/2", "sigma2": "1", "players": [4]}))
    assert code == 0 and out.strip() == "{a} cost=3.500"


def test_stability_verdicts(capsys, table1_file):
    code, out = run(capsys, "stability", "--instance", str(table1_file), "--partition", "0,2;1")
    assert code == 0 and "IS: stable" in out
    code, out = run(capsys, "stability", "--instance", str(table1_file), "--partition", "0,1;2")
    assert "IS: unstable, witness player 0 → coalition {2}" in out


def test_stability_core_on_small_players(capsys, tmp_path):
    path = write(tmp_path, {"mu_e": "10", "sigma2": "1", "players": [2, 3, 4]})
    code, out = run(capsys, "stability", "--instance", path, "--partition", "0;1;2", "--core", "--format", "json")
    rows = json.loads(out)["rows"]
    assert [r["notion"] for r in rows] == ["IS", "core"]
    assert rows[1]["stable"] is False and rows[1]["witness"] == "blocking coalition {0,1}"


@pytest.mark.parametrize("spec", ["0,1", "0,1;1,2", "0;x;2", "0;1;2;3", ""])
def test_bad_partition_specs_exit_2(capsys, table1_file, spec):
    code, out = run(capsys, "stability", "--instance", str(table1_file), "--partition", spec)
    assert code == 2 and "error" in out


def test_poa(capsys, table1_file):
    code, out = run(capsys, "poa", "--instance", str(table1_file))
    assert code == 0 and out.startswith("PoA=1.0045")
    code, out = run(capsys, "poa", "--instance", str(table1_file), "--format", "json", "--exact")
    assert json.loads(out)["rows"][0]["poa"] == "225/224"


def test_poa_all_large(capsys, tmp_path):
    path = write(tmp_path, {"mu_e": "10", "sigma2": "1", "players": [10, 12, 30]})
    code, out = run(capsys, "poa", "--instance", path, "--exact")
    assert code == 0 and out.startswith("PoA=1 ")


def test_poa_sweep(capsys):
    code, out = run(capsys, "poa", "--sweep", "20", "--max-players", "6")
    assert code == 0 and "bound<=9: holds" in out


def test_poa_needs_instance_or_sweep(capsys):
    assert run(capsys, "poa")[0] == 2


def test_budget_flag_and_env(capsys, table1_file, monkeypatch):
    code, out = run(capsys, "poa", "--instance", str(table1_file), "--budget", "2")
    assert code == 3 and "budget" in out
    monkeypatch.setenv("FEDGAME_BUDGET", "2")
    assert run(capsys, "optimal", "--instance", str(table1_file), "--oracle")[0] == 3
    # the flag wins over the environment
    assert run(capsys, "optimal", "--instance", str(table1_file), "--oracle", "--budget", "3")[0] == 0
    monkeypatch.setenv("FEDGAME_BUDGET", "lots")
    assert run(capsys, "poa", "--instance", str(table1_file))[0] == 2


def test_lemmas(capsys):
    code, out = run(capsys, "lemmas", "--suite", "swap", "--trials", "1")
    assert code == 0 and out.strip() == "PASS swap: 1/1"
    code, out = run(capsys, "lemmas", "--suite", "swap,welcome", "--trials", "5", "--format", "csv")
    assert code == 0 and out.splitlines()[0] == "name,trials,passed,ok,max_measure"


def test_lemmas_unknown_and_self_test(capsys):
    assert run(capsys, "lemmas", "--suite", "nope")[0] == 2
    code, out = run(capsys, "lemmas", "--suite", "swap", "--trials", "5", "--self-test")
    assert code == 1 and "FAIL injected_flip" in out and "counterexample" in out


def test_montecarlo(capsys, table1_file):
    args = ("montecarlo", "--instance", str(table1_file), "--trials", "20000", "--seed", "3")
    code, first = run(capsys, *args)
    assert code == 0 and "{a,b,c}" in first
    assert run(capsys, *args)[1] == first
    code, out = run(capsys, "montecarlo", "--instance", str(table1_file), "--partition", "0;1;2", "--format", "json", "--trials", "5000")
    rows = json.loads(out)["rows"]
    assert [r["theory"] for r in rows] == pytest.approx([10.0, 1.25, 2 / 3])
    assert run(capsys, "montecarlo", "--instance", str(table1_file), "--trials", "0")[0] == 2


@pytest.mark.parametrize(
    "data",
    [
        {"mu_e": "10/0", "sigma2": "1", "players": [1]},
        {"mu_e": 0.5, "sigma2": "1", "players": [1]},
        {"mu_e": "ten", "sigma2": "1", "players": [1]},
        {"mu_e": "10", "sigma2": "1", "players": [0]},
        {"mu_e": "10", "sigma2": "1", "players": [1.5]},
        {"mu_e": "-1", "sigma2": "1", "players": [1]},
        {"mu_e": "10", "players": [1]},
        [1, 2],
    ],
)
def test_bad_instance_files_exit_2(capsys, tmp_path, data):
    path = tmp_path / "bad.json"
    path.write_text(json.dumps(data))
    assert run(capsys, "optimal", "--instance", str(path))[0] == 2


def test_unreadable_and_invalid_json(capsys, tmp_path):
    assert run(capsys, "optimal", "--instance", str(tmp_path / "missing.json"))[0] == 2
    (tmp_path / "x.json").write_text("{not json")
    assert run(capsys, "optimal", "--instance", str(tmp_path / "x.json"))[0] == 2


def test_usage_errors_exit_2(capsys):
    assert run(capsys)[0] == 2
    assert run(capsys, "optimal")[0] == 2
    assert run(capsys, "reproduce-table1", "--format", "xml")[0] == 2


def test_parse_rational():
    assert parse_rational("10/3") == parse_rational(" 20/6 ")
    assert parse_rational(4) == 4
    with pytest.raises(InputError):
        parse_rational("1/0")
    with pytest.raises(InputError):
        parse_rational(True)


@settings(max_examples=100, deadline=None)
@given(
    st.fractions(min_value=0, max_value=100).filter(lambda x: x > 0),
    st.fractions(min_value=0, max_value=100).filter(lambda x: x > 0),
    st.lists(st.integers(1, 10**6), min_size=1, max_size=30),
)
def test_instance_round_trip(mu_e, sigma2, sizes):
    inst = Instance.from_sizes(mu_e, sigma2, sizes)
    assert parse_instance(render_instance(inst)) == inst


def test_load_and_label(table1_file):
    inst = load_instance(table1_file)
    p = parse_partition("1;2,0", inst)
    assert partition_label(p) == "{a,c} | {b}"
    big = Instance.from_sizes(1, 1, [1] * 27)
    assert partition_label(big.grand_coalition()).startswith("{0,1,2")
