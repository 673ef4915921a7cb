from __future__ import annotations

from pathlib import Path

import pytest

TABLE1_JSON = '{"mu_e": "10", "sigma2": "1", "players": [1, 8, 15]}'


@pytest.fixture
def table1_file(tmp_path: Path) -> Path:
    path = tmp_path / "table1.json"
    path.write_text(TABLE1_JSON)
    return path


def pytest_terminal_summary(terminalreporter):
    from test_acceptance import VERDICTS

    if not VERDICTS:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(VERDICTS):
        terminalreporter.write_line(VERDICTS[key])
