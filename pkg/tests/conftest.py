import os
import sys
from pathlib import Path

import pytest
from hypothesis import settings

sys.path.insert(0, str(Path(__file__).parent))

from tfactor import fixture_path  # noqa: E402

settings.register_profile("ci", max_examples=200, deadline=None)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "ci"))

HIRSCH_DOI = "10.1073/pnas.0507655102"

ACCEPTANCE_RESULTS: list[tuple[str, bool, str]] = []


@pytest.fixture
def fixture_csv():
    return Path(str(fixture_path("csv")))


@pytest.fixture
def fixture_jsonl():
    return Path(str(fixture_path("jsonl")))


@pytest.fixture
def write_csv(tmp_path):
    def _write(rows, header="id,author,date,text,unit_id", name="in.csv"):
        path = tmp_path / name
        path.write_text("\n".join([header, *rows]) + "\n", encoding="utf-8")
        return path

    return _write


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for name, ok, detail in ACCEPTANCE_RESULTS:
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  {name}  {detail}".rstrip())
