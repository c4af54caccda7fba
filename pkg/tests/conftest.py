import contextlib
import sys
from pathlib import Path

import pytest
from hypothesis import HealthCheck, settings

sys.path.insert(0, str(Path(__file__).parent))

ROOT = Path(__file__).resolve().parent.parent
SCENARIO = ROOT / "scenarios" / "table5.scenario"
SNAPSHOT_405 = ROOT / "scenarios" / "table5_t405.snapshot"

# Property runs are seeded: derandomize fixes the example stream per test.
settings.register_profile(
    "seeded",
    derandomize=True,
    database=None,
    deadline=None,
    print_blob=True,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("seeded")

VERDICTS: dict[int, tuple[str, bool, str]] = {}


class Verdict:
    def __init__(self, number: int, title: str):
        self.number = number
        self.title = title
        self.detail = ""


@contextlib.contextmanager
def criterion(number: int, title: str):
    """Record a pass/fail line for acceptance criterion ``number``."""
    v = Verdict(number, title)
    try:
        yield v
    except BaseException as exc:
        VERDICTS[number] = (title, False, v.detail or f"{type(exc).__name__}: {exc}".splitlines()[0])
        print(f"criterion {number}: FAIL  {title}  {VERDICTS[number][2]}")
        raise
    VERDICTS[number] = (title, True, v.detail)
    print(f"criterion {number}: PASS  {title}  {v.detail}")


def pytest_terminal_summary(terminalreporter):
    if not VERDICTS:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(VERDICTS):
        title, ok, detail = VERDICTS[n]
        terminalreporter.write_line(f"[{'PASS' if ok else 'FAIL'}] {n}. {title}: {detail}")


@pytest.fixture(scope="session")
def scenario_path():
    return SCENARIO


@pytest.fixture(scope="session")
def snapshot_path():
    return SNAPSHOT_405
