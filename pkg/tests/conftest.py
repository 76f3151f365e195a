import pytest

from pcm_casimir.dielectric import default_materials
from pcm_casimir.lifshitz import PlateConfiguration


@pytest.fixture(scope="session")
def default_configs():
    mats = default_materials()
    c, a = mats["crystalline"], mats["amorphous"]
    return {"cc": PlateConfiguration(c, c, label="cc"),
            "ca": PlateConfiguration(c, a, label="ca"),
            "aa": PlateConfiguration(a, a, label="aa")}


ACCEPTANCE_RESULTS = {}


@pytest.fixture
def record_criterion():
    """Store one acceptance outcome for the end-of-run summary."""
    def record(number, title, passed, detail):
        ACCEPTANCE_RESULTS[number] = (title, bool(passed), detail)
        return passed
    return record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE_RESULTS):
        title, passed, detail = ACCEPTANCE_RESULTS[number]
        status = "PASS" if passed else "FAIL"
        terminalreporter.write_line(f"criterion {number} [{status}] {title}: {detail}")
