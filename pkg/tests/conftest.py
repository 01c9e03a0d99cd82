import pytest

from slitwave.params import ScenarioParams

ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def neutron7():
    return ScenarioParams(wavelength=0.5, slit_count=7, slit_pitch=5.0, slit_width=1.0)


@pytest.fixture
def single_slit():
    return ScenarioParams(wavelength=0.5, slit_count=1, slit_pitch=5.0, slit_width=1.0)


@pytest.fixture
def criterion():
    """Record one pass/fail line per acceptance criterion."""

    def report(number: int, title: str, passed: bool, detail: str = ""):
        mark = "PASS" if passed else "FAIL"
        ACCEPTANCE_LINES.append(f"[{mark}] criterion {number:>2}: {title}" + (f" ({detail})" if detail else ""))
        return passed

    return report


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
