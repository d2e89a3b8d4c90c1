import pytest

from thermal_ising.specfn import ThermalParams

ACCEPTANCE: dict[int, str] = {}


@pytest.fixture(scope="session")
def params():
    return ThermalParams(1.0, 1.0)


def record(n: int, ok: bool, detail: str) -> str:
    line = f"ACCEPTANCE {n}: {'PASS' if ok else 'FAIL'}  {detail}"
    ACCEPTANCE[n] = line
    print(line)
    return line


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        terminalreporter.write_line(ACCEPTANCE[n])
