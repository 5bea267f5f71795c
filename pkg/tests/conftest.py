import functools

import pytest
from hypothesis import settings

from supercaloric import Medium, normalize_mass

settings.register_profile("lab", deadline=None, max_examples=60, derandomize=True)
settings.load_profile("lab")


@functools.lru_cache(maxsize=None)
def unit_mass_c(n, p):
    return normalize_mass(Medium(n, p))


@pytest.fixture(scope="session")
def m2():
    return Medium(2, 1.5)


@pytest.fixture(scope="session")
def m1():
    return Medium(1, 1.5)


#: acceptance criterion number -> (passed, detail); filled by test_acceptance
ACCEPTANCE = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[num]
        terminalreporter.write_line(f"criterion {num:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
