from __future__ import annotations

from functools import lru_cache

import pytest

from becwall import ModelParams, SolverConfig, solve_heteroclinic, solve_reduced

# criterion number -> (passed, detail); filled by test_acceptance
ACCEPTANCE: dict[int, tuple[bool, str]] = {}


@lru_cache(maxsize=None)
def solved(lam: float, eps: float, n: int = 2401):
    """Session-wide cache so the acceptance and unit tests share solves."""
    return solve_heteroclinic(ModelParams.from_eps(lam, eps), SolverConfig(n=n))


@lru_cache(maxsize=None)
def reduced(lam: float):
    return solve_reduced(lam)


@pytest.fixture(scope="session")
def wall_l1():
    return solved(1.0, 0.2)


@pytest.fixture(scope="session")
def wall_l2():
    return solved(2.0, 0.1)


@pytest.fixture(scope="session")
def reduced_l1():
    return reduced(1.0)


@pytest.fixture
def record_acceptance():
    def record(number: int, passed: bool, detail: str) -> None:
        ACCEPTANCE[number] = (bool(passed), detail)

    return record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE):
        passed, detail = ACCEPTANCE[number]
        terminalreporter.write_line(f"criterion {number:2d}: {'PASS' if passed else 'FAIL'}  {detail}")
