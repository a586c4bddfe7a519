from __future__ import annotations

import pytest

from fibqkd.engine import joint_prob_no_eve, joint_prob_with_eve
from fibqkd.protocol import ProtocolConfig

ACCEPTANCE_RESULTS: dict = {}


@pytest.fixture(scope="session")
def cfg():
    return ProtocolConfig(n=8, m0=2)


@pytest.fixture(scope="session")
def p0_exact(cfg):
    return joint_prob_no_eve(cfg, exact=True)


@pytest.fixture(scope="session")
def pe_exact(cfg):
    return joint_prob_with_eve(cfg, exact=True)


@pytest.fixture(scope="session")
def p0(cfg):
    return joint_prob_no_eve(cfg)


@pytest.fixture(scope="session")
def pe(cfg):
    return joint_prob_with_eve(cfg)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE_RESULTS):
        ok, detail = ACCEPTANCE_RESULTS[key]
        terminalreporter.write_line(f"[{'PASS' if ok else 'FAIL'}] criterion {key}: {detail}")
