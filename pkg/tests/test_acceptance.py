"""Acceptance criteria 1-10; each prints one pass/fail line.

Tolerances live in erasenet.verify and are fixed: 1e-12 for exact
comparisons, 4 standard errors for Monte Carlo, 1e-4 for limit ratios.
"""

import time

import pytest

from conftest import ACCEPTANCE_LINES
from erasenet.verify import CHECKS, CheckResult


@pytest.mark.parametrize("number, name, check", CHECKS, ids=[f"criterion_{n:02d}" for n, _, _ in CHECKS])
def test_criterion(number, name, check):
    t0 = time.perf_counter()
    passed, detail = check(0)
    res = CheckResult(number, name, passed, detail, time.perf_counter() - t0)
    print(res.line())
    ACCEPTANCE_LINES.append(res.line())
    assert passed, detail
