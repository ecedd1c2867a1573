"""Acceptance suite: one test per criterion, one PASS/FAIL line each.

Lines are also collected and printed in the terminal summary so they show up
under output capture. Slow: the full set takes tens of minutes.
"""
import pytest

from fireprop import acceptance

LINES: list[str] = []


@pytest.mark.slow
@pytest.mark.parametrize("fn", acceptance.ALL, ids=[f"criterion_{k:02d}" for k in range(1, len(acceptance.ALL) + 1)])
def test_criterion(fn):
    r = fn()
    LINES.append(r.line())
    print(r.line())
    assert r.passed, r.line()
