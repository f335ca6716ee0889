"""Runs the fourteen acceptance criteria at their stated tolerances and budgets.

Each criterion prints one PASS/FAIL line (shown with ``pytest -s`` and in the
terminal summary).
"""

import pytest

from borelkit.suites import CRITERIA, run_criterion

SEED = 7
_lines = []


@pytest.mark.parametrize("number", [c[0] for c in CRITERIA], ids=[f"{c[0]:02d}-{c[1]}" for c in CRITERIA])
def test_criterion(number):
    res = run_criterion(number, SEED)
    _lines.append(res.line())
    print(res.line())
    assert res.passed, res.details
    assert res.seconds <= res.budget, f"took {res.seconds:.1f} s, budget {res.budget} s"
