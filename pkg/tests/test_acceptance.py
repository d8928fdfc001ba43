"""Acceptance suite: every criterion at its stated tolerance, one line each.

Run ``pytest tests/test_acceptance.py -s`` to see the pass/fail table.
"""
import pytest

from hyperdiff.verification import CRITERIA, run_criterion

SEED = 0


@pytest.mark.parametrize("name, fn", CRITERIA, ids=[c[0].split(" ", 1)[1].replace(" ", "_")
                                                   for c in CRITERIA])
def test_criterion(name, fn):
    result = run_criterion(name, fn, SEED)
    print("\n" + result.line())
    assert result.passed, result.detail
